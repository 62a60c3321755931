import numpy as np
import pytest

from motionstream.metrics import (
    diversity,
    features,
    fid,
    genre_score,
    mm_dist,
    r_precision,
    root_rmse,
    success_rate,
)
from motionstream.motion import MotionSequence, NUM_DOF
from motionstream.synth import STAND_ROOT_HEIGHT
from motionstream.tracking import (
    PdConfig,
    TrialResult,
    pd_gains,
    pd_torque,
    reward_terms,
    simulate_track,
)


def seq_of(dof, fps=50.0, pos=None):
    n = dof.shape[0]
    if pos is None:
        pos = np.zeros((n, 3))
        pos[:, 2] = STAND_ROOT_HEIGHT
    quat = np.tile([1.0, 0.0, 0.0, 0.0], (n, 1))
    return MotionSequence(fps, dof, pos, quat)


def normalized_set(rng, n, mean, std, dim=1):
    """Samples with exact sample mean/std (ddof=1) for analytic fid cases."""
    x = rng.normal(size=(n, dim))
    x = (x - x.mean(axis=0)) / x.std(axis=0, ddof=1)
    return mean + std * x


class TestFeatures:
    def test_constant_sequence(self):
        f = features(seq_of(np.full((10, NUM_DOF), 0.3)))
        assert np.allclose(f[NUM_DOF : 2 * NUM_DOF], 0.0)  # std block
        assert np.allclose(f[2 * NUM_DOF : 3 * NUM_DOF], 0.0)  # velocity block

    def test_time_reversal_invariant(self, rng):
        dof = rng.normal(0, 0.3, (20, NUM_DOF))
        a = features(seq_of(dof))
        b = features(seq_of(dof[::-1].copy()))
        assert np.allclose(a, b)

    def test_scaling_linear_in_mean_std(self, rng):
        dof = rng.normal(0.2, 0.3, (20, NUM_DOF))
        f1 = features(seq_of(dof))
        f2 = features(seq_of(2.0 * dof))
        assert np.allclose(f2[: 2 * NUM_DOF], 2.0 * f1[: 2 * NUM_DOF])

    def test_translation_invariant(self, rng):
        dof = rng.normal(0, 0.3, (20, NUM_DOF))
        pos = np.zeros((20, 3))
        pos[:, 0] = np.arange(20) * 0.01
        a = features(MotionSequence(50.0, dof, pos, np.tile([1, 0, 0, 0.0], (20, 1))))
        b = features(MotionSequence(50.0, dof, pos + np.array([5.0, -3.0, 0.0]), np.tile([1, 0, 0, 0.0], (20, 1))))
        assert np.allclose(a, b)

    def test_single_frame_rejected(self):
        with pytest.raises(ValueError):
            features(seq_of(np.zeros((1, NUM_DOF))))


class TestFid:
    def test_identical_zero(self, rng):
        x = rng.normal(size=(200, 4))
        assert fid(x, x) < 1e-9

    def test_mean_shift_analytic(self, rng):
        a = normalized_set(rng, 500, 0.0, 1.0)
        b = a + 1.0
        assert abs(fid(a, b) - 1.0) < 1e-9

    def test_variance_analytic(self, rng):
        a = normalized_set(rng, 500, 0.0, 1.0)
        b = normalized_set(rng, 500, 0.0, 3.0)
        assert abs(fid(a, b) - 4.0) < 1e-9

    def test_symmetric_nonnegative(self, rng):
        a = rng.normal(size=(100, 5))
        b = rng.normal(1.0, 2.0, size=(100, 5))
        assert abs(fid(a, b) - fid(b, a)) < 1e-8
        assert fid(a, b) >= 0.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            fid(np.zeros((0, 3)), np.zeros((5, 3)))

    def test_small_sets_ridge(self, rng):
        a = rng.normal(size=(3, 8))  # fewer samples than dims
        b = rng.normal(size=(3, 8))
        assert np.isfinite(fid(a, b))


class TestPairedMetrics:
    def test_identical_features(self, rng):
        x = np.tile(rng.normal(size=(1, 6)), (64, 1))
        assert diversity(x, rng=rng) == 0.0
        assert mm_dist(x, x) == 0.0
        # all distances tie; top-1 is position 0, the true match lands there 1/32 of the time
        hits = []
        for seed in range(60):
            r = np.random.Generator(np.random.PCG64(seed))
            hits.append(r_precision(x, x, k=1, rng=r))
        mean_hit = np.mean(hits) / 100.0
        assert abs(mean_hit - 1 / 32) < 0.03

    def test_separable_pairs_perfect(self, rng):
        n = 64
        base = np.arange(n, dtype=np.float64)[:, None] * 10.0
        m = np.hstack([base, base])
        c = m + 0.01
        assert r_precision(m, c, k=1, rng=rng) == 100.0

    def test_monotone_in_k(self, rng):
        m = rng.normal(size=(96, 8))
        c = m + rng.normal(0, 2.0, size=(96, 8))
        r = [r_precision(m, c, k=k, rng=np.random.Generator(np.random.PCG64(4))) for k in (1, 2, 3)]
        assert r[0] <= r[1] <= r[2]

    def test_k_exceeds_batch(self, rng):
        m = rng.normal(size=(64, 4))
        with pytest.raises(ValueError):
            r_precision(m, m, k=33, rng=rng)

    def test_mm_dist_mismatch(self, rng):
        with pytest.raises(ValueError):
            mm_dist(rng.normal(size=(4, 3)), rng.normal(size=(5, 3)))


class TestRootRmseSuccess:
    def test_identical_path_zero(self):
        n = 50
        pos = np.zeros((n, 3))
        pos[:, 0] = np.arange(n) * 0.02
        seq = MotionSequence(50.0, np.zeros((n, NUM_DOF)), pos, np.tile([1, 0, 0, 0.0], (n, 1)))
        assert root_rmse(seq, pos, 50.0) == 0.0

    def test_constant_lateral_offset(self):
        n = 50
        pos = np.zeros((n, 3))
        seq = MotionSequence(50.0, np.zeros((n, NUM_DOF)), pos, np.tile([1, 0, 0, 0.0], (n, 1)))
        target = pos.copy()
        target[:, 1] += 1.0
        assert abs(root_rmse(seq, target, 50.0) - 1.0) < 1e-12

    def test_success_thresholds(self):
        trials = [
            TrialResult(fell=False, mpjpe_cm=79.9, root_rmse_m=0.99),
            TrialResult(fell=False, mpjpe_cm=80.1, root_rmse_m=1.01),
            TrialResult(fell=True, mpjpe_cm=1.0, root_rmse_m=0.1),
        ]
        assert success_rate(trials, "text") == pytest.approx(100.0 / 3)
        assert success_rate(trials, "trajectory") == pytest.approx(100.0 / 3)
        assert success_rate(trials, "music") == pytest.approx(200.0 / 3)

    def test_empty_trials(self):
        with pytest.raises(ValueError):
            success_rate([], "text")


class TestGenre:
    def test_distinct_clusters_score_one(self):
        groups = {"a": [np.zeros(4)] * 3, "b": [np.ones(4) * 5] * 3}
        assert genre_score(groups) == 1.0

    def test_all_identical_guarded_zero(self):
        groups = {"a": [np.zeros(4)] * 3, "b": [np.zeros(4)] * 3}
        assert genre_score(groups) == 0.0

    def test_shuffled_labels_near_zero(self, rng):
        blob_a = rng.normal(0, 0.1, size=(20, 4))
        blob_b = rng.normal(5, 0.1, size=(20, 4))
        both = np.concatenate([blob_a, blob_b])
        perm = rng.permutation(40)
        groups = {"a": list(both[perm[:20]]), "b": list(both[perm[20:]])}
        assert genre_score(groups) < 0.2

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError):
            genre_score({"a": [np.zeros(3), np.zeros(3)]})


class TestPd:
    def test_gains_literal_values(self):
        kp, kd = pd_gains(PdConfig())
        assert kp[0] == 100.0 and kd[0] == 40.0

    def test_gains_rad_interpretation(self):
        kp, kd = pd_gains(PdConfig(omega_in_rad_s=True))
        assert abs(kp[0] - (2 * np.pi * 10) ** 2) < 1e-9

    def test_gains_monotonic(self):
        kp1, _ = pd_gains(PdConfig(omega_n=10.0))
        kp2, _ = pd_gains(PdConfig(omega_n=12.0))
        kp3, _ = pd_gains(PdConfig(inertia=tuple([2.0] * NUM_DOF)))
        assert np.all(kp2 > kp1) and np.all(kp3 > kp1)

    def test_torque_zero_error(self):
        gains = pd_gains(PdConfig())
        tau = pd_torque(np.zeros(NUM_DOF), np.zeros(NUM_DOF), np.zeros(NUM_DOF), gains)
        assert np.allclose(tau, 0.0)

    def test_torque_velocity_damping(self):
        gains = pd_gains(PdConfig())
        v = np.full(NUM_DOF, 0.3)
        tau = pd_torque(np.zeros(NUM_DOF), np.zeros(NUM_DOF), v, gains)
        assert np.allclose(tau, -gains[1] * v)


class TestSimulateTrack:
    def test_constant_exact(self):
        ref = seq_of(np.full((60, NUM_DOF), 0.2))
        tracked, res = simulate_track(ref, compute_rewards=False)
        assert np.array_equal(tracked.dof, ref.dof)
        assert not res.fell and res.mpjpe_cm == 0.0

    def test_step_overshoot_overdamped(self):
        dof = np.zeros((150, NUM_DOF))
        dof[1:, 0] = 1.0
        tracked, _ = simulate_track(seq_of(dof), compute_rewards=False)
        assert tracked.dof[:, 0].max() - 1.0 <= 0.01

    def test_ramp_steady_state_lag(self):
        rate = 0.5
        n = 400
        dof = np.zeros((n, NUM_DOF))
        dof[:, 0] = np.arange(n) / 50.0 * rate
        tracked, _ = simulate_track(seq_of(dof), compute_rewards=False)
        kp, kd = pd_gains(PdConfig())
        expect = kd[0] * rate / kp[0]
        lag = dof[-1, 0] - tracked.dof[-1, 0]
        assert abs(lag - expect) / expect < 0.05

    def test_no_oscillation_overdamped(self):
        dof = np.zeros((200, NUM_DOF))
        dof[1:, 0] = 0.5
        tracked, _ = simulate_track(seq_of(dof), compute_rewards=False)
        err = 0.5 - tracked.dof[1:, 0]
        signs = np.sign(err[np.abs(err) > 1e-12])
        assert (np.diff(signs) != 0).sum() <= 1

    def test_fall_detection(self):
        dof = np.zeros((120, NUM_DOF))
        dof[1:, 0] = 50.0  # unreachable step: error stays > bound much longer than 0.5 s
        _, res = simulate_track(seq_of(dof), fall_bound=1.5, compute_rewards=False)
        assert res.fell


def tall_seq(dof, fps=50.0):
    """Standing root height for straight-leg poses (soles at z=0, no penetration)."""
    n = dof.shape[0]
    pos = np.zeros((n, 3))
    pos[:, 2] = 0.7855
    return MotionSequence(fps, dof, pos, np.tile([1.0, 0.0, 0.0, 0.0], (n, 1)))


class TestRewards:
    def test_zero_error_total(self, model):
        ref = tall_seq(np.zeros((10, NUM_DOF)))
        terms = reward_terms(ref, ref, 5, model)
        for k in ("root_ori", "body_pos", "body_ori", "lin_vel", "ang_vel"):
            assert terms[k] == pytest.approx(1.0)
        assert terms["total"] == pytest.approx(4.5)

    def test_root_ori_e_inverse(self, model):
        from motionstream.rotations import quat_from_axis_angle

        n = 4
        ref = tall_seq(np.zeros((n, NUM_DOF)))
        # rotation-vector error of norm 0.4 -> exp(-0.4^2/0.4^2) = 1/e
        quat = np.tile(quat_from_axis_angle(np.array([0.0, 0.0, 1.0]), 0.4), (n, 1))
        trk = MotionSequence(50.0, ref.dof, ref.root_pos, quat)
        terms = reward_terms(trk, ref, 2, model)
        assert terms["root_ori"] == pytest.approx(np.exp(-1.0), rel=1e-6)

    def test_joint_limit_penalty(self, model):
        dof = np.zeros((4, NUM_DOF))
        dof[:, 3] = 4.0  # outside +-pi
        trk = tall_seq(dof)
        ref = tall_seq(np.zeros((4, NUM_DOF)))
        terms = reward_terms(trk, ref, 1, model)
        assert terms["joint_limit_penalty"] == -10.0

    def test_exp_terms_in_unit_interval(self, model, rng):
        trk = tall_seq(rng.normal(0, 0.4, (6, NUM_DOF)))
        ref = tall_seq(rng.normal(0, 0.4, (6, NUM_DOF)))
        terms = reward_terms(trk, ref, 3, model)
        for k in ("root_ori", "body_pos", "body_ori", "lin_vel", "ang_vel"):
            assert 0.0 < terms[k] <= 1.0
