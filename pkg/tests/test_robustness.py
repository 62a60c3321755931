import numpy as np
import pytest

from motionstream.motion import MotionSequence, NUM_DOF
from motionstream.robustness import NoiseConfig, corrupt, roundtrip_error, sweep
from motionstream.synth import STAND_ROOT_HEIGHT, sinusoid_corpus


def clean_seq(n=400, fps=50.0, seed=0):
    rng = np.random.Generator(np.random.PCG64(seed))
    dof = rng.normal(0, 0.2, (n, NUM_DOF))
    pos = np.zeros((n, 3))
    pos[:, 2] = STAND_ROOT_HEIGHT
    quat = np.tile([1.0, 0.0, 0.0, 0.0], (n, 1))
    return MotionSequence(fps, dof, pos, quat)


class TestCorrupt:
    def test_scale_zero_bit_equal(self):
        seq = clean_seq()
        rng = np.random.Generator(np.random.PCG64(3))
        out = corrupt(seq, NoiseConfig(scale=0.0), rng)
        assert np.array_equal(out.dof, seq.dof)

    def test_seed_reproducible(self):
        seq = clean_seq()
        a = corrupt(seq, NoiseConfig(), np.random.Generator(np.random.PCG64(9)))
        b = corrupt(seq, NoiseConfig(), np.random.Generator(np.random.PCG64(9)))
        assert np.array_equal(a.dof, b.dof)

    def test_base_sigma_statistics(self):
        # isolate the base component: bursts and jitter disabled
        cfg = NoiseConfig(p_burst=0.0, p_jitter=0.0)
        n = 2000  # 2000*29 = 58k entries per rep; aggregate >= 1e6 samples
        diffs = []
        for seed in range(20):
            seq = clean_seq(n, seed=seed)
            noisy = corrupt(seq, cfg, np.random.Generator(np.random.PCG64(100 + seed)))
            diffs.append(noisy.dof - seq.dof)
        sd = np.concatenate(diffs).std()
        assert abs(sd - 0.01) / 0.01 < 0.10

    def test_jitter_count_binomial(self):
        cfg = NoiseConfig(sigma_base=0.0, p_burst=0.0)
        n = 4000
        total = 0
        trials = 10
        for seed in range(trials):
            seq = clean_seq(n, seed=seed)
            noisy = corrupt(seq, cfg, np.random.Generator(np.random.PCG64(seed)))
            total += np.count_nonzero(noisy.dof - seq.dof)
        n_entries = trials * n * NUM_DOF
        expect = 0.001 * n_entries
        sigma = np.sqrt(n_entries * 0.001 * 0.999)
        assert abs(total - expect) <= 3 * sigma

    def test_burst_length_range(self):
        # bursts only: every touched run is a union of 8-20 frame spans
        cfg = NoiseConfig(sigma_base=0.0, p_jitter=0.0, p_burst=0.05)
        for seed in range(30):
            rng = np.random.Generator(np.random.PCG64(seed))
            seq = clean_seq(100, seed=seed)
            noisy = corrupt(seq, cfg, rng)
            touched = np.where(np.any(noisy.dof != seq.dof, axis=1))[0]
            if touched.size == 0:
                continue
            runs = np.split(touched, np.where(np.diff(touched) > 1)[0] + 1)
            for run in runs:
                assert len(run) >= 8 or run[-1] == len(seq) - 1  # truncated at the end

    def test_scale_linearity_of_base(self):
        cfg1 = NoiseConfig(p_burst=0.0, p_jitter=0.0, scale=1.0)
        cfg4 = NoiseConfig(p_burst=0.0, p_jitter=0.0, scale=4.0)
        seq = clean_seq(2000)
        d1 = corrupt(seq, cfg1, np.random.Generator(np.random.PCG64(5))).dof - seq.dof
        d4 = corrupt(seq, cfg4, np.random.Generator(np.random.PCG64(5))).dof - seq.dof
        assert np.allclose(d4, 4.0 * d1)  # same rng stream, scaled sigmas

    def test_root_untouched(self):
        seq = clean_seq()
        out = corrupt(seq, NoiseConfig(), np.random.Generator(np.random.PCG64(2)))
        assert np.array_equal(out.root_pos, seq.root_pos)


class TestRoundtrip:
    def test_clean_input_equals_codec_error(self, trained_codec, small_corpus):
        seq = small_corpus[0]
        raw, rt = roundtrip_error(seq, seq, trained_codec)
        assert raw == 0.0
        assert rt > 0.0  # the codec's own reconstruction error

    def test_nonnegative(self, trained_codec, small_corpus):
        seq = small_corpus[1]
        noisy = corrupt(seq, NoiseConfig(), np.random.Generator(np.random.PCG64(1)))
        raw, rt = roundtrip_error(seq, noisy, trained_codec)
        assert raw >= 0.0 and rt >= 0.0

    def test_dim_mismatch(self, trained_codec):
        from motionstream.codec import default_music_config
        from motionstream.codec.model import init_params

        music = init_params(default_music_config(hidden_channels=16, group_norm_groups=4), seed=0)
        seq = clean_seq(64)
        with pytest.raises(ValueError):
            roundtrip_error(seq, seq, music)


class TestSweep:
    def test_scales_sorted_and_schema(self, trained_codec, small_corpus):
        result = sweep(small_corpus[:6], trained_codec, scales=(4.0, 1.0, 2.0), seed=3)
        assert result.scales == [1.0, 2.0, 4.0]
        assert len(result.raw_rms) == 3 and len(result.roundtrip_rms) == 3 and len(result.win_fraction) == 3

    def test_raw_error_increases_with_scale(self, trained_codec, small_corpus):
        result = sweep(small_corpus[:8], trained_codec, scales=(1.0, 2.0, 4.0, 8.0), seed=0)
        assert all(b > a for a, b in zip(result.raw_rms, result.raw_rms[1:]))

    def test_report_file(self, trained_codec, small_corpus, tmp_path):
        from motionstream.robustness import save_sweep_report

        result = sweep(small_corpus[:4], trained_codec, scales=(1.0, 2.0), seed=0)
        p = tmp_path / "sweep.txt"
        save_sweep_report(result, p)
        text = p.read_text()
        assert "scale=1" in text and "roundtrip_rms=" in text

    def test_tracker_sim_curves(self, trained_codec, small_corpus):
        from motionstream.kinematics import default_model, mpjpe
        from motionstream.tracking import simulate_track

        model = default_model()

        def tracker(rec_seq, clean):
            tracked, res = simulate_track(rec_seq, compute_rewards=False)
            m = mpjpe(tracked, clean.slice(0, len(tracked)), model)
            return m, (not res.fell) and m < 80.0

        result = sweep(small_corpus[:3], trained_codec, scales=(1.0, 4.0), seed=1, tracker=tracker)
        assert len(result.mpjpe_cm) == 2 and len(result.success_rate) == 2
        assert all(m >= 0 for m in result.mpjpe_cm)
        assert all(0.0 <= s <= 1.0 for s in result.success_rate)
        row = result.rows()[0]
        assert "mpjpe_cm" in row and "success_rate" in row
