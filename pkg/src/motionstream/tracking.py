"""Per-joint PD tracking simulator (the desk-scale stand-in for a physics
tracker) and the tracking reward terms as pure evaluable functions.

Each joint is an independent double integrator driven by PD torque against
the reference; there is no contact or balance model, so falls are defined
kinematically (persistent large joint error).
"""

from dataclasses import dataclass, field

import numpy as np

from .kinematics import KinematicModel, default_model, fk_full_batch, mpjpe
from .motion import NUM_DOF, MotionSequence
from .rotations import quat_mul, quat_rotate

CONTROL_HZ = 200.0
DECIMATION = 4  # control substeps per reference frame (200 Hz / 50 Hz)

# reward sigmas and weights: root orientation, body pos (rel), body ori (rel),
# body linear velocity, body angular velocity
REWARD_SIGMAS = {"root_ori": 0.4, "body_pos": 0.3, "body_ori": 0.4, "lin_vel": 1.0, "ang_vel": 3.14}
REWARD_WEIGHTS = {"root_ori": 0.5, "body_pos": 1.0, "body_ori": 1.0, "lin_vel": 1.0, "ang_vel": 1.0}
PENALTY_ACTION_RATE = -0.1
PENALTY_JOINT_LIMIT = -10.0
PENALTY_CONTACT = -0.1

# domain-randomization ranges, stored for the report schema only (no physics here)
DOMAIN_RANDOMIZATION = {
    "ground_friction": (0.5, 1.5),
    "joint_offset_rad": (-0.05, 0.05),
    "com_offset_m": (-0.02, 0.02),
}


@dataclass(frozen=True)
class PdConfig:
    omega_n: float = 10.0  # the equation uses this value directly (see omega_in_rad_s)
    zeta: float = 2.0
    inertia: tuple = tuple([1.0] * NUM_DOF)  # reflected inertia per joint
    omega_in_rad_s: bool = False  # True: interpret omega_n as Hz and use 2*pi*omega_n

    def __post_init__(self):
        if self.omega_n <= 0 or self.zeta <= 0:
            raise ValueError("omega_n and zeta must be positive")
        if len(self.inertia) != NUM_DOF or min(self.inertia) <= 0:
            raise ValueError("inertia must be 29 positive values")

    @property
    def omega(self) -> float:
        return 2.0 * np.pi * self.omega_n if self.omega_in_rad_s else self.omega_n


def pd_gains(config: PdConfig):
    """k_p = I * omega^2, k_d = 2 * I * zeta * omega, per joint."""
    inertia = np.asarray(config.inertia, dtype=np.float64)
    w = config.omega
    return inertia * w * w, 2.0 * inertia * config.zeta * w


def pd_torque(p_target, q, q_dot, gains):
    kp, kd = gains
    return kp * (np.asarray(p_target) - np.asarray(q)) - kd * np.asarray(q_dot)


@dataclass
class TrialResult:
    fell: bool
    mpjpe_cm: float
    root_rmse_m: float
    rewards: list = field(default_factory=list)  # per-frame reward breakdowns


def simulate_track(
    reference: MotionSequence,
    pd: PdConfig = PdConfig(),
    dt: float = 1.0 / CONTROL_HZ,
    decimation: int = DECIMATION,
    fall_bound: float = 1.5,  # rad of persistent joint error counts as a fall
    fall_time: float = 0.5,  # s
    model: KinematicModel | None = None,
    compute_rewards: bool = True,
):
    """Track the reference joint-by-joint; returns (tracked, TrialResult).

    Semi-implicit Euler at 200 Hz with each reference frame held for
    `decimation` substeps.  The root is copied from the reference.
    """
    model = model or default_model()
    gains = pd_gains(pd)
    inertia = np.asarray(pd.inertia, dtype=np.float64)
    t_frames = len(reference)
    q = reference.dof[0].copy()
    qd = np.zeros(NUM_DOF)
    tracked = np.empty_like(reference.dof)
    tracked[0] = q
    for i in range(1, t_frames):
        target = reference.dof[i]
        for _ in range(decimation):
            tau = pd_torque(target, q, qd, gains)
            qd = qd + dt * tau / inertia
            q = q + dt * qd
        tracked[i] = q

    out = MotionSequence(reference.fps, tracked, reference.root_pos, reference.root_quat)
    err = np.abs(tracked - reference.dof)
    over = np.any(err > fall_bound, axis=1)
    need = int(round(fall_time * reference.fps))
    fell = False
    run = 0
    for flag in over:
        run = run + 1 if flag else 0
        if run > need:
            fell = True
            break
    pjpe = mpjpe(out, reference, model)
    rewards = reward_trace(out, reference, model) if compute_rewards else []
    return out, TrialResult(fell=fell, mpjpe_cm=pjpe, root_rmse_m=0.0, rewards=rewards)


class PdTracker:
    """Incremental per-joint PD integrator for streamed reference frames."""

    def __init__(self, pd: PdConfig = PdConfig(), dt: float = 1.0 / CONTROL_HZ, decimation: int = DECIMATION):
        self.gains = pd_gains(pd)
        self.inertia = np.asarray(pd.inertia, dtype=np.float64)
        self.dt = dt
        self.decimation = decimation
        self.q = None
        self.qd = np.zeros(NUM_DOF)

    def step_frames(self, dof_frames) -> np.ndarray:
        """Track a block of reference frames; returns the tracked frames."""
        dof_frames = np.atleast_2d(np.asarray(dof_frames, dtype=np.float64))
        out = np.empty_like(dof_frames)
        for i, target in enumerate(dof_frames):
            if self.q is None:
                self.q = target.copy()
            else:
                for _ in range(self.decimation):
                    tau = pd_torque(target, self.q, self.qd, self.gains)
                    self.qd = self.qd + self.dt * tau / self.inertia
                    self.q = self.q + self.dt * self.qd
            out[i] = self.q
        return out


def _rotvec(q_from, q_to) -> np.ndarray:
    """Rotation vector of the relative rotation q_from^-1 * q_to, shape (..., 3)."""
    conj = np.asarray(q_from) * np.array([1.0, -1.0, -1.0, -1.0])
    rel = quat_mul(conj, q_to)
    w = np.clip(np.abs(rel[..., 0]), 0.0, 1.0)
    sign = np.where(rel[..., 0] < 0, -1.0, 1.0)
    xyz = rel[..., 1:] * sign[..., None]
    angle = 2.0 * np.arccos(w)
    norm = np.linalg.norm(xyz, axis=-1)
    scale = np.where(norm > 1e-12, angle / np.maximum(norm, 1e-12), 2.0)
    return xyz * scale[..., None]


def _contact_exempt(model: KinematicModel):
    names = ("left_ankle_roll", "right_ankle_roll", "left_foot", "right_foot",
             "left_wrist_roll", "left_wrist_pitch", "left_wrist_yaw", "left_hand",
             "right_wrist_roll", "right_wrist_pitch", "right_wrist_yaw", "right_hand")
    idx = set()
    for n in names:
        try:
            idx.add(model.link_index(n))
        except KeyError:
            pass
    return idx


def reward_terms(
    tracked: MotionSequence,
    reference: MotionSequence,
    frame: int,
    model: KinematicModel | None = None,
    joint_limits=None,
    contact_z: float = -0.01,
) -> dict:
    """Named reward breakdown for one frame pair.

    Tracking terms are exp(-err^2 / sigma^2) with the configured sigmas and
    weights; penalties are action rate, joint-limit violations, and
    undesired (non-foot, non-hand) ground contacts.  `total` is the
    weighted sum.
    """
    model = model or default_model()
    lo = max(frame - 1, 0)
    pos_p, quat_p = fk_full_batch(tracked.dof[lo : frame + 1], tracked.root_pos[lo : frame + 1], tracked.root_quat[lo : frame + 1], model)
    pos_g, quat_g = fk_full_batch(reference.dof[lo : frame + 1], reference.root_pos[lo : frame + 1], reference.root_quat[lo : frame + 1], model)
    return _reward_from_kin(tracked, reference, frame, model, pos_p, quat_p, pos_g, quat_g, lo, joint_limits, contact_z)


def _reward_from_kin(tracked, reference, frame, model, pos_p, quat_p, pos_g, quat_g, lo, joint_limits, contact_z):
    fps = tracked.fps
    cur = frame - lo
    root_err = _rotvec(reference.root_quat[frame], tracked.root_quat[frame])
    terms = {}
    terms["root_ori"] = float(np.exp(-np.dot(root_err, root_err) / REWARD_SIGMAS["root_ori"] ** 2))

    def rel(pos, quat, k):
        conj = quat[k, 0] * np.array([1.0, -1.0, -1.0, -1.0])
        offs = pos[k] - pos[k, 0]
        return quat_rotate(np.broadcast_to(conj, (pos.shape[1], 4)), offs)

    rp = rel(pos_p, quat_p, cur)
    rg = rel(pos_g, quat_g, cur)
    terms["body_pos"] = float(np.exp(-np.mean(np.sum((rp - rg) ** 2, axis=1)) / REWARD_SIGMAS["body_pos"] ** 2))

    conj_p = np.broadcast_to(quat_p[cur, 0] * np.array([1.0, -1.0, -1.0, -1.0]), quat_p[cur].shape)
    conj_g = np.broadcast_to(quat_g[cur, 0] * np.array([1.0, -1.0, -1.0, -1.0]), quat_g[cur].shape)
    rel_q_p = quat_mul(conj_p, quat_p[cur])
    rel_q_g = quat_mul(conj_g, quat_g[cur])
    ori_err = _rotvec(rel_q_g, rel_q_p)
    terms["body_ori"] = float(np.exp(-np.mean(np.sum(ori_err**2, axis=1)) / REWARD_SIGMAS["body_ori"] ** 2))

    if cur > 0:
        v_p = (pos_p[cur] - pos_p[cur - 1]) * fps
        v_g = (pos_g[cur] - pos_g[cur - 1]) * fps
        w_p = _rotvec(quat_p[cur - 1], quat_p[cur]) * fps
        w_g = _rotvec(quat_g[cur - 1], quat_g[cur]) * fps
        act_rate = float(np.sum((tracked.dof[frame] - tracked.dof[frame - 1]) ** 2))
    else:
        v_p = v_g = np.zeros_like(pos_p[0])
        w_p = w_g = np.zeros_like(pos_p[0])
        act_rate = 0.0
    terms["lin_vel"] = float(np.exp(-np.mean(np.sum((v_p - v_g) ** 2, axis=1)) / REWARD_SIGMAS["lin_vel"] ** 2))
    terms["ang_vel"] = float(np.exp(-np.mean(np.sum((w_p - w_g) ** 2, axis=1)) / REWARD_SIGMAS["ang_vel"] ** 2))

    limits = joint_limits if joint_limits is not None else (np.full(NUM_DOF, -np.pi), np.full(NUM_DOF, np.pi))
    q = tracked.dof[frame]
    violations = int(np.sum((q < limits[0]) | (q > limits[1])))
    exempt = _contact_exempt(model)
    contact_links = [i for i in range(model.num_links) if i not in exempt and i != 0]
    contacts = int(np.sum(pos_p[cur, contact_links, 2] < contact_z))

    terms["action_rate_penalty"] = PENALTY_ACTION_RATE * act_rate
    terms["joint_limit_penalty"] = PENALTY_JOINT_LIMIT * violations
    terms["contact_penalty"] = PENALTY_CONTACT * contacts
    terms["total"] = (
        sum(REWARD_WEIGHTS[k] * terms[k] for k in REWARD_WEIGHTS)
        + terms["action_rate_penalty"]
        + terms["joint_limit_penalty"]
        + terms["contact_penalty"]
    )
    return terms


def reward_trace(tracked: MotionSequence, reference: MotionSequence, model: KinematicModel | None = None) -> list:
    """Per-frame reward breakdowns for a whole trial."""
    model = model or default_model()
    pos_p, quat_p = fk_full_batch(tracked.dof, tracked.root_pos, tracked.root_quat, model)
    pos_g, quat_g = fk_full_batch(reference.dof, reference.root_pos, reference.root_quat, model)
    out = []
    for frame in range(len(tracked)):
        lo = max(frame - 1, 0)
        out.append(
            _reward_from_kin(
                tracked, reference, frame, model,
                pos_p[lo : frame + 1], quat_p[lo : frame + 1], pos_g[lo : frame + 1], quat_g[lo : frame + 1],
                lo, None, -0.01,
            )
        )
    return out
