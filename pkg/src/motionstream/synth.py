"""Synthetic motion generators used by the self-test suite, the demo CLI
paths, and the training acceptance runs: band-limited sinusoid corpora and
a kinematically consistent walking gait with real foot contacts."""

import numpy as np

from .motion import CANONICAL_FPS, NUM_DOF, MotionSequence
from .rotations import quat_from_yaw

STAND_ROOT_HEIGHT = 0.72  # slight crouch keeps the 2-link leg IK away from full extension
THIGH = 0.35  # hip pitch pivot to knee pivot, meters (matches g1_29dof.model)
SHANK = 0.30
ANKLE_TO_SOLE = 0.05
HIP_DROP = 0.0855  # root to hip pitch pivot


def sinusoid_mixing_basis(components: int = 3, seed: int = 123) -> np.ndarray:
    """Fixed joint-coupling basis, rows L1-normalized so per-DOF amplitude stays <= 1 rad."""
    rng = np.random.Generator(np.random.PCG64(seed))
    mix = rng.normal(size=(NUM_DOF, components))
    return mix / np.abs(mix).sum(axis=1, keepdims=True)


def sinusoid_sequence(rng, length: int, fps: float = CANONICAL_FPS, mix: np.ndarray | None = None) -> MotionSequence:
    """One sequence where every DOF is a sum of <= 3 sinusoids, amplitudes <= 1 rad.

    The sinusoids share frequencies and phases across DOFs through a fixed
    coupling basis (joints of one body move together), so the corpus lies
    on a low-dimensional manifold a few latent channels can carry.
    """
    if mix is None:
        mix = sinusoid_mixing_basis()
    k = mix.shape[1]
    t = np.arange(length) / fps
    amps = rng.uniform(0.4, 1.0, size=k) * rng.choice([-1.0, 1.0], size=k)
    freqs = rng.uniform(0.2, 2.0, size=k)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=k)
    comps = amps[:, None] * np.sin(2.0 * np.pi * freqs[:, None] * t[None, :] + phases[:, None])
    dof = (mix @ comps).T
    pos = np.zeros((length, 3))
    pos[:, 2] = STAND_ROOT_HEIGHT
    quat = np.tile([1.0, 0.0, 0.0, 0.0], (length, 1))
    return MotionSequence(fps, dof, pos, quat)


def sinusoid_corpus(n: int, length: int = 200, seed: int = 0, fps: float = CANONICAL_FPS) -> list:
    rng = np.random.Generator(np.random.PCG64(seed))
    mix = sinusoid_mixing_basis()
    return [sinusoid_sequence(rng, length, fps, mix) for _ in range(n)]


def _hermite(u, p0, p1, m0, m1):
    u2 = u * u
    u3 = u2 * u
    return (2 * u3 - 3 * u2 + 1) * p0 + (u3 - 2 * u2 + u) * m0 + (-2 * u3 + 3 * u2) * p1 + (u3 - u2) * m1


def _leg_ik(x_rel: float, z_rel: float):
    """Sagittal 2-link IK: ankle target relative to the hip pitch pivot.

    Returns (hip_pitch, knee, ankle_pitch) with the ankle pitch chosen to
    keep the foot level.
    """
    r2 = x_rel * x_rel + z_rel * z_rel
    r = np.sqrt(r2)
    r = min(r, THIGH + SHANK - 1e-6)
    alpha = np.arctan2(x_rel, -z_rel)
    cos_beta = np.clip((r * r + THIGH**2 - SHANK**2) / (2 * r * THIGH), -1.0, 1.0)
    beta = np.arccos(cos_beta)
    cos_gamma = np.clip((THIGH**2 + SHANK**2 - r * r) / (2 * THIGH * SHANK), -1.0, 1.0)
    flex = np.pi - np.arccos(cos_gamma)
    hip = -(alpha + beta)
    knee = flex
    ankle = -(hip + knee)
    return hip, knee, ankle


def synthetic_gait(
    duration: float,
    fps: float = CANONICAL_FPS,
    speed: float = 1.0,
    period: float = 1.0,
    clearance: float = 0.06,
    turn_rate: float = 0.0,
    arm_swing: float = 0.25,
    phase0: float = 0.0,
) -> MotionSequence:
    """Walking gait with alternating stance/swing and planted feet.

    During stance the foot is stationary in the world frame (the sole sits
    at ground level with zero velocity), so heel strikes are detectable
    with the standard height+speed rule.  `turn_rate` (rad/s) curves the
    path; the leg pattern stays sagittal in the body frame.
    """
    n = max(2, int(round(duration * fps)) + 1)
    dt = 1.0 / fps
    stride = speed * period / 2.0  # root travel per half cycle

    dof = np.zeros((n, NUM_DOF))
    pos = np.zeros((n, 3))
    quat = np.zeros((n, 4))
    yaw = 0.0
    xy = np.zeros(2)
    for i in range(n):
        t = i * dt
        pos[i, :2] = xy
        pos[i, 2] = STAND_ROOT_HEIGHT
        quat[i] = quat_from_yaw(yaw)
        for leg, sign in ((0, 1.0), (6, -1.0)):  # left DOFs start at 0, right at 6
            phase = (t / period + phase0 + (0.0 if sign > 0 else 0.5)) % 1.0
            if phase < 0.5:  # stance: rel x sweeps backward at ground speed
                u = phase / 0.5
                x_rel = stride / 2.0 - stride * u
                lift = 0.0
            else:
                u = (phase - 0.5) / 0.5
                x_rel = _hermite(u, -stride / 2.0, stride / 2.0, -stride, -stride)
                lift = clearance * np.sin(np.pi * u) ** 2
            z_rel = (ANKLE_TO_SOLE + lift) - (STAND_ROOT_HEIGHT - HIP_DROP)
            hip, knee, ankle = _leg_ik(x_rel, z_rel)
            dof[i, leg + 0] = hip
            dof[i, leg + 3] = knee
            dof[i, leg + 4] = ankle
        swing = arm_swing * np.sin(2.0 * np.pi * (t / period + phase0))
        dof[i, 15] = swing  # left shoulder pitch, counter to left leg
        dof[i, 22] = -swing
        heading = yaw
        xy = xy + speed * dt * np.array([np.cos(heading), np.sin(heading)])
        yaw += turn_rate * dt
    return MotionSequence(fps, dof, pos, quat)


def gait_library(total_duration: float = 60.0, seed: int = 0, fps: float = CANONICAL_FPS, period: float = 1.0) -> list:
    """Varied walking sequences (speeds and gentle turns) totaling ~total_duration seconds."""
    rng = np.random.Generator(np.random.PCG64(seed))
    pieces = []
    remaining = total_duration
    while remaining > 0:
        cycles = int(rng.integers(6, 13))
        span = cycles * period
        speed = float(rng.uniform(0.7, 1.3))
        turn = float(rng.uniform(-0.25, 0.25))
        pieces.append(synthetic_gait(span, fps=fps, speed=speed, period=period, turn_rate=turn))
        remaining -= span
    return pieces
