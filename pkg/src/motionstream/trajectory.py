"""Trajectory tokenization: orientation-invariant root displacements,
heading-change binning (6-degree bins, 60 tokens), and the trajectory
file format."""

import numpy as np

from .rotations import quat_normalize, quat_slerp, quat_to_mat, wrap_angle
from .vocab import TRAJ_SIZE

TRAJ_FPS = 5.0
TRAJ_MAGIC = "UATRAJ 1"
BIN_DEG = 6.0
STRAIGHT_TOKEN = 30  # heading change 0 lands here


def root_displacement(p_i, p_prev, rot_prev) -> np.ndarray:
    """Displacement expressed in the previous frame's coordinate system.

    `rot_prev` may be a unit quaternion (4,) or rotation matrix (3, 3).
    """
    p_i = np.asarray(p_i, dtype=np.float64)
    p_prev = np.asarray(p_prev, dtype=np.float64)
    rot_prev = np.asarray(rot_prev, dtype=np.float64)
    if rot_prev.shape == (4,):
        rot_prev = quat_to_mat(rot_prev)
    elif rot_prev.shape != (3, 3):
        raise ValueError("rotation must be a quaternion (4,) or matrix (3, 3)")
    return rot_prev.T @ (p_i - p_prev)


def _resample_path(pos, quat, fps, target_fps):
    pos = np.asarray(pos, dtype=np.float64)
    quat = quat_normalize(np.asarray(quat, dtype=np.float64))
    n = pos.shape[0]
    if n < 2:
        return pos, quat
    duration = (n - 1) / fps
    m = int(round(duration * target_fps)) + 1
    times = np.clip(np.arange(m) / target_fps, 0.0, duration)
    src = np.arange(n) / fps
    hi = np.clip(np.searchsorted(src, times, side="left"), 1, n - 1)
    lo = hi - 1
    w = np.clip((times - src[lo]) / (src[hi] - src[lo]), 0.0, 1.0)
    return pos[lo] + w[:, None] * (pos[hi] - pos[lo]), quat_slerp(quat[lo], quat[hi], w)


def tokenize_trajectory(pos, quat, fps: float) -> list:
    """Token per 5-FPS path segment: binned wrapped heading change.

    Token = floor((dtheta + 180deg) / 6deg) clamped to [0, 59]; the first
    segment and zero-length segments carry the previous heading, so a
    straight or stationary path yields token 30 throughout.
    """
    pos = np.asarray(pos, dtype=np.float64)
    pos5, quat5 = _resample_path(pos, quat, fps, TRAJ_FPS)
    if pos5.shape[0] < 2:
        raise ValueError("trajectory needs at least 2 samples after resampling to 5 FPS")
    headings = []
    prev_heading = 0.0
    for i in range(1, pos5.shape[0]):
        r = root_displacement(pos5[i], pos5[i - 1], quat5[i - 1])
        if np.hypot(r[0], r[1]) < 1e-9:
            heading = prev_heading  # standing still: carry the previous segment heading
        else:
            heading = float(np.arctan2(r[1], r[0]))
        headings.append(heading)
        prev_heading = heading
    tokens = []
    for i, h in enumerate(headings):
        dtheta = 0.0 if i == 0 else float(wrap_angle(h - headings[i - 1]))
        tok = int(np.floor((np.degrees(dtheta) + 180.0) / BIN_DEG))
        tokens.append(min(max(tok, 0), TRAJ_SIZE - 1))
    return tokens


def save_trajectory(pos, quat, fps: float, path) -> None:
    pos = np.asarray(pos, dtype=np.float64)
    quat = np.asarray(quat, dtype=np.float64)
    lines = [f"{TRAJ_MAGIC} {repr(float(fps))} {pos.shape[0]}"]
    for p, q in zip(pos, quat):
        lines.append(" ".join(repr(float(v)) for v in (*p, *q)))
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def load_trajectory(path):
    """Returns (pos (N,3), quat (N,4), fps)."""
    with open(path) as f:
        header = f.readline().split()
        if len(header) != 4 or " ".join(header[:2]) != TRAJ_MAGIC:
            raise ValueError(f"{path}: not a trajectory file")
        fps = float(header[2])
        n = int(header[3])
        data = np.loadtxt(f, dtype=np.float64, ndmin=2)
    if data.shape != (n, 7):
        raise ValueError(f"{path}: expected {n}x7 values, got {data.shape}")
    return data[:, :3], quat_normalize(data[:, 3:]), fps


def parse_trajectory_text(text: str):
    """Parse the trajectory file format from an in-memory string (wire payloads)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = lines[0].split()
    if len(header) != 4 or " ".join(header[:2]) != TRAJ_MAGIC:
        raise ValueError("not a trajectory payload")
    fps = float(header[2])
    n = int(header[3])
    data = np.array([[float(v) for v in ln.split()] for ln in lines[1:]], dtype=np.float64)
    if data.shape != (n, 7):
        raise ValueError("trajectory payload shape mismatch")
    return data[:, :3], quat_normalize(data[:, 3:]), fps
