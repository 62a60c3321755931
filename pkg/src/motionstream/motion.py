"""Canonical motion representations and frame-level operations.

The universal payload is a `MotionSequence`: fps-stamped frames of 29
joint angles (radians) plus a floating-base root state.  Sequences are
immutable after construction (arrays are frozen) and safe to share.
"""

from dataclasses import dataclass

import numpy as np

from .rotations import quat_normalize, quat_slerp

NUM_DOF = 29
CANONICAL_FPS = 50.0
# motion file frame: px py pz qw qx qy qz + 29 joint angles
FRAME_WIDTH = 7 + NUM_DOF

MOTION_MAGIC = "UAMOTION 1"


def as_dof_vector(values) -> np.ndarray:
    """Validate and return a (29,) float64 joint-angle vector."""
    v = np.asarray(values, dtype=np.float64)
    if v.shape != (NUM_DOF,):
        raise ValueError(f"DofVector must have exactly {NUM_DOF} entries, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("DofVector entries must be finite")
    return v


@dataclass(frozen=True)
class RootState:
    """Floating-base pose: world position (m) and unit orientation quaternion."""

    position: np.ndarray
    orientation: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=np.float64)
        quat = np.asarray(self.orientation, dtype=np.float64)
        if pos.shape != (3,) or quat.shape != (4,):
            raise ValueError("RootState needs a 3-vector position and 4-vector quaternion")
        if abs(np.linalg.norm(quat) - 1.0) > 1e-9:
            raise ValueError("RootState orientation must be a unit quaternion (|q| = 1 ± 1e-9)")
        pos = pos.copy()
        quat = quat.copy()
        pos.flags.writeable = False
        quat.flags.writeable = False
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "orientation", quat)


def identity_root() -> RootState:
    return RootState(np.zeros(3), np.array([1.0, 0.0, 0.0, 0.0]))


@dataclass(frozen=True)
class MotionSequence:
    """Ordered frames of (joint angles, root state) at a fixed frame rate.

    dof: (T, 29) radians; root_pos: (T, 3) meters; root_quat: (T, 4) unit
    quaternions.  The canonical internal rate is 50 Hz; file ingest goes
    through `load_motion(..., canonical=True)` which resamples.
    """

    fps: float
    dof: np.ndarray
    root_pos: np.ndarray
    root_quat: np.ndarray

    def __post_init__(self):
        if not self.fps > 0:
            raise ValueError("fps must be positive")
        dof = np.ascontiguousarray(self.dof, dtype=np.float64)
        pos = np.ascontiguousarray(self.root_pos, dtype=np.float64)
        quat = np.ascontiguousarray(self.root_quat, dtype=np.float64)
        if dof.ndim != 2 or dof.shape[1] != NUM_DOF:
            raise ValueError(f"dof must be (T, {NUM_DOF}), got {dof.shape}")
        t = dof.shape[0]
        if t < 1:
            raise ValueError("MotionSequence needs at least one frame")
        if pos.shape != (t, 3) or quat.shape != (t, 4):
            raise ValueError("root arrays must be (T, 3) and (T, 4)")
        if not (np.all(np.isfinite(dof)) and np.all(np.isfinite(pos)) and np.all(np.isfinite(quat))):
            raise ValueError("MotionSequence entries must be finite")
        norms = np.linalg.norm(quat, axis=-1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            quat = quat / norms[:, None]
        for a in (dof, pos, quat):
            a.flags.writeable = False
        object.__setattr__(self, "dof", dof)
        object.__setattr__(self, "root_pos", pos)
        object.__setattr__(self, "root_quat", quat)

    def __len__(self) -> int:
        return self.dof.shape[0]

    @property
    def duration(self) -> float:
        return (len(self) - 1) / self.fps

    def root_state(self, i: int) -> RootState:
        return RootState(self.root_pos[i], self.root_quat[i])

    def frame(self, i: int):
        return self.dof[i], self.root_state(i)

    def slice(self, start: int, stop: int) -> "MotionSequence":
        if stop - start < 1:
            raise ValueError("slice must keep at least one frame")
        return MotionSequence(self.fps, self.dof[start:stop], self.root_pos[start:stop], self.root_quat[start:stop])


def concat(seqs) -> MotionSequence:
    seqs = list(seqs)
    if not seqs:
        raise ValueError("cannot concatenate zero sequences")
    fps = seqs[0].fps
    if any(s.fps != fps for s in seqs):
        raise ValueError("fps mismatch in concat")
    return MotionSequence(
        fps,
        np.concatenate([s.dof for s in seqs]),
        np.concatenate([s.root_pos for s in seqs]),
        np.concatenate([s.root_quat for s in seqs]),
    )


def resample(seq: MotionSequence, target_fps: float) -> MotionSequence:
    """Resample to `target_fps`: linear per DOF / position, slerp for orientation.

    Duration is preserved to within one frame period.  A single-frame
    input yields that same frame at the new rate.
    """
    if not target_fps > 0:
        raise ValueError("target_fps must be positive")
    if target_fps == seq.fps:
        return seq
    t_in = len(seq)
    if t_in == 1:
        return MotionSequence(target_fps, seq.dof, seq.root_pos, seq.root_quat)
    duration = seq.duration
    n_out = int(round(duration * target_fps)) + 1
    n_out = max(n_out, 1)
    times = np.arange(n_out) / target_fps
    times = np.clip(times, 0.0, duration)
    src_times = np.arange(t_in) / seq.fps
    # bracketing source indices for every output time
    hi = np.searchsorted(src_times, times, side="left")
    hi = np.clip(hi, 1, t_in - 1)
    lo = hi - 1
    w = (times - src_times[lo]) / (src_times[hi] - src_times[lo])
    w = np.clip(w, 0.0, 1.0)
    # a + w*(b-a) form: constant signals reproduce bit-exactly
    dof = seq.dof[lo] + w[:, None] * (seq.dof[hi] - seq.dof[lo])
    pos = seq.root_pos[lo] + w[:, None] * (seq.root_pos[hi] - seq.root_pos[lo])
    quat = quat_slerp(seq.root_quat[lo], seq.root_quat[hi], w)
    return MotionSequence(target_fps, dof, pos, quat)


def save_motion(seq: MotionSequence, path) -> None:
    """Write the bit-exact motion file format.

    Header `UAMOTION 1 <fps> <num_frames>`, then one line per frame of
    7 root floats (px py pz qw qx qy qz) followed by 29 joint floats,
    space-separated, LF terminated.
    """
    rows = np.concatenate([seq.root_pos, seq.root_quat, seq.dof], axis=1)
    lines = [f"{MOTION_MAGIC} {fmt_float(seq.fps)} {len(seq)}"]
    for row in rows:
        lines.append(" ".join(fmt_float(v) for v in row))
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def load_motion(path, canonical: bool = False) -> MotionSequence:
    """Read a motion file; with canonical=True, resample to 50 Hz on ingest."""
    with open(path) as f:
        header = f.readline().split()
        if len(header) != 4 or " ".join(header[:2]) != MOTION_MAGIC:
            raise ValueError(f"{path}: not a motion file (bad header)")
        fps = float(header[2])
        n = int(header[3])
        data = np.loadtxt(f, dtype=np.float64, ndmin=2)
    if data.shape != (n, FRAME_WIDTH):
        raise ValueError(f"{path}: expected {n}x{FRAME_WIDTH} values, got {data.shape}")
    seq = MotionSequence(fps, data[:, 7:], data[:, 0:3], quat_normalize(data[:, 3:7]))
    if canonical and fps != CANONICAL_FPS:
        seq = resample(seq, CANONICAL_FPS)
    return seq


def fmt_float(v: float) -> str:
    """Decimal text for file formats: full roundtrip precision, no exponent surprises."""
    return repr(float(v))
