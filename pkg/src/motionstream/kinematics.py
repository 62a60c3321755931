"""Simplified 29-DOF kinematic chain: model description, forward kinematics,
position-error metrics, and cross-modal frame composition.

The shipped default is a G1-like humanoid: 12 leg DOFs labeled lower,
3 waist + 14 arm DOFs labeled upper (pelvis/root authority stays with the
lower body so trajectory following keeps the legs).
"""

import importlib.resources
from dataclasses import dataclass

import numpy as np

from .motion import NUM_DOF, MotionSequence, RootState, as_dof_vector
from .rotations import quat_from_axis_angle, quat_mul, quat_rotate

MODEL_MAGIC = "UAMODEL 1"

LOWER = "lower"
UPPER = "upper"


@dataclass(frozen=True)
class Link:
    name: str
    parent: int  # -1 for the root link
    offset: np.ndarray  # fixed translation from parent, meters
    axis: np.ndarray  # unit rotation axis in the link frame
    dof: int | None  # driven DOF index, or None for fixed links


@dataclass(frozen=True)
class KinematicModel:
    """Topologically sorted link chain with a per-DOF upper/lower partition."""

    links: tuple
    partition: tuple  # per-DOF label, LOWER or UPPER

    def __post_init__(self):
        seen_dofs = {}
        for i, link in enumerate(self.links):
            if link.parent >= i:
                raise ValueError(f"link {link.name}: parent index {link.parent} not before link {i} (cycle or unsorted)")
            if i == 0 and link.parent != -1:
                raise ValueError("first link must be the root (parent -1)")
            if i > 0 and link.parent < 0:
                raise ValueError(f"link {link.name}: only the first link may have parent -1")
            if link.dof is not None:
                if link.dof in seen_dofs:
                    raise ValueError(f"DOF {link.dof} driven by both {seen_dofs[link.dof]} and {link.name}")
                seen_dofs[link.dof] = link.name
        if sorted(seen_dofs) != list(range(NUM_DOF)):
            raise ValueError(f"model must drive exactly DOFs 0..{NUM_DOF - 1}, got {sorted(seen_dofs)}")
        if len(self.partition) != NUM_DOF or any(p not in (LOWER, UPPER) for p in self.partition):
            raise ValueError("partition must label all 29 DOFs as upper or lower")

    @property
    def num_links(self) -> int:
        return len(self.links)

    def link_index(self, name: str) -> int:
        for i, link in enumerate(self.links):
            if link.name == name:
                return i
        raise KeyError(name)

    def lower_mask(self) -> np.ndarray:
        return np.array([p == LOWER for p in self.partition])


def forward_kinematics(pose, root: RootState, model: KinematicModel) -> np.ndarray:
    """World positions of every link, shape (num_links, 3)."""
    pose = as_dof_vector(pose)
    return fk_positions_batch(pose[None, :], root.position[None, :], root.orientation[None, :], model)[0]


def fk_positions_batch(dof, root_pos, root_quat, model: KinematicModel) -> np.ndarray:
    """Vectorized FK over T frames: (T, 29), (T, 3), (T, 4) -> (T, L, 3)."""
    return fk_full_batch(dof, root_pos, root_quat, model)[0]


def fk_full_batch(dof, root_pos, root_quat, model: KinematicModel):
    """Vectorized FK returning world positions (T, L, 3) and orientations (T, L, 4)."""
    t = dof.shape[0]
    n = model.num_links
    pos = np.empty((t, n, 3), dtype=np.float64)
    quat = np.empty((t, n, 4), dtype=np.float64)
    pos[:, 0] = root_pos
    quat[:, 0] = root_quat
    for i, link in enumerate(model.links):
        if i == 0:
            continue
        pq = quat[:, link.parent]
        pos[:, i] = pos[:, link.parent] + quat_rotate(pq, link.offset)
        if link.dof is None:
            quat[:, i] = pq
        else:
            quat[:, i] = quat_mul(pq, quat_from_axis_angle(link.axis, dof[:, link.dof]))
    return pos, quat


def fk_sequence(seq: MotionSequence, model: KinematicModel) -> np.ndarray:
    """Per-frame link positions for a whole sequence, (T, L, 3)."""
    return fk_positions_batch(seq.dof, seq.root_pos, seq.root_quat, model)


def mpjpe(a: MotionSequence, b: MotionSequence, model: KinematicModel) -> float:
    """Mean per-joint position error between two sequences, in centimeters."""
    if len(a) != len(b) or a.fps != b.fps:
        raise ValueError(f"mpjpe needs equal frame counts and fps, got {len(a)}@{a.fps} vs {len(b)}@{b.fps}")
    pa = fk_sequence(a, model)
    pb = fk_sequence(b, model)
    return float(np.mean(np.linalg.norm(pa - pb, axis=-1))) * 100.0


def compose_cross_modal(upper_source: MotionSequence, lower_source: MotionSequence, model: KinematicModel) -> MotionSequence:
    """Fuse upper-body DOFs from one sequence with lower-body DOFs + root from another.

    Output is truncated to the shorter input.  The root state travels with
    the lower body.
    """
    if upper_source.fps != lower_source.fps:
        raise ValueError("compose_cross_modal needs equal fps")
    n = min(len(upper_source), len(lower_source))
    lower = model.lower_mask()
    dof = np.where(lower[None, :], lower_source.dof[:n], upper_source.dof[:n])
    return MotionSequence(lower_source.fps, dof, lower_source.root_pos[:n], lower_source.root_quat[:n])


def save_model(model: KinematicModel, path) -> None:
    """Structured text: one `name parent ox oy oz ax ay az dof partition` line per link."""
    lines = [f"{MODEL_MAGIC} {model.num_links}"]
    for link in model.links:
        dof = "-" if link.dof is None else str(link.dof)
        part = "-" if link.dof is None else model.partition[link.dof]
        nums = " ".join(repr(float(v)) for v in (*link.offset, *link.axis))
        lines.append(f"{link.name} {link.parent} {nums} {dof} {part}")
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def load_model(path) -> KinematicModel:
    with open(path) as f:
        text = f.read()
    return parse_model(text, source=str(path))


def parse_model(text: str, source: str = "<model>") -> KinematicModel:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    header = lines[0].split()
    if len(header) != 3 or " ".join(header[:2]) != MODEL_MAGIC:
        raise ValueError(f"{source}: bad model header")
    n = int(header[2])
    body = lines[1:]
    if len(body) != n:
        raise ValueError(f"{source}: expected {n} link lines, got {len(body)}")
    links = []
    partition = [None] * NUM_DOF
    for ln in body:
        parts = ln.split()
        if len(parts) != 10:
            raise ValueError(f"{source}: bad link line: {ln!r}")
        name, parent = parts[0], int(parts[1])
        offset = np.array([float(v) for v in parts[2:5]])
        axis = np.array([float(v) for v in parts[5:8]])
        dof = None if parts[8] == "-" else int(parts[8])
        if dof is not None:
            norm = np.linalg.norm(axis)
            if abs(norm - 1.0) > 1e-6:
                raise ValueError(f"{source}: {name}: rotation axis must be unit length")
            if parts[9] not in (LOWER, UPPER):
                raise ValueError(f"{source}: {name}: partition must be upper or lower")
            partition[dof] = parts[9]
        offset.flags.writeable = False
        axis.flags.writeable = False
        links.append(Link(name, parent, offset, axis, dof))
    return KinematicModel(tuple(links), tuple(partition))


def default_model() -> KinematicModel:
    """The shipped G1-like 29-DOF model."""
    text = importlib.resources.files("motionstream.data").joinpath("g1_29dof.model").read_text()
    return parse_model(text, source="g1_29dof.model")
