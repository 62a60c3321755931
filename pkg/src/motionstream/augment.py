"""Motion-matching expansion: per-frame matching features, heel-strike
segmentation into overlapping clips, cost-ranked probabilistic clip
selection with a recency-penalty history, blended transitions, and the
long-horizon synthesis loop with quality-control filtering.

No inverse kinematics: foot-contact quality is monitored by a foot-slide
metric and bad transitions are rejected instead of repaired.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .kinematics import KinematicModel, default_model, fk_sequence
from .motion import MotionSequence
from .rotations import quat_from_yaw, quat_mul, quat_rotate, quat_slerp, yaw_of

CONTACT_HEIGHT = 0.02  # m
CONTACT_SPEED = 0.1  # m/s
FUTURE_OFFSETS = (20, 40, 60)  # frames ahead
TRANSITION_WINDOW = 10  # search starts inside the clip's last 10 frames
BLEND_FRAMES = 10


class SynthesisError(RuntimeError):
    def __init__(self, message, partial=None, report=None):
        super().__init__(message)
        self.partial = partial
        self.report = report


@dataclass(frozen=True)
class MatchWeights:
    pose: float = 1.0
    velocity: float = 1.0
    trajectory: float = 2.0
    contacts: float = 0.5

    def __post_init__(self):
        if min(self.pose, self.velocity, self.trajectory, self.contacts) < 0:
            raise ValueError("match weights must be nonnegative")


@dataclass(frozen=True)
class MatchFeature:
    """Per-frame matching descriptor.

    root_pos/root_quat are world-frame and used only for re-anchoring;
    the compared fields (pose, velocity, future, contacts, phase) are all
    expressed in the frame's own root frame.
    """

    root_pos: np.ndarray
    root_quat: np.ndarray
    pose: np.ndarray  # ankle + foot positions in root frame plus phase encoding (14,)
    velocity: np.ndarray  # root + foot velocities in root frame (9,)
    future: np.ndarray  # trajectory points +20/+40/+60 frames, root frame (9,)
    contacts: np.ndarray  # (left, right) in {0, 1}
    phase: float


def _tracked_links(model: KinematicModel):
    return [model.link_index(n) for n in ("left_ankle_roll", "right_ankle_roll", "left_foot", "right_foot")]


def _foot_links(model: KinematicModel):
    return [model.link_index(n) for n in ("left_foot", "right_foot")]


def contact_track(seq: MotionSequence, model: KinematicModel, height_thr: float = CONTACT_HEIGHT, speed_thr: float = CONTACT_SPEED):
    """(T, 2) boolean foot contacts plus foot/link world kinematics."""
    fk = fk_sequence(seq, model)
    feet = fk[:, _foot_links(model)]
    vel = np.zeros_like(feet)
    if len(seq) > 1:
        vel[1:] = (feet[1:] - feet[:-1]) * seq.fps
        vel[0] = vel[1]
    speed = np.linalg.norm(vel, axis=-1)
    contacts = (feet[..., 2] < height_thr) & (speed < speed_thr)
    return contacts, feet, vel, fk


def heel_strikes(contacts_one_foot) -> np.ndarray:
    """Rising edges of a single foot's contact track."""
    c = np.asarray(contacts_one_foot, dtype=bool)
    return np.where(c[1:] & ~c[:-1])[0] + 1


def _phase_track(left_contacts) -> np.ndarray:
    """Gait phase in [0, 1): linear between successive left heel strikes."""
    t = len(left_contacts)
    strikes = heel_strikes(left_contacts)
    phase = np.zeros(t)
    if len(strikes) < 2:
        return phase
    period = float(np.mean(np.diff(strikes)))
    for i in range(t):
        k = int(np.searchsorted(strikes, i, side="right")) - 1
        if k < 0:
            phase[i] = ((i - strikes[0]) / period) % 1.0
        elif k + 1 < len(strikes):
            phase[i] = (i - strikes[k]) / (strikes[k + 1] - strikes[k])
        else:
            phase[i] = ((i - strikes[k]) / period) % 1.0
    return np.mod(phase, 1.0)


def feature_track(
    seq: MotionSequence,
    model: KinematicModel | None = None,
    height_thr: float = CONTACT_HEIGHT,
    speed_thr: float = CONTACT_SPEED,
) -> list:
    """MatchFeature per frame; None where fewer than 60 future frames exist."""
    model = model or default_model()
    t = len(seq)
    contacts, _, _, fk = contact_track(seq, model, height_thr, speed_thr)
    tracked = fk[:, _tracked_links(model)]
    phase = _phase_track(contacts[:, 0])

    inv_quat = seq.root_quat * np.array([1.0, -1.0, -1.0, -1.0])
    root_vel = np.zeros((t, 3))
    if t > 1:
        root_vel[1:] = (seq.root_pos[1:] - seq.root_pos[:-1]) * seq.fps
        root_vel[0] = root_vel[1]
    tracked_vel = np.zeros_like(tracked)
    if t > 1:
        tracked_vel[1:] = (tracked[1:] - tracked[:-1]) * seq.fps
        tracked_vel[0] = tracked_vel[1]

    out = []
    horizon = FUTURE_OFFSETS[-1]
    for i in range(t):
        if i + horizon >= t:
            out.append(None)
            continue
        iq = inv_quat[i]
        rel_pose = quat_rotate(iq[None, :], tracked[i] - seq.root_pos[i]).reshape(-1)
        pose = np.concatenate([rel_pose, [np.cos(2 * np.pi * phase[i]), np.sin(2 * np.pi * phase[i])]])
        rv = quat_rotate(iq, root_vel[i])
        fv = quat_rotate(iq[None, :], tracked_vel[i, 2:])  # foot links only
        velocity = np.concatenate([rv, fv.reshape(-1)])
        fut = np.stack([seq.root_pos[i + o] for o in FUTURE_OFFSETS]) - seq.root_pos[i]
        future = quat_rotate(iq[None, :], fut).reshape(-1)
        out.append(
            MatchFeature(
                root_pos=seq.root_pos[i].copy(),
                root_quat=seq.root_quat[i].copy(),
                pose=pose,
                velocity=velocity,
                future=future,
                contacts=contacts[i].astype(np.float64),
                phase=float(phase[i]),
            )
        )
    return out


def extract_features(
    seq: MotionSequence,
    index: int,
    model: KinematicModel | None = None,
    height_thr: float = CONTACT_HEIGHT,
    speed_thr: float = CONTACT_SPEED,
) -> MatchFeature:
    if index + FUTURE_OFFSETS[-1] >= len(seq):
        raise ValueError(f"frame {index} lacks the {FUTURE_OFFSETS[-1]} future frames features need")
    return feature_track(seq, model, height_thr, speed_thr)[index]


def match_cost(current: MatchFeature, candidate: MatchFeature, weights: MatchWeights = MatchWeights()) -> float:
    """Four weighted terms: pose distance, velocity consistency, future
    trajectory alignment, and foot contact mismatch count."""
    pose = float(np.linalg.norm(current.pose - candidate.pose))
    vel = float(np.linalg.norm(current.velocity - candidate.velocity))
    traj = float(np.linalg.norm(current.future - candidate.future))
    mismatch = float(np.sum(current.contacts != candidate.contacts))
    return weights.pose * pose + weights.velocity * vel + weights.trajectory * traj + weights.contacts * mismatch


@dataclass
class MotionClip:
    clip_id: int
    seq: MotionSequence
    features: list  # per-frame MatchFeature (always populated for stored frames)
    mean_speed: float
    turn_deg: float

    def __len__(self):
        return len(self.seq)


def segment(
    seq: MotionSequence,
    model: KinematicModel | None = None,
    clip_min: float = 2.0,
    clip_max: float = 4.0,
    accel_threshold: float = 3.0,
    height_thr: float = CONTACT_HEIGHT,
    speed_thr: float = CONTACT_SPEED,
    id_base: int = 0,
) -> list:
    """Cut overlapping clips at steady-state left heel strikes.

    Every clip spans at least two gait cycles and 2-4 seconds; frames near
    the sequence end stay unused because their matching features need 60
    frames of future context.
    """
    model = model or default_model()
    if seq.duration < clip_max:
        raise ValueError("segment needs at least 4 s of motion")
    fps = seq.fps
    contacts, _, _, _ = contact_track(seq, model, height_thr, speed_thr)
    strikes = heel_strikes(contacts[:, 0])
    if len(strikes) < 3:
        warnings.warn("no usable heel strikes found; returning an empty clip list")
        return []
    feats = feature_track(seq, model, height_thr, speed_thr)

    vel = np.zeros((len(seq), 2))
    vel[1:] = (seq.root_pos[1:, :2] - seq.root_pos[:-1, :2]) * fps
    vel[0] = vel[1]
    acc = np.zeros(len(seq))
    acc[1:] = np.linalg.norm(np.diff(vel, axis=0), axis=1) * fps

    clips = []
    min_frames = int(round(clip_min * fps))
    max_frames = int(round(clip_max * fps))
    for si, s in enumerate(strikes):
        if acc[s] > accel_threshold:
            continue
        # end at the first later strike giving >= 2 cycles and >= clip_min
        end = None
        for e in strikes[si + 1 :]:
            if e - s >= min_frames and si + 2 <= len(strikes):
                cycles = np.searchsorted(strikes, e, side="right") - si - 1
                if cycles >= 2:
                    end = int(e)
                    break
        if end is None or end - s > max_frames:
            continue
        if end + FUTURE_OFFSETS[-1] >= len(seq):
            continue
        # include the closing strike frame so a 2-cycle clip spans the full 2 s
        clip_feats = feats[s : end + 1]
        if any(f is None for f in clip_feats):
            continue
        sub = seq.slice(s, end + 1)
        speed = float(np.mean(np.linalg.norm(vel[s : end + 1], axis=1)))
        turn = float(np.degrees(yaw_of(seq.root_quat[end]) - yaw_of(seq.root_quat[s])))
        clips.append(MotionClip(id_base + len(clips), sub, clip_feats, speed, turn))
    return clips


def build_library(seqs, model: KinematicModel | None = None, **segment_kw) -> list:
    """Segment many sequences into one library with globally unique clip ids."""
    model = model or default_model()
    clips = []
    for seq in seqs:
        clips.extend(segment(seq, model, id_base=len(clips), **segment_kw))
    return clips


@dataclass
class HistoryBuffer:
    """Recently used clip ids with ages; penalizes (and in the synthesis
    loop excludes) immediate reuse."""

    capacity: int = 8
    penalty_weight: float = 1.0
    ages: dict = field(default_factory=dict)  # clip id -> age (0 = just used)

    def push(self, clip_id: int) -> None:
        for k in list(self.ages):
            self.ages[k] += 1
            if self.ages[k] >= self.capacity:
                del self.ages[k]
        self.ages[int(clip_id)] = 0

    def penalty(self, clip_id: int) -> float:
        age = self.ages.get(int(clip_id))
        if age is None:
            return 0.0
        return self.penalty_weight * (self.capacity - age) / self.capacity

    def __contains__(self, clip_id: int) -> bool:
        return int(clip_id) in self.ages


def select_next(costed, history: HistoryBuffer, rng, temperature: float = 1.0) -> int:
    """Sample among the 5 lowest effective costs (cost + recency penalty)
    with probability proportional to softmin; pushes the winner to history."""
    if not costed:
        raise ValueError("select_next needs at least one candidate")
    effective = sorted(((cost + history.penalty(cid), cid) for cid, cost in costed), key=lambda t: (t[0], t[1]))
    top = effective[:5]
    costs = np.array([c for c, _ in top])
    logits = -(costs - costs.min()) / temperature
    p = np.exp(logits)
    p /= p.sum()
    choice = int(rng.choice(len(top), p=p))
    winner = top[choice][1]
    history.push(winner)
    return winner


def _anchor_clip(clip: MotionClip, root_pos, root_quat) -> MotionSequence:
    """Rigidly re-anchor a clip so its first root pose lands on the given
    pose (position and yaw); DOF values are untouched."""
    dyaw = float(yaw_of(root_quat) - yaw_of(clip.seq.root_quat[0]))
    rot = quat_from_yaw(dyaw)
    rel = clip.seq.root_pos - clip.seq.root_pos[0]
    pos = quat_rotate(rot[None, :], rel) + np.asarray(root_pos)
    quat = quat_mul(rot[None, :], clip.seq.root_quat)
    return MotionSequence(clip.seq.fps, clip.seq.dof, pos, quat)


def blend(tail: MotionSequence, head: MotionSequence, blend_frames: int = BLEND_FRAMES) -> MotionSequence:
    """Crossfade with a cubic ease (zero end-slope, so endpoint velocities
    match the sources): positions/DOF interpolate linearly under the cubic
    weight, orientations use spherical interpolation.  Frame 0 equals the
    tail frame exactly; the last frame equals the head frame exactly."""
    if len(tail) < blend_frames or len(head) < blend_frames:
        raise ValueError(f"both sides must have at least {blend_frames} frames")
    u = np.arange(blend_frames) / (blend_frames - 1)
    w = 3 * u**2 - 2 * u**3
    w[0] = 0.0
    w[-1] = 1.0
    dof = tail.dof[:blend_frames] * (1 - w)[:, None] + head.dof[:blend_frames] * w[:, None]
    pos = tail.root_pos[:blend_frames] * (1 - w)[:, None] + head.root_pos[:blend_frames] * w[:, None]
    quat = quat_slerp(tail.root_quat[:blend_frames], head.root_quat[:blend_frames], w)
    dof[0], pos[0], quat[0] = tail.dof[0], tail.root_pos[0], tail.root_quat[0]
    dof[-1], pos[-1], quat[-1] = head.dof[blend_frames - 1], head.root_pos[blend_frames - 1], head.root_quat[blend_frames - 1]
    return MotionSequence(tail.fps, dof, pos, quat)


@dataclass
class QcLimits:
    max_dof_delta: float = 0.35  # rad per frame
    max_root_jump: float = 0.05  # m per frame (1.5 m/s top speed / 50 Hz * 1.67 margin)


@dataclass
class TransitionRecord:
    frame: int
    from_clip: int
    to_clip: int
    foot_slide: float
    max_dof_delta: float
    max_root_jump: float
    rejected: int  # candidates rejected by QC before this one passed


@dataclass
class QcReport:
    transitions: list = field(default_factory=list)
    filtered: int = 0

    def worst_dof_delta(self) -> float:
        return max((t.max_dof_delta for t in self.transitions), default=0.0)

    def worst_root_jump(self) -> float:
        return max((t.max_root_jump for t in self.transitions), default=0.0)


def _foot_slide(seq: MotionSequence, model: KinematicModel) -> float:
    """Mean horizontal foot travel (m) accumulated while in contact."""
    contacts, feet, _, _ = contact_track(seq, model)
    if len(seq) < 2:
        return 0.0
    step = np.linalg.norm(np.diff(feet[..., :2], axis=0), axis=-1)
    both = contacts[1:] & contacts[:-1]
    return float(np.sum(step[both])) if both.any() else 0.0


def _qc_junction(prev_tail: MotionSequence, blended: MotionSequence, nxt: MotionSequence, limits: QcLimits):
    """Max per-frame deltas across tail -> blend -> next-clip continuation."""
    dof = np.concatenate([prev_tail.dof[-1:], blended.dof, nxt.dof[:1]])
    pos = np.concatenate([prev_tail.root_pos[-1:], blended.root_pos, nxt.root_pos[:1]])
    dmax = float(np.abs(np.diff(dof, axis=0)).max())
    rmax = float(np.linalg.norm(np.diff(pos, axis=0), axis=1).max())
    return dmax, rmax


def _resample_target(target_pos, target_fps, fps):
    target_pos = np.asarray(target_pos, dtype=np.float64)
    if target_fps == fps or target_pos.shape[0] < 2:
        return target_pos
    duration = (target_pos.shape[0] - 1) / target_fps
    m = int(round(duration * fps)) + 1
    times = np.clip(np.arange(m) / fps, 0, duration)
    src = np.arange(target_pos.shape[0]) / target_fps
    out = np.empty((m, target_pos.shape[1]))
    for c in range(target_pos.shape[1]):
        out[:, c] = np.interp(times, src, target_pos[:, c])
    return out


def synthesize(
    library: list,
    duration: float | None = None,
    target_path: np.ndarray | None = None,
    target_fps: float = 50.0,
    weights: MatchWeights = MatchWeights(),
    rng=None,
    history: HistoryBuffer | None = None,
    limits: QcLimits = QcLimits(),
    model: KinematicModel | None = None,
    temperature: float = 1.0,
):
    """Chain library clips into one long sequence; returns (MotionSequence, QcReport).

    Near each clip's last 10 frames the matcher queries with the playhead
    feature (future points come from the target path when given), hard-
    excludes clips still in the history window, samples among the top-5
    effective costs, re-anchors the winner at the current root pose, and
    blends over 10 frames.  Transitions violating the QC limits are
    rejected and the next candidate is tried; running out of candidates
    raises SynthesisError carrying the partial output.
    """
    if not library:
        raise ValueError("library is empty")
    min_len = TRANSITION_WINDOW + 2 * BLEND_FRAMES + 1
    library = [c for c in library if len(c) >= min_len]
    if not library:
        raise ValueError(f"no clip is long enough to transition from (need >= {min_len} frames)")
    model = model or default_model()
    rng = rng or np.random.Generator(np.random.PCG64(0))
    history = history or HistoryBuffer()
    fps = library[0].seq.fps
    if duration is None and target_path is None:
        raise ValueError("give a duration or a target path")
    path = _resample_target(target_path, target_fps, fps) if target_path is not None else None
    n_target = int(round((duration if duration is not None else (path.shape[0] - 1) / fps) * fps))

    report = QcReport()
    by_id = {c.clip_id: c for c in library}
    start = library[int(rng.integers(len(library)))]
    history.push(start.clip_id)
    if path is not None and path.shape[0] > 1:
        # start on the path, facing along it
        heading = float(np.arctan2(path[1, 1] - path[0, 1], path[1, 0] - path[0, 0]))
        origin = np.array([path[0, 0], path[0, 1], start.seq.root_pos[0, 2]])
        current = _anchor_clip(start, origin, quat_from_yaw(heading))
    else:
        current = _anchor_clip(start, start.seq.root_pos[0], start.seq.root_quat[0])
    current_feats = start.features
    current_id = start.clip_id
    pieces = []
    emitted = 0
    path_ptr = 0  # monotone index of the closest path sample to the playhead

    def partial():
        return _concat_pieces(pieces, fps) if pieces else None

    while emitted < n_target:
        cut = len(current) - TRANSITION_WINDOW
        query = current_feats[cut]
        if path is not None:
            # steer with the target: advance the path pointer to the sample
            # nearest the playhead (monotone projection, so lag never lets
            # the target run away), then aim at samples ahead of it
            window = path[path_ptr : min(path_ptr + 200, path.shape[0])]
            near = int(np.argmin(np.linalg.norm(window[:, :2] - current.root_pos[cut][:2], axis=1)))
            path_ptr += near
            pts = np.stack([path[min(path_ptr + o, path.shape[0] - 1), :2] for o in FUTURE_OFFSETS])
            rel = np.concatenate([pts - current.root_pos[cut][:2], np.zeros((3, 1))], axis=1)
            iq = current.root_quat[cut] * np.array([1.0, -1.0, -1.0, -1.0])
            query = MatchFeature(
                query.root_pos, query.root_quat, query.pose, query.velocity,
                quat_rotate(iq[None, :], rel).reshape(-1), query.contacts, query.phase,
            )
        candidates = [(c.clip_id, match_cost(query, c.features[0], weights)) for c in library if c.clip_id not in history]
        if not candidates:
            raise SynthesisError("history window excludes every candidate", partial(), report)

        pieces.append(current.slice(0, cut))
        emitted += cut
        anchor_pos = current.root_pos[cut]
        anchor_quat = current.root_quat[cut]
        tail = current.slice(cut, len(current))

        rejected = 0
        chosen = None
        pool = dict(candidates)
        while pool:
            # trial buffers keep QC rejections out of the real history
            trial = HistoryBuffer(history.capacity, history.penalty_weight, dict(history.ages))
            cid = select_next(list(pool.items()), trial, rng, temperature)
            nxt_clip = by_id[cid]
            anchored = _anchor_clip(nxt_clip, anchor_pos, anchor_quat)
            blended = blend(tail, anchored.slice(0, BLEND_FRAMES))
            dmax, rmax = _qc_junction(pieces[-1], blended, anchored.slice(BLEND_FRAMES, len(anchored)), limits)
            if dmax <= limits.max_dof_delta and rmax <= limits.max_root_jump:
                history.push(cid)
                chosen = (cid, anchored, blended, dmax, rmax, rejected)
                break
            rejected += 1
            report.filtered += 1
            del pool[cid]
        if chosen is None:
            raise SynthesisError("every candidate fails the transition QC limits", partial(), report)

        cid, anchored, blended, dmax, rmax, rejected = chosen
        slide = _foot_slide(blended, model)
        report.transitions.append(TransitionRecord(emitted, current_id, cid, slide, dmax, rmax, rejected))
        pieces.append(blended)
        emitted += len(blended)
        current = MotionSequence(fps, anchored.dof[BLEND_FRAMES:], anchored.root_pos[BLEND_FRAMES:], anchored.root_quat[BLEND_FRAMES:])
        current_feats = by_id[cid].features[BLEND_FRAMES:]
        current_id = cid

    out = _concat_pieces(pieces, fps)
    out = out.slice(0, n_target) if len(out) > n_target else out
    return out, report


def _concat_pieces(pieces, fps) -> MotionSequence:
    return MotionSequence(
        fps,
        np.concatenate([p.dof for p in pieces]),
        np.concatenate([p.root_pos for p in pieces]),
        np.concatenate([p.root_quat for p in pieces]),
    )


def save_qc_report(report: QcReport, path) -> None:
    """Structured text: one metric name/value pair per line, per transition."""
    lines = [f"transitions {len(report.transitions)}", f"filtered {report.filtered}"]
    for t in report.transitions:
        lines.append(
            f"transition frame={t.frame} from={t.from_clip} to={t.to_clip} "
            f"foot_slide={t.foot_slide:.6f} max_dof_delta={t.max_dof_delta:.6f} "
            f"max_root_jump={t.max_root_jump:.6f} rejected={t.rejected}"
        )
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
