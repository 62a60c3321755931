"""Wire protocol: the server<->client message envelope and its JSON text
encoding.  Payload decimals are rounded to 9 significant digits before
encoding, so encode(decode(encode(m))) == encode(m) byte for byte."""

import json
from dataclasses import dataclass, field

MESSAGE_TYPES = ("INSTRUCTION", "MOTION_CHUNK", "CONTROL", "ACK", "LATENCY_PROBE", "ERROR")


class ProtocolError(ValueError):
    pass


@dataclass
class WireMessage:
    type: str
    seq: int
    session: str
    timestamp_ms: float
    payload: dict = field(default_factory=dict)


@dataclass
class TimingBreakdown:
    """Latency instrumentation: model_latency is the sum of generation,
    decode, and track; total_delay additionally includes transmission and
    client-side buffering."""

    motion_generation_ms: float = 0.0
    token_decode_ms: float = 0.0
    motion_track_ms: float = 0.0
    data_transmission_ms: float = 0.0
    model_latency_ms: float = 0.0
    total_delay_ms: float = 0.0

    def __post_init__(self):
        parts = self.motion_generation_ms + self.token_decode_ms + self.motion_track_ms
        if self.model_latency_ms == 0.0:
            self.model_latency_ms = parts
        elif abs(self.model_latency_ms - parts) > 0.1:
            raise ValueError("model_latency_ms must equal generation + decode + track (±0.1 ms)")
        for name in ("motion_generation_ms", "token_decode_ms", "motion_track_ms", "data_transmission_ms", "model_latency_ms", "total_delay_ms"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    def as_dict(self) -> dict:
        return {
            "motion_generation_ms": self.motion_generation_ms,
            "token_decode_ms": self.token_decode_ms,
            "motion_track_ms": self.motion_track_ms,
            "data_transmission_ms": self.data_transmission_ms,
            "model_latency_ms": self.model_latency_ms,
            "total_delay_ms": self.total_delay_ms,
        }


def round9(x: float) -> float:
    return float(f"{float(x):.9g}")


def _round_floats(obj):
    if isinstance(obj, float):
        return round9(obj)
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def encode_message(msg: WireMessage) -> str:
    if msg.type not in MESSAGE_TYPES:
        raise ProtocolError(f"unknown message type {msg.type!r}")
    doc = {
        "type": msg.type,
        "seq": int(msg.seq),
        "session": str(msg.session),
        "timestamp_ms": round9(msg.timestamp_ms),
        "payload": _round_floats(msg.payload),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def decode_message(text: str) -> WireMessage:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProtocolError(f"malformed JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ProtocolError("message must be a JSON object")
    for key in ("type", "seq", "session", "timestamp_ms", "payload"):
        if key not in doc:
            raise ProtocolError(f"missing field {key!r}")
    if doc["type"] not in MESSAGE_TYPES:
        raise ProtocolError(f"unknown message type {doc['type']!r}")
    if not isinstance(doc["payload"], dict):
        raise ProtocolError("payload must be an object")
    msg = WireMessage(doc["type"], int(doc["seq"]), str(doc["session"]), float(doc["timestamp_ms"]), doc["payload"])
    if msg.type == "MOTION_CHUNK":
        frames = msg.payload.get("frames")
        if not isinstance(frames, list) or len(frames) < 1:
            raise ProtocolError("MOTION_CHUNK needs at least one frame")
        if any(len(f) != 36 for f in frames):
            raise ProtocolError("MOTION_CHUNK frames must have 36 values (7 root + 29 DOF)")
    return msg


def motion_chunk_payload(fps: float, first_frame_index: int, root_pos, root_quat, dof) -> dict:
    """Frames are 36 decimals: px py pz qw qx qy qz + 29 joint angles."""
    frames = []
    for p, q, d in zip(root_pos, root_quat, dof):
        frames.append([float(v) for v in (*p, *q, *d)])
    return {"fps": float(fps), "first_frame_index": int(first_frame_index), "frames": frames}
