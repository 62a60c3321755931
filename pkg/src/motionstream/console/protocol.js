// Wire protocol mirror of the server: JSON envelopes with payload floats
// rounded to 9 significant digits. The console never sends a message type
// outside this schema.
export const MESSAGE_TYPES = [
    "INSTRUCTION",
    "MOTION_CHUNK",
    "CONTROL",
    "ACK",
    "LATENCY_PROBE",
    "ERROR",
];
export class ProtocolError extends Error {
}
export function round9(x) {
    return Number(x.toPrecision(9));
}
function roundFloats(value) {
    if (typeof value === "number")
        return Number.isInteger(value) ? value : round9(value);
    if (Array.isArray(value))
        return value.map(roundFloats);
    if (value !== null && typeof value === "object") {
        const out = {};
        for (const k of Object.keys(value)) {
            out[k] = roundFloats(value[k]);
        }
        return out;
    }
    return value;
}
export function encodeMessage(msg) {
    if (!MESSAGE_TYPES.includes(msg.type))
        throw new ProtocolError(`unknown message type ${msg.type}`);
    return JSON.stringify({
        type: msg.type,
        seq: msg.seq,
        session: msg.session,
        timestamp_ms: round9(msg.timestamp_ms),
        payload: roundFloats(msg.payload),
    });
}
export function decodeMessage(text) {
    let doc;
    try {
        doc = JSON.parse(text);
    }
    catch (e) {
        throw new ProtocolError(`malformed JSON: ${e}`);
    }
    if (doc === null || typeof doc !== "object")
        throw new ProtocolError("message must be an object");
    const d = doc;
    for (const key of ["type", "seq", "session", "timestamp_ms", "payload"]) {
        if (!(key in d))
            throw new ProtocolError(`missing field ${key}`);
    }
    if (!MESSAGE_TYPES.includes(d.type))
        throw new ProtocolError(`unknown message type ${d.type}`);
    if (d.payload === null || typeof d.payload !== "object")
        throw new ProtocolError("payload must be an object");
    const msg = {
        type: d.type,
        seq: Number(d.seq),
        session: String(d.session),
        timestamp_ms: Number(d.timestamp_ms),
        payload: d.payload,
    };
    if (msg.type === "MOTION_CHUNK") {
        const frames = msg.payload.frames;
        if (!Array.isArray(frames) || frames.length < 1)
            throw new ProtocolError("MOTION_CHUNK needs frames");
        for (const f of frames) {
            if (!Array.isArray(f) || f.length !== 36)
                throw new ProtocolError("frames must have 36 values");
        }
    }
    return msg;
}
