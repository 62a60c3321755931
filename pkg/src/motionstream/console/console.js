// Transport-agnostic console core: instruction composing, message dispatch,
// the playback cache, and the latency panel. The browser glue in main.ts
// owns the real WebSocket and canvases; tests drive this class directly.
import { FrameCache } from "./cache.js";
import { ProtocolError, decodeMessage, encodeMessage, } from "./protocol.js";
export class ConsoleCore {
    constructor(transport, now, session = "console") {
        this.transport = transport;
        this.now = now;
        this.session = session;
        this.cache = new FrameCache();
        this.connection = "disconnected";
        this.generating = false;
        this.framesReceived = 0;
        this.lastRenderedIndex = -1;
        this.timing = emptyTiming();
        this.log = [];
        this.errors = [];
        this.seq = 0;
        this.probeT0 = null;
        this.clockOffsetMs = null;
        this.instructionSentAt = null;
        this.firstChunkSeen = false;
    }
    handleOpen() {
        this.connection = "connected";
        this.note("connected");
        this.probe();
    }
    handleClose() {
        this.connection = "disconnected";
        this.note("connection lost");
    }
    send(type, payload) {
        this.seq += 1;
        this.transport.send(encodeMessage({ type, seq: this.seq, session: this.session, timestamp_ms: this.now(), payload }));
        return this.seq;
    }
    probe() {
        this.probeT0 = this.now();
        this.send("LATENCY_PROBE", { t0_ms: this.probeT0 });
    }
    sendInstruction(payload) {
        const body = {};
        if (payload.text !== undefined)
            body.text = payload.text;
        if (payload.trajectory !== undefined)
            body.trajectory = payload.trajectory;
        if (payload.music !== undefined)
            body.music = payload.music;
        this.timing = emptyTiming();
        this.firstChunkSeen = false;
        this.instructionSentAt = this.now();
        this.generating = true;
        this.send("INSTRUCTION", body);
        this.note(`instruction sent (${Object.keys(body).join("+") || "empty"})`);
    }
    stop() {
        this.send("CONTROL", { action: "stop" });
    }
    handleMessage(text) {
        const arrived = this.now();
        let msg;
        try {
            msg = decodeMessage(text);
        }
        catch (e) {
            if (e instanceof ProtocolError) {
                this.errors.push(e.message);
                this.note(`bad message from server: ${e.message}`);
                return; // malformed input never crashes the console
            }
            throw e;
        }
        switch (msg.type) {
            case "MOTION_CHUNK": {
                const p = msg.payload;
                this.cache.push(p.first_frame_index, p.frames);
                this.framesReceived += p.frames.length;
                if (!this.firstChunkSeen) {
                    this.firstChunkSeen = true;
                    this.applyFirstChunkTiming(msg, p.timing, arrived);
                }
                break;
            }
            case "LATENCY_PROBE": {
                const t1 = Number(msg.payload.t1_ms);
                const t2 = Number(msg.payload.t2_ms);
                if (this.probeT0 !== null) {
                    this.clockOffsetMs = (t1 - this.probeT0 + (t2 - arrived)) / 2;
                    this.note(`clock offset ${this.clockOffsetMs.toFixed(1)} ms`);
                }
                break;
            }
            case "CONTROL":
                if (msg.payload.action === "stop") {
                    this.generating = false;
                    this.note("generation finished");
                }
                break;
            case "ACK":
                break;
            case "ERROR":
                this.generating = false;
                this.errors.push(String(msg.payload.reason ?? "unknown"));
                this.note(`server error: ${msg.payload.reason}`);
                break;
            default:
                this.errors.push(`unexpected ${msg.type}`);
        }
    }
    applyFirstChunkTiming(msg, timing, arrived) {
        if (timing) {
            this.timing.motion_generation_ms = timing.motion_generation_ms;
            this.timing.token_decode_ms = timing.token_decode_ms;
            this.timing.motion_track_ms = timing.motion_track_ms;
            this.timing.model_latency_ms = timing.model_latency_ms;
        }
        if (this.clockOffsetMs !== null) {
            this.timing.data_transmission_ms = Math.max(arrived - (msg.timestamp_ms - this.clockOffsetMs), 0);
        }
        if (this.instructionSentAt !== null) {
            this.timing.total_delay_ms = Math.max(arrived - this.instructionSentAt, 0);
        }
    }
    // one 20 ms playback tick: the renderer draws exactly what this returns
    tick() {
        const res = this.cache.pop();
        if (!res.held && res.index >= 0) {
            this.lastRenderedIndex = res.index;
        }
        return res;
    }
    note(line) {
        this.log.push(line);
        if (this.log.length > 200)
            this.log.shift();
    }
}
function emptyTiming() {
    return {
        motion_generation_ms: null,
        token_decode_ms: null,
        motion_track_ms: null,
        data_transmission_ms: null,
        model_latency_ms: null,
        total_delay_ms: null,
    };
}
export const TIMING_FIELDS = [
    "motion_generation_ms",
    "token_decode_ms",
    "motion_track_ms",
    "data_transmission_ms",
    "model_latency_ms",
    "total_delay_ms",
];
