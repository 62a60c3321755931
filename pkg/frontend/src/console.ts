// Transport-agnostic console core: instruction composing, message dispatch,
// the playback cache, and the latency panel. The browser glue in main.ts
// owns the real WebSocket and canvases; tests drive this class directly.

import { FrameCache, PopResult } from "./cache.js";
import {
  MotionChunkPayload,
  ProtocolError,
  ServerTiming,
  WireMessage,
  decodeMessage,
  encodeMessage,
} from "./protocol.js";

export interface Transport {
  send(text: string): void;
}

export interface TimingPanel {
  motion_generation_ms: number | null;
  token_decode_ms: number | null;
  motion_track_ms: number | null;
  data_transmission_ms: number | null;
  model_latency_ms: number | null;
  total_delay_ms: number | null;
}

export type Connection = "disconnected" | "connecting" | "connected";

export interface InstructionPayload {
  text?: string;
  trajectory?: string;
  music?: string;
}

export class ConsoleCore {
  readonly cache = new FrameCache();
  connection: Connection = "disconnected";
  generating = false;
  framesReceived = 0;
  lastRenderedIndex = -1;
  timing: TimingPanel = emptyTiming();
  log: string[] = [];
  errors: string[] = [];

  private seq = 0;
  private probeT0: number | null = null;
  private clockOffsetMs: number | null = null;
  private instructionSentAt: number | null = null;
  private firstChunkSeen = false;

  constructor(
    private transport: Transport,
    private now: () => number,
    readonly session: string = "console",
  ) {}

  handleOpen(): void {
    this.connection = "connected";
    this.note("connected");
    this.probe();
  }

  handleClose(): void {
    this.connection = "disconnected";
    this.note("connection lost");
  }

  private send(type: WireMessage["type"], payload: Record<string, unknown>): number {
    this.seq += 1;
    this.transport.send(
      encodeMessage({ type, seq: this.seq, session: this.session, timestamp_ms: this.now(), payload }),
    );
    return this.seq;
  }

  probe(): void {
    this.probeT0 = this.now();
    this.send("LATENCY_PROBE", { t0_ms: this.probeT0 });
  }

  sendInstruction(payload: InstructionPayload): void {
    const body: Record<string, unknown> = {};
    if (payload.text !== undefined) body.text = payload.text;
    if (payload.trajectory !== undefined) body.trajectory = payload.trajectory;
    if (payload.music !== undefined) body.music = payload.music;
    this.timing = emptyTiming();
    this.firstChunkSeen = false;
    this.instructionSentAt = this.now();
    this.generating = true;
    this.send("INSTRUCTION", body);
    this.note(`instruction sent (${Object.keys(body).join("+") || "empty"})`);
  }

  stop(): void {
    this.send("CONTROL", { action: "stop" });
  }

  handleMessage(text: string): void {
    const arrived = this.now();
    let msg: WireMessage;
    try {
      msg = decodeMessage(text);
    } catch (e) {
      if (e instanceof ProtocolError) {
        this.errors.push(e.message);
        this.note(`bad message from server: ${e.message}`);
        return; // malformed input never crashes the console
      }
      throw e;
    }
    switch (msg.type) {
      case "MOTION_CHUNK": {
        const p = msg.payload as unknown as MotionChunkPayload;
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

  private applyFirstChunkTiming(msg: WireMessage, timing: ServerTiming | undefined, arrived: number): void {
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
  tick(): PopResult {
    const res = this.cache.pop();
    if (!res.held && res.index >= 0) {
      this.lastRenderedIndex = res.index;
    }
    return res;
  }

  private note(line: string): void {
    this.log.push(line);
    if (this.log.length > 200) this.log.shift();
  }
}

function emptyTiming(): TimingPanel {
  return {
    motion_generation_ms: null,
    token_decode_ms: null,
    motion_track_ms: null,
    data_transmission_ms: null,
    model_latency_ms: null,
    total_delay_ms: null,
  };
}

export const TIMING_FIELDS: Array<keyof TimingPanel> = [
  "motion_generation_ms",
  "token_decode_ms",
  "motion_track_ms",
  "data_transmission_ms",
  "model_latency_ms",
  "total_delay_ms",
];
