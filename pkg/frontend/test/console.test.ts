import { describe, expect, it } from "vitest";
import { ConsoleCore, TIMING_FIELDS } from "../src/console.js";
import { decodeMessage, encodeMessage } from "../src/protocol.js";

class FakeTransport {
  sent: string[] = [];
  send(text: string) {
    this.sent.push(text);
  }
}

function chunkMsg(seq: number, first: number, n: number, timing?: object, ts = 0) {
  return encodeMessage({
    type: "MOTION_CHUNK",
    seq,
    session: "console",
    timestamp_ms: ts,
    payload: {
      fps: 50,
      first_frame_index: first,
      frames: Array.from({ length: n }, (_, i) => Array(36).fill(first + i)),
      ...(timing ? { timing } : {}),
    },
  });
}

describe("console core", () => {
  it("only sends schema message types, with increasing seq", () => {
    const t = new FakeTransport();
    const core = new ConsoleCore(t, () => 0);
    core.handleOpen();
    core.sendInstruction({ text: "wave" });
    core.stop();
    const seqs: number[] = [];
    for (const raw of t.sent) {
      const msg = decodeMessage(raw); // throws on anything outside the schema
      seqs.push(msg.seq);
    }
    expect(seqs).toEqual([...seqs].sort((a, b) => a - b));
    expect(new Set(seqs).size).toBe(seqs.length);
  });

  it("buffers chunks and ticks them out in order", () => {
    const core = new ConsoleCore(new FakeTransport(), () => 0);
    core.handleMessage(chunkMsg(1, 0, 5));
    core.handleMessage(chunkMsg(2, 5, 5));
    expect(core.framesReceived).toBe(10);
    const indices: number[] = [];
    for (let i = 0; i < 12; i++) {
      const r = core.tick();
      if (!r.held && r.frame) indices.push(r.index);
    }
    expect(indices).toEqual([0, 1, 2, 3, 4, 5, 6, 7, 8, 9]);
    expect(core.tick().held).toBe(true);
  });

  it("fills all six timing fields after probe + first chunk", () => {
    let clock = 1000;
    const t = new FakeTransport();
    const core = new ConsoleCore(t, () => clock);
    core.handleOpen(); // sends a probe at t0=1000
    clock = 1010;
    core.handleMessage(
      encodeMessage({
        type: "LATENCY_PROBE",
        seq: 1,
        session: "console",
        timestamp_ms: 0,
        payload: { t0_ms: 1000, t1_ms: 5004, t2_ms: 5005 },
      }),
    ); // offset ~ ((5004-1000)+(5005-1010))/2 = 3999.5
    clock = 1020;
    core.sendInstruction({ text: "walk" });
    clock = 1060;
    core.handleMessage(chunkMsg(2, 0, 5, { motion_generation_ms: 8, token_decode_ms: 1, motion_track_ms: 2, model_latency_ms: 11 }, 5030));
    for (const field of TIMING_FIELDS) {
      expect(core.timing[field]).not.toBeNull();
    }
    expect(core.timing.model_latency_ms).toBe(11);
    expect(core.timing.total_delay_ms).toBeCloseTo(40);
    // transmission = arrived - (sent_server - offset) = 1060 - (5030 - 3999.5)
    expect(core.timing.data_transmission_ms).toBeCloseTo(29.5);
  });

  it("survives malformed server messages with an error banner", () => {
    const core = new ConsoleCore(new FakeTransport(), () => 0);
    core.handleMessage("{broken json");
    core.handleMessage('{"type":"NOPE","seq":1,"session":"s","timestamp_ms":0,"payload":{}}');
    expect(core.errors.length).toBe(2);
    core.handleMessage(chunkMsg(1, 0, 2));
    expect(core.framesReceived).toBe(2); // still functional
  });

  it("tracks generation state from CONTROL stop", () => {
    const core = new ConsoleCore(new FakeTransport(), () => 0);
    core.sendInstruction({ text: "x" });
    expect(core.generating).toBe(true);
    core.handleMessage(
      encodeMessage({ type: "CONTROL", seq: 3, session: "console", timestamp_ms: 0, payload: { action: "stop" } }),
    );
    expect(core.generating).toBe(false);
  });
});
