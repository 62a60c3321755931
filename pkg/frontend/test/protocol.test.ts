import { describe, expect, it } from "vitest";
import { ProtocolError, decodeMessage, encodeMessage, round9 } from "../src/protocol.js";

const chunk = {
  type: "MOTION_CHUNK" as const,
  seq: 2,
  session: "s",
  timestamp_ms: 1234.56789012,
  payload: { fps: 50.0, first_frame_index: 0, frames: [Array(36).fill(0.123456789444)] },
};

describe("wire protocol", () => {
  it("roundtrips bit-exact at 9 significant digits", () => {
    const text = encodeMessage(chunk);
    const back = decodeMessage(text);
    expect(encodeMessage(back)).toBe(text);
  });

  it("rounds payload floats to 9 significant digits", () => {
    expect(round9(0.123456789444)).toBe(0.123456789);
    const text = encodeMessage(chunk);
    expect(text).toContain("0.123456789");
    expect(text).not.toContain("0.123456789444");
  });

  it("rejects unknown types", () => {
    expect(() => decodeMessage(JSON.stringify({ type: "NOPE", seq: 0, session: "s", timestamp_ms: 0, payload: {} }))).toThrow(
      ProtocolError,
    );
  });

  it("rejects malformed frames", () => {
    const bad = { ...chunk, payload: { fps: 50, first_frame_index: 0, frames: [[1, 2, 3]] } };
    expect(() => decodeMessage(JSON.stringify(bad))).toThrow(ProtocolError);
  });

  it("rejects missing fields", () => {
    expect(() => decodeMessage('{"type":"ACK","seq":1}')).toThrow(ProtocolError);
  });
});
