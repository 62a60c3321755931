import { describe, expect, it } from "vitest";
import { resampleByArcLength, trajectoryBody } from "../src/trajectory.js";

describe("drawn trajectory", () => {
  it("resamples by arc length at a fixed step", () => {
    const path: Array<[number, number]> = [
      [0, 0],
      [1, 0],
      [2, 0],
    ];
    const out = resampleByArcLength(path, 0.5);
    expect(out.length).toBe(5);
    expect(out[2][0]).toBeCloseTo(1.0);
  });

  it("emits the server trajectory format", () => {
    const points = Array.from({ length: 40 }, (_, i) => ({ x: i * 10, y: 100 }));
    const body = trajectoryBody(points, 50);
    const lines = body.trim().split("\n");
    expect(lines[0]).toMatch(/^UATRAJ 1 5\.0 \d+$/);
    const n = parseInt(lines[0].split(" ")[3], 10);
    expect(lines.length).toBe(n + 1);
    expect(lines[1].split(" ").length).toBe(7);
  });

  it("rejects paths too short to segment", () => {
    expect(() => trajectoryBody([{ x: 0, y: 0 }, { x: 1, y: 0 }], 50)).toThrow();
  });

  it("canvas y axis is flipped into world y", () => {
    const body = trajectoryBody(
      [
        { x: 0, y: 100 },
        { x: 0, y: 40 },  // upward on canvas = +y in world
        { x: 0, y: 0 },
      ],
      50,
    );
    const lastLine = body.trim().split("\n").pop()!;
    const y = parseFloat(lastLine.split(" ")[1]);
    expect(y).toBeGreaterThan(0);
  });
});
