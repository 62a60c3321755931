import { describe, expect, it } from "vitest";
import { CacheSequenceError, FrameCache } from "../src/cache.js";

const f = (v: number) => Array(36).fill(v);

describe("frame cache", () => {
  it("holds the last frame on underrun, never extrapolates", () => {
    const c = new FrameCache();
    expect(c.pop().held).toBe(true);
    c.push(0, [f(1), f(2)]);
    expect(c.pop()).toMatchObject({ held: false, index: 0 });
    expect(c.pop()).toMatchObject({ held: false, index: 1 });
    const held = c.pop();
    expect(held.held).toBe(true);
    expect(held.frame![0]).toBe(2);
    expect(held.index).toBe(1);
  });

  it("delivers in order and rejects gaps", () => {
    const c = new FrameCache();
    c.push(0, [f(0)]);
    c.push(1, [f(1)]);
    expect(() => c.push(5, [f(5)])).toThrow(CacheSequenceError);
    expect(c.pop().index).toBe(0);
    expect(c.pop().index).toBe(1);
  });

  it("non-held indices are strictly increasing", () => {
    const c = new FrameCache();
    c.push(0, [f(0), f(1), f(2)]);
    const seen: number[] = [];
    for (let i = 0; i < 6; i++) {
      const r = c.pop();
      if (!r.held) seen.push(r.index);
    }
    expect(seen).toEqual([0, 1, 2]);
  });
});
