// Client-side validation rules: the budget boundary, the adjustment cap,
// and the strict decoders. These run before anything is signed; the
// contract re-checks all of them.

import { describe, expect, it } from "vitest";

import { checkDelta, checkPlan, deltaBound } from "../src/client.js";
import { EncodingError, fromHex, Reader } from "../src/codec.js";
import { parseFp, formatFp, fpPercent, SCALE } from "../src/fixedpoint.js";
import { decodeEventDraw } from "../src/game.js";

describe("plan budget boundary", () => {
  const budget = 10_000;

  it("accepts a plan of exactly the weekly budget", () => {
    const check = checkPlan([[9_000, 500], [400, 100]], budget);
    expect(check.ok).toBe(true);
    expect(check.total).toBe(budget);
  });

  it("blocks one token over budget", () => {
    const check = checkPlan([[9_000, 500], [400, 101]], budget);
    expect(check.ok).toBe(false);
    expect(check.total).toBe(budget + 1);
    expect(check.reason).toContain("exceeds budget");
  });

  it("blocks an all-zero plan and negative cells", () => {
    expect(checkPlan([[0, 0]], budget).ok).toBe(false);
    expect(checkPlan([[-1, 2]], budget).ok).toBe(false);
    expect(checkPlan([[1.5, 2]], budget).ok).toBe(false);
  });
});

describe("adjustment cap", () => {
  const cap = parseFp("0.200000");
  const planned = [[100, 50], [0, 10]];

  it("allows a delta exactly at the cap", () => {
    expect(checkDelta(planned, [[20, -10], [0, 2]], cap).ok).toBe(true);
  });

  it("blocks one token past the cap", () => {
    const check = checkDelta(planned, [[21, 0], [0, 0]], cap);
    expect(check.ok).toBe(false);
    expect(check.reason).toContain("cap");
  });

  it("blocks any delta on an unfunded cell", () => {
    expect(checkDelta(planned, [[0, 0], [1, 0]], cap).ok).toBe(false);
  });

  it("blocks shape mismatches", () => {
    expect(checkDelta(planned, [[1, 2, 3]], cap).ok).toBe(false);
  });

  it("exposes the slider bound used by the editor", () => {
    expect(deltaBound(100, cap)).toBe(20);
    expect(deltaBound(99, cap)).toBe(19);
    expect(deltaBound(0, cap)).toBe(0);
  });
});

describe("fixed-point strings", () => {
  it("parses and formats with six places", () => {
    expect(parseFp("0.25")).toBe(SCALE / 4);
    expect(parseFp("1")).toBe(SCALE);
    expect(parseFp("-0.5")).toBe(-SCALE / 2);
    expect(formatFp(parseFp("0.123456"))).toBe("0.123456");
    expect(fpPercent("0.333300")).toBe("33.33%");
  });

  it("rejects more than six fractional digits", () => {
    expect(() => parseFp("0.1234567")).toThrow();
    expect(() => parseFp("')--")).toThrow();
  });
});

describe("strict decoding", () => {
  it("decodes an event draw and rejects slack", () => {
    expect(decodeEventDraw(fromHex("0x010200"))).toEqual({
      occurred: true,
      kind: 2,
      product: 0,
    });
    expect(() => decodeEventDraw(fromHex("0x01020000"))).toThrow(EncodingError);
    expect(() => decodeEventDraw(fromHex("0x0102"))).toThrow(EncodingError);
  });

  it("readers refuse truncated fields", () => {
    const r = new Reader(fromHex("0x0000"));
    expect(() => r.u32()).toThrow(EncodingError);
  });
});
