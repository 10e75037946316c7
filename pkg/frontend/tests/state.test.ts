import { describe, expect, it } from "vitest";

import { DEFAULT_STATE, decodeState, encodeState, ViewState } from "../src/state";

describe("view state url round-trip", () => {
  it("defaults encode to an empty search string", () => {
    expect(encodeState(DEFAULT_STATE)).toBe("");
    expect(decodeState("")).toEqual(DEFAULT_STATE);
  });

  it("round-trips a fully populated state", () => {
    const state: ViewState = {
      query: "count(level=2, min_mass=0.1) > 3",
      instance: "img-0042",
      fromLevel: 2,
      toLevel: 3,
      groupBy: 2,
      tab: "uncertainty",
      offset: 50,
      collapseThreshold: 0.005,
    };
    expect(decodeState(encodeState(state))).toEqual(state);
  });

  it("round-trips each single deviation from the defaults", () => {
    const variants: Partial<ViewState>[] = [
      { query: "split(A, B, tol=0.05)" },
      { instance: "inst-1" },
      { fromLevel: 3 },
      { toLevel: 5 },
      { groupBy: 4 },
      { tab: "confusion" },
      { offset: 25 },
      { collapseThreshold: 0.1 },
    ];
    for (const patch of variants) {
      const state = { ...DEFAULT_STATE, ...patch };
      expect(decodeState(encodeState(state))).toEqual(state);
    }
  });

  it("ignores unknown parameters", () => {
    expect(decodeState("?q=mass(A)+%3E+0.5&utm_source=share")).toEqual({
      ...DEFAULT_STATE,
      query: "mass(A) > 0.5",
    });
  });

  it("falls back to defaults on malformed numbers", () => {
    const state = decodeState("?from=abc&offset=-9&tab=nonsense");
    expect(state.fromLevel).toBe(DEFAULT_STATE.fromLevel);
    expect(state.offset).toBe(0);
    expect(state.tab).toBe(DEFAULT_STATE.tab);
  });

  it("keeps query text with special characters intact", () => {
    const state = { ...DEFAULT_STATE, query: 'count(level=2, min_mass=0.1) == 1 && top(level=2) == A' };
    expect(decodeState(encodeState(state)).query).toBe(state.query);
  });
});
