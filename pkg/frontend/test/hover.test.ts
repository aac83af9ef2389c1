import { afterEach, beforeEach, describe, expect, test, vi } from "vitest";

import { HoverController } from "../src/hover";
import type { PickPayload } from "../src/types";

beforeEach(() => {
  vi.useFakeTimers();
});

afterEach(() => {
  vi.useRealTimers();
});

function makeHover(payload: PickPayload | (() => PickPayload)) {
  const calls: Array<{ lat: number; lon: number }> = [];
  const results: Array<PickPayload | null> = [];
  const controller = new HoverController(
    (lat, lon) => {
      calls.push({ lat, lon });
      return Promise.resolve(typeof payload === "function" ? payload() : payload);
    },
    (pick) => results.push(pick),
    150,
  );
  return { controller, calls, results };
}

const israel: PickPayload = {
  region: "israel",
  display_name: "Israel",
  values: { confirmed: 12 },
  rates: {},
};

describe("HoverController", () => {
  test("a burst of pointer moves issues at most one pick request", async () => {
    const { controller, calls } = makeHover(israel);
    for (let i = 0; i < 25; i++) {
      controller.pointerMove(10 + i * 0.1, 20);
      await vi.advanceTimersByTimeAsync(10); // all within the debounce window
    }
    await vi.runAllTimersAsync();
    expect(calls).toHaveLength(1);
    // Trailing edge: the request uses the final pointer position.
    expect(calls[0].lat).toBeCloseTo(12.4);
  });

  test("separated moves issue one request per debounce interval", async () => {
    const { controller, calls } = makeHover(israel);
    controller.pointerMove(1, 1);
    await vi.advanceTimersByTimeAsync(200);
    controller.pointerMove(2, 2);
    await vi.advanceTimersByTimeAsync(200);
    expect(calls).toHaveLength(2);
  });

  test("null pick hides the box", async () => {
    const { controller, results } = makeHover({ region: null });
    controller.pointerMove(0, 0);
    await vi.runAllTimersAsync();
    expect(results).toEqual([null]);
  });

  test("nonzero pick is surfaced with its values", async () => {
    const { controller, results } = makeHover(israel);
    controller.pointerMove(32, 34);
    await vi.runAllTimersAsync();
    expect(results).toHaveLength(1);
    expect(results[0]?.region).toBe("israel");
    expect(results[0]?.values?.confirmed).toBe(12);
  });

  test("pointer leave cancels pending picks and hides the box", async () => {
    const { controller, calls, results } = makeHover(israel);
    controller.pointerMove(5, 5);
    controller.pointerLeave();
    await vi.runAllTimersAsync();
    expect(calls).toHaveLength(0);
    expect(results).toEqual([null]);
  });
});
