import { afterEach, beforeEach, describe, expect, test, vi } from "vitest";

import { AnimationController } from "../src/animation";
import { reportDates, type ReportDate } from "../src/timeline";
import type { FramePayload } from "../src/types";
import { entry, frame } from "./helpers";

function tenDates(): ReportDate[] {
  return reportDates("2020-01-22", {
    mode: "window", startDay: 0, endDay: 9, windowSize: 1,
  });
}

interface Harness {
  controller: AnimationController;
  fetched: string[];
  presented: string[];
  statuses: string[];
  errors: string[];
  failDates: Set<string>;
  resolveDelayMs: number;
}

function makeHarness(dates: ReportDate[]): Harness {
  const harness: Partial<Harness> & { fetched: string[]; presented: string[];
    statuses: string[]; errors: string[]; failDates: Set<string> } = {
    fetched: [],
    presented: [],
    statuses: [],
    errors: [],
    failDates: new Set(),
    resolveDelayMs: 0,
  };
  const controller = new AnimationController({
    fetchFrame(date): Promise<FramePayload> {
      harness.fetched.push(date.date);
      if (harness.failDates.has(date.date)) {
        return Promise.reject(new Error("boom"));
      }
      const payload = frame([entry()], date.date);
      if (harness.resolveDelayMs) {
        return new Promise((resolve) =>
          setTimeout(() => resolve(payload), harness.resolveDelayMs));
      }
      return Promise.resolve(payload);
    },
    onFrame(framePayload) {
      harness.presented.push(framePayload.date);
    },
    onStatus(status) {
      harness.statuses.push(status);
    },
    onError(message) {
      harness.errors.push(message);
    },
  });
  controller.setDates(dates);
  harness.controller = controller;
  return harness as Harness;
}

beforeEach(() => {
  vi.useFakeTimers();
});

afterEach(() => {
  vi.useRealTimers();
});

describe("AnimationController", () => {
  test("a 10-date range issues exactly 10 frame requests in order", async () => {
    const dates = tenDates();
    const harness = makeHarness(dates);
    harness.controller.play();
    await vi.runAllTimersAsync();
    expect(harness.fetched).toEqual(dates.map((d) => d.date));
    expect(harness.fetched).toHaveLength(10);
    expect(harness.presented).toEqual(harness.fetched);
    expect(harness.controller.playback).toBe("stopped");
  });

  test("double speed halves the tick interval", async () => {
    const dates = tenDates();
    const harness = makeHarness(dates);
    harness.controller.setSpeed(2);
    harness.controller.play();
    await vi.advanceTimersByTimeAsync(0);
    expect(harness.fetched).toHaveLength(1);
    // 9 more ticks at 500 ms each: all 10 after ~4.5 s, ~5 one-second ticks.
    await vi.advanceTimersByTimeAsync(4500);
    expect(harness.fetched).toHaveLength(10);
  });

  test("pause freezes and resume continues from the same place", async () => {
    const harness = makeHarness(tenDates());
    harness.controller.play();
    await vi.advanceTimersByTimeAsync(2000); // frames 0, 1, 2
    const seen = harness.presented.length;
    harness.controller.pause();
    await vi.advanceTimersByTimeAsync(10_000);
    expect(harness.presented).toHaveLength(seen);
    harness.controller.resume();
    await vi.runAllTimersAsync();
    expect(harness.presented).toHaveLength(10);
    expect(new Set(harness.presented).size).toBe(10); // no repeats, no skips
  });

  test("step back at the end shows the previous report date", async () => {
    const dates = tenDates();
    const harness = makeHarness(dates);
    harness.controller.play();
    await vi.runAllTimersAsync();
    harness.controller.stepBackward();
    await vi.runAllTimersAsync();
    expect(harness.presented[harness.presented.length - 1]).toBe(dates[8].date);
    harness.controller.stepBackward();
    await vi.runAllTimersAsync();
    expect(harness.presented[harness.presented.length - 1]).toBe(dates[7].date);
  });

  test("step forward presents the next date without playing", async () => {
    const dates = tenDates();
    const harness = makeHarness(dates);
    harness.controller.stepForward();
    await vi.runAllTimersAsync();
    harness.controller.stepForward();
    await vi.runAllTimersAsync();
    expect(harness.presented).toEqual([dates[0].date, dates[1].date]);
    expect(harness.controller.playback).not.toBe("playing");
  });

  test("network failure pauses playback with a visible notice", async () => {
    const dates = tenDates();
    const harness = makeHarness(dates);
    harness.failDates.add(dates[3].date);
    harness.controller.play();
    await vi.runAllTimersAsync();
    expect(harness.controller.playback).toBe("paused");
    expect(harness.errors).toHaveLength(1);
    expect(harness.presented).toHaveLength(3);
    // Clearing the fault and resuming picks up at the failed date.
    harness.failDates.clear();
    harness.controller.resume();
    await vi.runAllTimersAsync();
    expect(harness.presented).toHaveLength(10);
  });

  test("stale responses are discarded: at most one frame wins", async () => {
    const dates = tenDates();
    const harness = makeHarness(dates);
    harness.resolveDelayMs = 50;
    void harness.controller.showDate(dates[2]);
    void harness.controller.showDate(dates[7]); // supersedes the first
    await vi.runAllTimersAsync();
    expect(harness.fetched).toEqual([dates[2].date, dates[7].date]);
    expect(harness.presented).toEqual([dates[7].date]); // older response dropped
  });

  test("stop terminates and play restarts from the beginning", async () => {
    const dates = tenDates();
    const harness = makeHarness(dates);
    harness.controller.play();
    await vi.advanceTimersByTimeAsync(2000);
    harness.controller.stop();
    expect(harness.controller.playback).toBe("stopped");
    const before = harness.presented.length;
    harness.controller.play();
    await vi.runAllTimersAsync();
    expect(harness.presented[before]).toBe(dates[0].date);
  });
});
