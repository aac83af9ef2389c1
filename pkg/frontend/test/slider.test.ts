import { describe, expect, test } from "vitest";

import { AnimationController } from "../src/animation";
import { TimeSliderModel } from "../src/slider";
import { reportDates } from "../src/timeline";
import type { FramePayload } from "../src/types";
import { entry, frame } from "./helpers";

describe("TimeSliderModel", () => {
  test("handles stay ordered and inside the calendar", () => {
    const slider = new TimeSliderModel("2020-01-22", 30);
    slider.setRange(12, 5);
    expect(slider.start).toBe(12);
    expect(slider.end).toBe(12);
    slider.setRange(-3, 99);
    expect(slider.start).toBe(0);
    expect(slider.end).toBe(29);
  });

  test("dragging left keeps the width fixed and the right follows", () => {
    const slider = new TimeSliderModel("2020-01-22", 30);
    slider.setRange(10, 16); // width 7 days
    const report = slider.dragLeftTo(4);
    expect(slider.start).toBe(4);
    expect(slider.end).toBe(10);
    expect(report.windowDays).toBe(7);
    expect(report.date).toBe(report.windowEnd);
  });

  test("drag replay across 5 dates fetches 5 ordered frames matching report-date semantics", async () => {
    const epoch = "2020-01-22";
    const nDays = 30;
    const width = 7; // window size in days
    const slider = new TimeSliderModel(epoch, nDays);
    slider.setRange(10, 10 + width - 1);

    const fetched: Array<{ date: string; windowStart: string; windowEnd: string }> = [];
    const controller = new AnimationController({
      fetchFrame(date): Promise<FramePayload> {
        fetched.push({
          date: date.date,
          windowStart: date.windowStart,
          windowEnd: date.windowEnd,
        });
        return Promise.resolve(frame([entry()], date.date));
      },
      onFrame() {},
      onStatus() {},
      onError() {},
    });

    for (const day of [11, 12, 13, 14, 15]) {
      await controller.showDate(slider.dragLeftTo(day));
    }

    expect(fetched).toHaveLength(5);
    // Every fetched window must be a report date of the fixed-width window
    // query over the calendar (the same semantics the server enumerates).
    const expected = reportDates(epoch, {
      mode: "window", startDay: 0, endDay: nDays - 1, windowSize: width,
    });
    const byDate = new Map(expected.map((r) => [r.date, r]));
    for (const got of fetched) {
      const reference = byDate.get(got.date);
      expect(reference).toBeDefined();
      expect(got.windowStart).toBe(reference!.windowStart);
      expect(got.windowEnd).toBe(reference!.windowEnd);
    }
    // Ordered: drag moved forward one day at a time.
    const days = fetched.map((f) => byDate.get(f.date)!.dayIndex);
    expect(days).toEqual([...days].sort((a, b) => a - b));
    expect(new Set(days).size).toBe(5);
  });

  test("dragging right adjusts only the window width", () => {
    const slider = new TimeSliderModel("2020-01-22", 30);
    slider.setRange(5, 10);
    slider.dragRightTo(20);
    expect(slider.start).toBe(5);
    expect(slider.end).toBe(20);
    slider.dragRightTo(2); // cannot cross the left handle
    expect(slider.end).toBe(5);
  });
});
