import { describe, expect, test } from "vitest";

import { dayIndexOf, isoAfter, reportDates } from "../src/timeline";

describe("isoAfter", () => {
  test("epoch plus zero is the epoch", () => {
    expect(isoAfter("2020-01-22", 0)).toBe("2020-01-22");
  });

  test("crosses the leap day", () => {
    expect(isoAfter("2020-01-22", 39)).toBe("2020-03-01");
  });

  test("round-trips with dayIndexOf", () => {
    for (let day = 0; day < 400; day++) {
      const date = isoAfter("2019-12-20", day);
      expect(dayIndexOf("2019-12-20", date)).toBe(day);
    }
  });
});

describe("reportDates", () => {
  test("window mode slides a fixed-width window", () => {
    const dates = reportDates("2020-01-22", {
      mode: "window", startDay: 0, endDay: 4, windowSize: 2,
    });
    expect(dates.map((d) => d.dayIndex)).toEqual([1, 2, 3, 4]);
    expect(dates.map((d) => [d.windowStart, d.windowEnd])).toEqual([
      ["2020-01-22", "2020-01-23"],
      ["2020-01-23", "2020-01-24"],
      ["2020-01-24", "2020-01-25"],
      ["2020-01-25", "2020-01-26"],
    ]);
  });

  test("total mode grows a prefix", () => {
    const dates = reportDates("2020-01-22", {
      mode: "total", startDay: 0, endDay: 2, windowSize: 1,
    });
    expect(dates.map((d) => [d.windowStart, d.windowEnd])).toEqual([
      ["2020-01-22", "2020-01-22"],
      ["2020-01-22", "2020-01-23"],
      ["2020-01-22", "2020-01-24"],
    ]);
  });

  test("maximum window yields a single report date", () => {
    const dates = reportDates("2020-01-22", {
      mode: "window", startDay: 0, endDay: 9, windowSize: 10,
    });
    expect(dates).toHaveLength(1);
    expect(dates[0].dayIndex).toBe(9);
    expect(dates[0].windowStart).toBe("2020-01-22");
    expect(dates[0].windowEnd).toBe("2020-01-31");
  });

  test("every window is stamped on its last day", () => {
    const dates = reportDates("2020-01-22", {
      mode: "window", startDay: 3, endDay: 20, windowSize: 7,
    });
    for (const report of dates) {
      expect(report.date).toBe(report.windowEnd);
      expect(dayIndexOf("2020-01-22", report.windowEnd) -
             dayIndexOf("2020-01-22", report.windowStart)).toBe(6);
    }
    expect(dates[0].dayIndex).toBe(9); // startDay + windowSize - 1
  });
});
