/** Client-side mirror of the server's report-date semantics.
 *
 * The playable date list is derived from /api/meta plus the UI state; each
 * report date is the last day of its effective window.
 */

const DAY_MS = 86_400_000;

export interface TimelineSpec {
  mode: "total" | "window";
  startDay: number; // inclusive day index of the animation range
  endDay: number;
  windowSize: number; // effective size in days (Maximum = range length)
}

export interface ReportDate {
  dayIndex: number;
  date: string;
  windowStart: string;
  windowEnd: string;
  windowDays: number;
}

export function isoAfter(epoch: string, days: number): string {
  const [y, m, d] = epoch.split("-").map(Number);
  return new Date(Date.UTC(y, m - 1, d) + days * DAY_MS)
    .toISOString()
    .slice(0, 10);
}

export function dayIndexOf(epoch: string, date: string): number {
  const [ey, em, ed] = epoch.split("-").map(Number);
  const [y, m, d] = date.split("-").map(Number);
  return Math.round((Date.UTC(y, m - 1, d) - Date.UTC(ey, em - 1, ed)) / DAY_MS);
}

export function reportDates(epoch: string, spec: TimelineSpec): ReportDate[] {
  const out: ReportDate[] = [];
  if (spec.mode === "window") {
    const first = spec.startDay + spec.windowSize - 1;
    for (let end = first; end <= spec.endDay; end++) {
      out.push({
        dayIndex: end,
        date: isoAfter(epoch, end),
        windowStart: isoAfter(epoch, end - spec.windowSize + 1),
        windowEnd: isoAfter(epoch, end),
        windowDays: spec.windowSize,
      });
    }
  } else {
    for (let end = spec.startDay; end <= spec.endDay; end++) {
      out.push({
        dayIndex: end,
        date: isoAfter(epoch, end),
        windowStart: isoAfter(epoch, spec.startDay),
        windowEnd: isoAfter(epoch, end),
        windowDays: end - spec.startDay + 1,
      });
    }
  }
  return out;
}
