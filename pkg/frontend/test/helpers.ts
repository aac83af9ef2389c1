/** Shared test doubles: recording renderer, frame factory, mocked fetch. */

import type { CircleRenderer, CircleStyle } from "../src/render";
import type { Circle, FrameEntry, FramePayload } from "../src/types";

export interface DrawnCircle {
  x: number;
  y: number;
  radiusPx: number;
  style: CircleStyle;
}

export class RecordingRenderer implements CircleRenderer {
  drawn: DrawnCircle[] = [];
  clears = 0;

  clear(): void {
    this.clears++;
    this.drawn = [];
  }

  drawCircle(x: number, y: number, radiusPx: number, style: CircleStyle): void {
    this.drawn.push({ x, y, radiusPx, style });
  }
}

export const identityProjector = {
  toScreen(lat: number, lon: number) {
    return { x: lon, y: lat };
  },
};

export function circle(partial: Partial<Circle> = {}): Circle {
  return {
    kind: "variable",
    name: "confirmed",
    value: 10,
    radius_px: 25,
    stroke: "broken",
    color: "black",
    ...partial,
  };
}

export function entry(partial: Partial<FrameEntry> = {}): FrameEntry {
  return {
    target: "x",
    label: "X",
    lat: 10,
    lon: 20,
    members: ["x"],
    highlight: false,
    circles: [circle()],
    ...partial,
  };
}

export function frame(entries: FrameEntry[], date = "2020-01-26"): FramePayload {
  return {
    date,
    mode: "total",
    agg: "cumulative",
    level: "country",
    window: { start: "2020-01-22", end: date, days: 5 },
    entries,
  };
}

export function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "content-type": "application/json" },
  });
}
