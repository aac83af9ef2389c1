/** Drawing of one geocircle frame.
 *
 * Radii come straight from the payload; this module never rescales them.
 * Variables draw dashed ("broken"), rates solid, and a highlighted entry
 * gets a thicker outline.
 */

import type { FrameEntry, FramePayload } from "./types";

export interface CircleStyle {
  color: string;
  dashed: boolean;
  width: number;
}

export interface CircleRenderer {
  clear(): void;
  drawCircle(x: number, y: number, radiusPx: number, style: CircleStyle): void;
}

export interface Projector {
  /** Screen position for an anchor, or null when off-viewport. */
  toScreen(lat: number, lon: number): { x: number; y: number } | null;
}

export const BASE_STROKE_WIDTH = 1.5;
export const HIGHLIGHT_STROKE_WIDTH = 3.5;

function malformed(entry: unknown): boolean {
  const e = entry as Partial<FrameEntry> | null;
  return (
    !e ||
    typeof e.lat !== "number" ||
    typeof e.lon !== "number" ||
    !Number.isFinite(e.lat) ||
    !Number.isFinite(e.lon) ||
    !Array.isArray(e.circles)
  );
}

/** Draw every entry of a frame; returns the number of circles drawn. */
export function renderFrame(
  frame: FramePayload,
  projector: Projector,
  renderer: CircleRenderer,
): number {
  renderer.clear();
  let drawn = 0;
  for (const entry of frame.entries) {
    if (malformed(entry)) {
      console.warn("skipping malformed frame entry", entry);
      continue;
    }
    const screen = projector.toScreen(entry.lat, entry.lon);
    if (screen === null) continue;
    const width = entry.highlight ? HIGHLIGHT_STROKE_WIDTH : BASE_STROKE_WIDTH;
    for (const circle of entry.circles) {
      if (
        typeof circle.radius_px !== "number" ||
        !Number.isFinite(circle.radius_px) ||
        circle.radius_px < 0
      ) {
        console.warn("skipping malformed circle", entry.target, circle);
        continue;
      }
      if (circle.radius_px === 0) continue; // zero value: nothing to draw
      renderer.drawCircle(screen.x, screen.y, circle.radius_px, {
        color: circle.color,
        dashed: circle.stroke === "broken",
        width,
      });
      drawn++;
    }
  }
  return drawn;
}

/** Canvas-backed renderer used by the real map overlay. */
export class CanvasRenderer implements CircleRenderer {
  constructor(private readonly ctx: CanvasRenderingContext2D) {}

  clear(): void {
    const { canvas } = this.ctx;
    this.ctx.clearRect(0, 0, canvas.width, canvas.height);
  }

  drawCircle(x: number, y: number, radiusPx: number, style: CircleStyle): void {
    this.ctx.beginPath();
    this.ctx.setLineDash(style.dashed ? [6, 4] : []);
    this.ctx.lineWidth = style.width;
    this.ctx.strokeStyle = style.color;
    this.ctx.arc(x, y, radiusPx, 0, 2 * Math.PI);
    this.ctx.stroke();
    this.ctx.setLineDash([]);
  }
}
