/** Dual-handle time slider model.
 *
 * The two boxes mark the window's first and last day. Dragging the left box
 * replays continuously: the right box follows it at fixed width, and every
 * drag step yields the report date of the shifted window.
 */

import { isoAfter, type ReportDate } from "./timeline";

export class TimeSliderModel {
  private startDay = 0;
  private endDay = 0;

  constructor(private readonly epoch: string, private nDays: number) {
    this.endDay = Math.max(0, nDays - 1);
  }

  get start(): number {
    return this.startDay;
  }

  get end(): number {
    return this.endDay;
  }

  get widthDays(): number {
    return this.endDay - this.startDay + 1;
  }

  resize(nDays: number): void {
    this.nDays = nDays;
    this.setRange(this.startDay, this.endDay);
  }

  setRange(start: number, end: number): void {
    const last = Math.max(0, this.nDays - 1);
    this.startDay = Math.min(Math.max(Math.round(start), 0), last);
    this.endDay = Math.min(Math.max(Math.round(end), this.startDay), last);
  }

  /** Move the left handle only; the window narrows or widens. */
  dragRightTo(day: number): void {
    this.setRange(this.startDay, Math.max(day, this.startDay));
  }

  /**
   * Drag the left handle with the right following at fixed width; returns
   * the report date for the shifted window (stamped on its last day).
   */
  dragLeftTo(day: number): ReportDate {
    const width = this.endDay - this.startDay;
    const last = Math.max(0, this.nDays - 1);
    const start = Math.min(Math.max(Math.round(day), 0), last - width);
    this.startDay = start;
    this.endDay = start + width;
    return {
      dayIndex: this.endDay,
      date: isoAfter(this.epoch, this.endDay),
      windowStart: isoAfter(this.epoch, this.startDay),
      windowEnd: isoAfter(this.epoch, this.endDay),
      windowDays: width + 1,
    };
  }
}
