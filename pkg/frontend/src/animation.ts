/** Playback over the report-date list: one frame fetch per tick.
 *
 * At most one frame request is ever in flight; responses that are no longer
 * current (an older request sequence) are discarded. A network failure
 * pauses playback and surfaces a notice instead of skipping dates.
 */

import type { ReportDate } from "./timeline";
import type { FramePayload } from "./types";
import type { Playback } from "./state";

export interface AnimationCallbacks {
  fetchFrame(date: ReportDate): Promise<FramePayload>;
  onFrame(frame: FramePayload, date: ReportDate): void;
  onStatus(status: Playback): void;
  onError(message: string): void;
}

export class AnimationController {
  private dates: ReportDate[] = [];
  private cursor = -1; // index of the last presented date
  private status: Playback = "stopped";
  private speed = 1; // report-dates per second
  private timer: ReturnType<typeof setTimeout> | null = null;
  private requestSeq = 0;

  constructor(private readonly callbacks: AnimationCallbacks) {}

  get playback(): Playback {
    return this.status;
  }

  get currentDate(): ReportDate | null {
    return this.cursor >= 0 ? this.dates[this.cursor] : null;
  }

  get reportDates(): readonly ReportDate[] {
    return this.dates;
  }

  /** Replace the playable dates (range or window size changed); stops playback. */
  setDates(dates: ReportDate[]): void {
    this.stop();
    this.dates = dates;
    this.cursor = -1;
  }

  setSpeed(datesPerSecond: number): void {
    if (datesPerSecond > 0) this.speed = datesPerSecond;
  }

  play(): void {
    if (this.status === "playing" || this.dates.length === 0) return;
    if (this.cursor >= this.dates.length - 1) this.cursor = -1; // restart
    this.setStatus("playing");
    this.tick();
  }

  pause(): void {
    if (this.status !== "playing") return;
    this.clearTimer();
    this.setStatus("paused");
  }

  resume(): void {
    if (this.status !== "paused") return;
    this.setStatus("playing");
    this.tick();
  }

  stop(): void {
    this.clearTimer();
    this.cursor = -1;
    this.setStatus("stopped");
  }

  /** The ">" button: present the next report date without starting playback. */
  stepForward(): void {
    if (this.status === "playing") this.pause();
    if (this.cursor + 1 < this.dates.length) {
      void this.present(this.cursor + 1);
    }
  }

  /** The "<" button: present the previous report date. */
  stepBackward(): void {
    if (this.status === "playing") this.pause();
    if (this.cursor > 0) {
      void this.present(this.cursor - 1);
    }
  }

  /** Present one arbitrary report date (slider replay, seeking). */
  showDate(date: ReportDate): Promise<void> {
    const seq = ++this.requestSeq;
    return this.callbacks
      .fetchFrame(date)
      .then((frame) => {
        if (seq !== this.requestSeq) return; // stale: a newer request exists
        const index = this.dates.findIndex((d) => d.dayIndex === date.dayIndex);
        if (index >= 0) this.cursor = index;
        this.callbacks.onFrame(frame, date);
      })
      .catch((error: unknown) => this.failPaused(error));
  }

  dispose(): void {
    this.clearTimer();
  }

  private tick(): void {
    this.timer = null;
    if (this.status !== "playing") return;
    const next = this.cursor + 1;
    if (next >= this.dates.length) {
      this.clearTimer();
      this.setStatus("stopped");
      return;
    }
    void this.present(next).then((presented) => {
      if (!presented || this.status !== "playing") return;
      if (this.cursor + 1 >= this.dates.length) {
        this.setStatus("stopped");
      } else {
        this.timer = setTimeout(() => this.tick(), 1000 / this.speed);
      }
    });
  }

  /** Fetch and present dates[index]; resolves true when the frame was shown. */
  private present(index: number): Promise<boolean> {
    const date = this.dates[index];
    const seq = ++this.requestSeq;
    return this.callbacks
      .fetchFrame(date)
      .then((frame) => {
        if (seq !== this.requestSeq) return false;
        this.cursor = index;
        this.callbacks.onFrame(frame, date);
        return true;
      })
      .catch((error: unknown) => {
        this.failPaused(error);
        return false;
      });
  }

  private failPaused(error: unknown): void {
    this.clearTimer();
    if (this.status === "playing") this.setStatus("paused");
    const message = error instanceof Error ? error.message : String(error);
    this.callbacks.onError(`frame fetch failed: ${message}`);
  }

  private setStatus(status: Playback): void {
    if (this.status === status) return;
    this.status = status;
    this.callbacks.onStatus(status);
  }

  private clearTimer(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }
}
