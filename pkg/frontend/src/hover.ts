/** Debounced hover pick: at most one /api/pick request per debounce window. */

import type { PickPayload } from "./types";

export const DEFAULT_DEBOUNCE_MS = 150;

export class HoverController {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private seq = 0;

  constructor(
    private readonly pickFn: (lat: number, lon: number) => Promise<PickPayload>,
    private readonly onResult: (pick: PickPayload | null) => void,
    private readonly debounceMs: number = DEFAULT_DEBOUNCE_MS,
  ) {}

  /** Trailing-edge debounce: only the final position of a burst is queried. */
  pointerMove(lat: number, lon: number): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      this.issue(lat, lon);
    }, this.debounceMs);
  }

  pointerLeave(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.seq++; // drop any in-flight response
    this.onResult(null);
  }

  dispose(): void {
    this.pointerLeave();
  }

  private issue(lat: number, lon: number): void {
    const seq = ++this.seq;
    this.pickFn(lat, lon)
      .then((pick) => {
        if (seq !== this.seq) return;
        this.onResult(pick.region === null ? null : pick);
      })
      .catch(() => {
        if (seq === this.seq) this.onResult(null);
      });
  }
}
