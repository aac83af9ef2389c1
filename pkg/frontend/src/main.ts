/** Application bootstrap: wires the API client, map, panels, animation loop,
 * hover pick, and the shareable URL hash together. */

import { ApiClient } from "./api";
import { AnimationController } from "./animation";
import { HoverController } from "./hover";
import { CanvasMap } from "./map";
import { ControlPanel, FocusDataPanel, HoverBox } from "./panels";
import { CanvasRenderer, renderFrame } from "./render";
import { TimeSliderModel } from "./slider";
import {
  decodeHash,
  defaultState,
  encodeHash,
  frameParams,
  normalize,
  windowParam,
  type UiState,
} from "./state";
import { isoAfter, reportDates, type ReportDate } from "./timeline";
import type { FramePayload, MetaPayload } from "./types";

const API_BASE = (window as { GEOCIRCLES_API?: string }).GEOCIRCLES_API ?? "";
const TILE_URL = (window as { GEOCIRCLES_TILES?: string }).GEOCIRCLES_TILES ??
  "https://tile.openstreetmap.org/{z}/{x}/{y}.png";
const ATTRIBUTION =
  '&copy; <a href="https://www.openstreetmap.org/copyright">OpenStreetMap</a> contributors';

class App {
  private state: UiState;
  private meta: MetaPayload;
  private readonly api = new ApiClient(API_BASE);
  private readonly map: CanvasMap;
  private readonly panel: ControlPanel;
  private readonly hoverBox: HoverBox;
  private readonly focusPanel: FocusDataPanel;
  private readonly animation: AnimationController;
  private readonly hover: HoverController;
  private readonly slider: TimeSliderModel;
  private lastFrame: FramePayload | null = null;

  constructor(meta: MetaPayload, root: HTMLElement) {
    this.meta = meta;
    this.state = normalize(decodeHash(location.hash, defaultState(meta.n_days)),
                           meta.n_days);

    const mapHost = root.querySelector<HTMLElement>("#map")!;
    this.map = new CanvasMap(mapHost, {
      tileUrlTemplate: TILE_URL,
      attribution: ATTRIBUTION,
    });
    this.map.setView({
      centerLat: this.state.centerLat,
      centerLon: this.state.centerLon,
      zoom: this.state.zoom,
    });

    this.hoverBox = new HoverBox(mapHost);
    this.focusPanel = new FocusDataPanel(root.querySelector<HTMLElement>("#focus-data")!);
    this.slider = new TimeSliderModel(meta.epoch, meta.n_days);
    this.slider.setRange(this.state.startDay, this.state.endDay);

    this.animation = new AnimationController({
      fetchFrame: (date) => this.fetchFrame(date),
      onFrame: (frame, date) => this.presentFrame(frame, date),
      onStatus: (status) => {
        this.state.playback = status;
        this.panel.setPlayback(status);
      },
      onError: (message) => this.panel.setNotice(message),
    });
    this.animation.setSpeed(this.state.speed);

    this.hover = new HoverController(
      (lat, lon) => this.api.pick({
        ...frameParams(this.state, (d) => isoAfter(this.meta.epoch, d),
                       this.currentDateIso()),
        lat: String(lat),
        lon: String(lon),
      }),
      (pick) => {
        if (pick === null) this.hoverBox.hide();
        else this.hoverBox.show(pick);
      },
    );

    this.panel = new ControlPanel(
      root.querySelector<HTMLElement>("#controls")!,
      this.state,
      meta.n_days,
      {
        onStateChange: (mutate) => this.updateState(mutate),
        onPlay: () => this.animation.play(),
        onPause: () => this.animation.pause(),
        onResume: () => this.animation.resume(),
        onStop: () => this.animation.stop(),
        onStepForward: () => this.animation.stepForward(),
        onStepBackward: () => this.animation.stepBackward(),
        onLeftHandleDrag: (day) => this.replayFromLeftHandle(day),
        onRightHandleDrag: (day) => this.updateState((s) => {
          this.slider.dragRightTo(day);
          s.startDay = this.slider.start;
          s.endDay = this.slider.end;
        }),
        onFocusPicked: (regionId) => this.setFocus(regionId),
        onBaselinePicked: (regionId) => this.setBaseline(regionId),
      },
    );

    this.map.onViewChange = (view) => this.updateState((s) => {
      s.centerLat = view.centerLat;
      s.centerLon = view.centerLon;
      s.zoom = view.zoom;
    });
    this.map.onHover = (lat, lon) => this.hover.pointerMove(lat, lon);
    this.map.onHoverEnd = () => this.hover.pointerLeave();
    this.map.onPointer = (x, y) => this.hoverBox.moveTo(x, y);
    // A single left click initializes or resets the Animation Focus.
    this.map.onClick = (lat, lon) => {
      this.api
        .pick({
          ...frameParams(this.state, (d) => isoAfter(this.meta.epoch, d),
                         this.currentDateIso()),
          lat: String(lat),
          lon: String(lon),
        })
        .then((pick) => this.setFocus(pick.region))
        .catch(() => this.panel.setNotice("focus pick failed"));
    };
    window.addEventListener("resize", () => {
      this.map.resize();
      this.redraw();
    });

    void this.api.regions("country").then((regions) => this.panel.setRegions(regions));
    this.rebuildDates();
    this.showCurrent();
  }

  private currentDateIso(): string {
    return this.animation.currentDate?.date ??
      isoAfter(this.meta.epoch, this.state.endDay);
  }

  private fetchFrame(date: ReportDate): Promise<FramePayload> {
    const params = frameParams(this.state, (d) => isoAfter(this.meta.epoch, d),
                               date.date);
    return this.api.frame(params);
  }

  private presentFrame(frame: FramePayload, date: ReportDate): void {
    this.lastFrame = frame;
    this.panel.setCurrentDate(`${date.date} (window ${frame.window.start} … ${frame.window.end})`);
    this.panel.setNotice(null);
    this.redraw();
    this.refreshFocusPanel(date.date);
  }

  private redraw(): void {
    if (this.lastFrame === null) return;
    renderFrame(this.lastFrame, this.map, new CanvasRenderer(this.map.overlayContext));
  }

  private rebuildDates(): void {
    const dates = reportDates(this.meta.epoch, {
      mode: this.state.mode,
      startDay: this.state.startDay,
      endDay: this.state.endDay,
      windowSize: this.state.maximumWindow
        ? this.state.endDay - this.state.startDay + 1
        : this.state.windowSize,
    });
    this.animation.setDates(dates);
  }

  private showCurrent(): void {
    const dates = this.animation.reportDates;
    if (dates.length > 0) {
      void this.animation.showDate(dates[dates.length - 1]);
    }
  }

  private updateState(mutate: (state: UiState) => void): void {
    mutate(this.state);
    this.state = normalize(this.state, this.meta.n_days);
    this.slider.setRange(this.state.startDay, this.state.endDay);
    this.animation.setSpeed(this.state.speed);
    this.panel.updateState(this.state, this.meta.n_days);
    history.replaceState(null, "", encodeHash(this.state));
    this.rebuildDates();
    this.showCurrent();
  }

  /** Left-handle drag: right handle follows at fixed width, replaying the
   * shifted window without rebuilding the whole date list. */
  private replayFromLeftHandle(day: number): void {
    this.animation.pause();
    const report = this.slider.dragLeftTo(day);
    this.state.startDay = this.slider.start;
    this.state.endDay = this.slider.end;
    this.state.mode = "window";
    this.state.maximumWindow = true; // window spans the handles exactly
    this.panel.updateState(this.state, this.meta.n_days);
    history.replaceState(null, "", encodeHash(this.state));
    void this.animation.showDate(report);
  }

  private setFocus(regionId: string | null): void {
    this.state.focus = regionId;
    this.panel.setFocusSelection(this.state.focus, this.state.baseline);
    history.replaceState(null, "", encodeHash(this.state));
    this.refreshFocusPanel(this.currentDateIso());
  }

  private setBaseline(regionId: string | null): void {
    this.state.baseline = regionId;
    this.panel.setFocusSelection(this.state.focus, this.state.baseline);
    history.replaceState(null, "", encodeHash(this.state));
    this.refreshFocusPanel(this.currentDateIso());
  }

  private refreshFocusPanel(date: string): void {
    if (!this.state.focus) {
      this.focusPanel.clear();
      return;
    }
    const params: Record<string, string> = {
      focus: this.state.focus,
      start: isoAfter(this.meta.epoch, this.state.startDay),
      end: isoAfter(this.meta.epoch, this.state.endDay),
      agg: this.state.aggregation,
      vars: this.state.variables.join(","),
      rates: this.state.rates.join(","),
    };
    if (this.state.mode === "window") params.window = windowParam(this.state);
    if (this.state.baseline) params.baseline = this.state.baseline;
    this.api
      .series(params)
      .then((payload) => this.focusPanel.showRow(payload, date))
      .catch(() => this.focusPanel.clear());
  }
}

async function boot(): Promise<void> {
  const root = document.getElementById("app")!;
  const api = new ApiClient(API_BASE);
  try {
    const meta = await api.meta();
    new App(meta, root);
  } catch (error) {
    root.querySelector("#map")!.textContent =
      `Cannot reach the geocircles API: ${String(error)}`;
  }
}

void boot();
