/** UI state: selections, animation range, playback, scaling sliders.
 *
 * The URL hash encodes the state so views are shareable; invariants (ordered
 * slider handles, window <= range, factor bounds) are enforced on the way in.
 */

export const SPEED_STEPS = [0.5, 1, 2, 4, 8] as const;
export const FACTOR_MIN = 0.1;
export const FACTOR_MAX = 8.0;

export type Playback = "stopped" | "playing" | "paused";

export interface UiState {
  centerLat: number;
  centerLon: number;
  zoom: number;
  variables: string[];
  rates: string[];
  mode: "total" | "window";
  startDay: number;
  endDay: number;
  windowSize: number;
  maximumWindow: boolean; // the Maximum checkbox
  playback: Playback;
  speed: number; // report-dates per second
  focus: string | null;
  baseline: string | null;
  scaleMethod: "linear" | "log" | "flannery";
  factors: Record<string, number>; // per-series, 0.1x .. 8.0x
  clusterPx: number;
  aggregation: "cumulative" | "daily_avg";
}

// Preset series selections from the View tab.
export const VIEW_PRESETS: Record<string, { variables: string[]; rates: string[] }> = {
  default: { variables: [], rates: ["incidence", "mortality"] },
  rate: { variables: [], rates: ["incidence", "mortality", "recovery"] },
};

export function defaultState(nDays: number): UiState {
  return {
    centerLat: 20,
    centerLon: 0,
    zoom: 2,
    variables: [...VIEW_PRESETS.default.variables],
    rates: [...VIEW_PRESETS.default.rates],
    mode: "total",
    startDay: 0,
    endDay: Math.max(0, nDays - 1),
    windowSize: 1,
    maximumWindow: false,
    playback: "stopped",
    speed: 1,
    focus: null,
    baseline: null,
    scaleMethod: "flannery",
    factors: {},
    clusterPx: 60,
    aggregation: "cumulative",
  };
}

function clamp(x: number, lo: number, hi: number): number {
  return Math.min(Math.max(x, lo), hi);
}

/** Enforce state invariants against the dataset calendar. */
export function normalize(state: UiState, nDays: number): UiState {
  const last = Math.max(0, nDays - 1);
  const startDay = clamp(Math.round(state.startDay), 0, last);
  const endDay = clamp(Math.round(state.endDay), startDay, last);
  const rangeLength = endDay - startDay + 1;
  const windowSize = state.maximumWindow
    ? rangeLength
    : clamp(Math.round(state.windowSize), 1, rangeLength);
  const factors: Record<string, number> = {};
  for (const [name, value] of Object.entries(state.factors)) {
    factors[name] = clamp(value, FACTOR_MIN, FACTOR_MAX);
  }
  const speed = SPEED_STEPS.includes(state.speed as (typeof SPEED_STEPS)[number])
    ? state.speed
    : 1;
  return { ...state, startDay, endDay, windowSize, factors, speed };
}

/** Effective window size sent to the API ("max" when Maximum is checked). */
export function windowParam(state: UiState): string {
  return state.maximumWindow ? "max" : String(state.windowSize);
}

export function scaleFactorParam(state: UiState): string {
  const pairs = Object.entries(state.factors).filter(([, v]) => v !== 1.0);
  if (pairs.length === 0) return "";
  return pairs.map(([name, value]) => `${name}:${value}`).join(",");
}

export function encodeHash(state: UiState): string {
  const params = new URLSearchParams();
  params.set("c", `${state.centerLat.toFixed(4)},${state.centerLon.toFixed(4)}`);
  params.set("z", String(state.zoom));
  if (state.variables.length) params.set("v", state.variables.join(","));
  if (state.rates.length) params.set("r", state.rates.join(","));
  params.set("m", state.mode);
  params.set("t", `${state.startDay},${state.endDay}`);
  params.set("w", state.maximumWindow ? "max" : String(state.windowSize));
  if (state.focus) params.set("f", state.focus);
  if (state.baseline) params.set("b", state.baseline);
  params.set("s", state.scaleMethod);
  const factors = scaleFactorParam(state);
  if (factors) params.set("k", factors);
  if (state.clusterPx !== 60) params.set("cl", String(state.clusterPx));
  if (state.aggregation !== "cumulative") params.set("a", state.aggregation);
  return `#${params.toString()}`;
}

export function decodeHash(hash: string, base: UiState): UiState {
  const state = { ...base, factors: { ...base.factors } };
  const text = hash.startsWith("#") ? hash.slice(1) : hash;
  if (!text) return state;
  const params = new URLSearchParams(text);
  const center = params.get("c")?.split(",").map(Number);
  if (center && center.length === 2 && center.every(Number.isFinite)) {
    [state.centerLat, state.centerLon] = center;
  }
  if (params.get("z") !== null) state.zoom = Number(params.get("z"));
  if (params.get("v") !== null) {
    state.variables = params.get("v")!.split(",").filter(Boolean);
  }
  if (params.get("r") !== null) {
    state.rates = params.get("r")!.split(",").filter(Boolean);
  }
  const mode = params.get("m");
  if (mode === "total" || mode === "window") state.mode = mode;
  const range = params.get("t")?.split(",").map(Number);
  if (range && range.length === 2 && range.every(Number.isFinite)) {
    [state.startDay, state.endDay] = range;
  }
  const windowText = params.get("w");
  if (windowText === "max") {
    state.maximumWindow = true;
  } else if (windowText !== null) {
    state.maximumWindow = false;
    state.windowSize = Number(windowText);
  }
  state.focus = params.get("f") ?? state.focus;
  state.baseline = params.get("b") ?? state.baseline;
  const method = params.get("s");
  if (method === "linear" || method === "log" || method === "flannery") {
    state.scaleMethod = method;
  }
  const factors = params.get("k");
  if (factors !== null) {
    state.factors = {};
    for (const pair of factors.split(",")) {
      const [name, value] = pair.split(":");
      if (name && Number.isFinite(Number(value))) {
        state.factors[name] = Number(value);
      }
    }
  }
  if (params.get("cl") !== null) state.clusterPx = Number(params.get("cl"));
  if (params.get("a") === "daily_avg") state.aggregation = "daily_avg";
  return state;
}

/** Query parameters for /api/frame at one report date. */
export function frameParams(state: UiState, epochPlus: (d: number) => string,
                            date: string): Record<string, string> {
  const params: Record<string, string> = {
    start: epochPlus(state.startDay),
    end: epochPlus(state.endDay),
    date,
    mode: state.mode,
    window: windowParam(state),
    agg: state.aggregation,
    vars: state.variables.join(","),
    rates: state.rates.join(","),
    zoom: String(Math.round(state.zoom)),
    cluster_px: String(state.clusterPx),
    scale_method: state.scaleMethod,
  };
  const factors = scaleFactorParam(state);
  if (factors) params.scale_factor = factors;
  return params;
}
