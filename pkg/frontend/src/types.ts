/** Wire types mirroring the geocircles JSON API. */

export interface MetaPayload {
  epoch: string;
  n_days: number;
  last: string;
  variables: string[];
  levels: string[];
  incidence_available: boolean;
  version: string;
}

export interface RegionInfo {
  id: string;
  display_name: string;
  level: string;
  anchor: { lat: number; lon: number } | null;
  population: number | null;
}

export interface Circle {
  kind: "variable" | "rate";
  name: string;
  value: number;
  radius_px: number;
  stroke: "broken" | "solid";
  color: string;
}

export interface FrameEntry {
  target: string;
  label: string;
  lat: number;
  lon: number;
  members: string[];
  highlight: boolean;
  circles: Circle[];
}

export interface FramePayload {
  date: string;
  mode: string;
  agg: string;
  level: string;
  window: { start: string; end: string; days: number };
  entries: FrameEntry[];
}

export interface PickPayload {
  region: string | null;
  display_name?: string;
  lat?: number;
  lon?: number;
  distance_km?: number;
  values?: Record<string, number>;
  rates?: Record<string, number>;
}

export interface SeriesCells {
  variables: Record<string, number | null>;
  rates: Record<string, number | null>;
}

export interface SeriesRow {
  date: string;
  window: { start: string; end: string };
  focus: SeriesCells;
  baseline: SeriesCells | null;
}

export interface SeriesPayload {
  focus: string;
  baseline: string | null;
  mode: string;
  agg: string;
  window_days: number | null;
  rows: SeriesRow[];
}
