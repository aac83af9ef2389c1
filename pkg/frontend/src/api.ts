/** Thin typed client for the geocircles HTTP API.
 *
 * Every number the UI displays or draws comes out of these responses; the
 * client never aggregates or scales anything locally.
 */

import type {
  FramePayload,
  MetaPayload,
  PickPayload,
  RegionInfo,
  SeriesPayload,
} from "./types";

export type FetchLike = (url: string) => Promise<Response>;

export type Params = Record<string, string>;

export class ApiError extends Error {
  constructor(readonly status: number, readonly url: string, detail: string) {
    super(`${status} for ${url}: ${detail}`);
  }
}

export class ApiClient {
  readonly requests: string[] = [];

  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (url) => fetch(url),
  ) {}

  private async get<T>(path: string, params: Params = {}): Promise<T> {
    const query = new URLSearchParams(params).toString();
    const url = `${this.baseUrl}${path}${query ? `?${query}` : ""}`;
    this.requests.push(url);
    const response = await this.fetchFn(url);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        detail = ((await response.json()) as { detail?: string }).detail ?? detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, url, detail);
    }
    return (await response.json()) as T;
  }

  meta(): Promise<MetaPayload> {
    return this.get<MetaPayload>("/api/meta");
  }

  regions(level?: string, q?: string): Promise<RegionInfo[]> {
    const params: Params = {};
    if (level) params.level = level;
    if (q) params.q = q;
    return this.get<RegionInfo[]>("/api/regions", params);
  }

  frame(params: Params): Promise<FramePayload> {
    return this.get<FramePayload>("/api/frame", params);
  }

  series(params: Params): Promise<SeriesPayload> {
    return this.get<SeriesPayload>("/api/series", params);
  }

  pick(params: Params): Promise<PickPayload> {
    return this.get<PickPayload>("/api/pick", params);
  }

  threshold(params: Params): Promise<unknown> {
    return this.get<unknown>("/api/threshold", params);
  }
}
