/** Minimal slippy map: raster tiles from a configurable z/x/y service on one
 * canvas, geocircles on an overlay canvas, pan by dragging, wheel zoom. */

import { TILE_SIZE, MAX_LAT, project, unproject, worldSize } from "./mercator";
import type { Projector } from "./render";

export interface MapOptions {
  tileUrlTemplate: string; // e.g. https://tile.openstreetmap.org/{z}/{x}/{y}.png
  attribution: string;
  minZoom?: number;
  maxZoom?: number;
}

export interface MapView {
  centerLat: number;
  centerLon: number;
  zoom: number;
}

type LatLonHandler = (lat: number, lon: number) => void;

export class CanvasMap implements Projector {
  private readonly tileCanvas: HTMLCanvasElement;
  private readonly overlayCanvas: HTMLCanvasElement;
  private readonly tiles = new Map<string, HTMLImageElement>();
  private view: MapView = { centerLat: 20, centerLon: 0, zoom: 2 };
  private dragging = false;
  private dragMoved = false;
  private lastPointer: { x: number; y: number } | null = null;

  onViewChange: ((view: MapView) => void) | null = null;
  onHover: LatLonHandler | null = null;
  onHoverEnd: (() => void) | null = null;
  onClick: LatLonHandler | null = null;
  onPointer: ((x: number, y: number) => void) | null = null;

  constructor(
    private readonly container: HTMLElement,
    private readonly options: MapOptions,
  ) {
    this.tileCanvas = document.createElement("canvas");
    this.overlayCanvas = document.createElement("canvas");
    for (const canvas of [this.tileCanvas, this.overlayCanvas]) {
      canvas.style.position = "absolute";
      canvas.style.inset = "0";
      container.appendChild(canvas);
    }
    const attribution = document.createElement("div");
    attribution.className = "map-attribution";
    attribution.innerHTML = options.attribution;
    container.appendChild(attribution);

    this.bindEvents();
    this.resize();
  }

  get overlayContext(): CanvasRenderingContext2D {
    return this.overlayCanvas.getContext("2d")!;
  }

  get currentView(): MapView {
    return { ...this.view };
  }

  setView(view: Partial<MapView>): void {
    const minZoom = this.options.minZoom ?? 0;
    const maxZoom = this.options.maxZoom ?? 18;
    this.view = {
      centerLat: clampLat(view.centerLat ?? this.view.centerLat),
      centerLon: wrapLon(view.centerLon ?? this.view.centerLon),
      zoom: Math.min(Math.max(Math.round(view.zoom ?? this.view.zoom), minZoom), maxZoom),
    };
    this.redrawTiles();
    this.onViewChange?.(this.currentView);
  }

  resize(): void {
    const rect = this.container.getBoundingClientRect();
    for (const canvas of [this.tileCanvas, this.overlayCanvas]) {
      canvas.width = Math.max(1, rect.width);
      canvas.height = Math.max(1, rect.height);
    }
    this.redrawTiles();
  }

  /** Projector: world pixel -> screen pixel, null outside the viewport. */
  toScreen(lat: number, lon: number): { x: number; y: number } | null {
    if (Math.abs(lat) > MAX_LAT) return null;
    const world = project(lat, lon, this.view.zoom);
    const origin = this.origin();
    const x = world.x - origin.x;
    const y = world.y - origin.y;
    const margin = 200; // keep circles whose center is just off-screen
    if (x < -margin || y < -margin ||
        x > this.tileCanvas.width + margin ||
        y > this.tileCanvas.height + margin) {
      return null;
    }
    return { x, y };
  }

  screenToLatLon(x: number, y: number): { lat: number; lon: number } {
    const origin = this.origin();
    return unproject(origin.x + x, origin.y + y, this.view.zoom);
  }

  private origin(): { x: number; y: number } {
    const center = project(this.view.centerLat, this.view.centerLon, this.view.zoom);
    return {
      x: center.x - this.tileCanvas.width / 2,
      y: center.y - this.tileCanvas.height / 2,
    };
  }

  private bindEvents(): void {
    const element = this.container;
    element.addEventListener("pointerdown", (event) => {
      this.dragging = true;
      this.dragMoved = false;
      this.lastPointer = { x: event.clientX, y: event.clientY };
      element.setPointerCapture(event.pointerId);
    });
    element.addEventListener("pointermove", (event) => {
      const rect = element.getBoundingClientRect();
      const sx = event.clientX - rect.left;
      const sy = event.clientY - rect.top;
      if (this.dragging && this.lastPointer) {
        const dx = event.clientX - this.lastPointer.x;
        const dy = event.clientY - this.lastPointer.y;
        if (Math.abs(dx) + Math.abs(dy) > 2) this.dragMoved = true;
        this.lastPointer = { x: event.clientX, y: event.clientY };
        this.panBy(dx, dy);
      } else {
        const { lat, lon } = this.screenToLatLon(sx, sy);
        this.onHover?.(lat, lon);
        this.onPointer?.(sx, sy);
      }
    });
    element.addEventListener("pointerup", (event) => {
      if (this.dragging && !this.dragMoved) {
        const rect = element.getBoundingClientRect();
        const { lat, lon } = this.screenToLatLon(event.clientX - rect.left,
                                                 event.clientY - rect.top);
        this.onClick?.(lat, lon);
      }
      this.dragging = false;
      this.lastPointer = null;
    });
    element.addEventListener("pointerleave", () => {
      this.dragging = false;
      this.lastPointer = null;
      this.onHoverEnd?.();
    });
    element.addEventListener("wheel", (event) => {
      event.preventDefault();
      const delta = event.deltaY < 0 ? 1 : -1;
      this.setView({ zoom: this.view.zoom + delta });
    }, { passive: false });
  }

  private panBy(dx: number, dy: number): void {
    const origin = this.origin();
    const center = unproject(
      origin.x + this.tileCanvas.width / 2 - dx,
      origin.y + this.tileCanvas.height / 2 - dy,
      this.view.zoom,
    );
    this.setView({ centerLat: center.lat, centerLon: center.lon });
  }

  private redrawTiles(): void {
    const ctx = this.tileCanvas.getContext("2d");
    if (!ctx) return;
    ctx.fillStyle = "#b7d4e8";
    ctx.fillRect(0, 0, this.tileCanvas.width, this.tileCanvas.height);
    const zoom = this.view.zoom;
    const tileCount = worldSize(zoom) / TILE_SIZE;
    const origin = this.origin();
    const firstX = Math.floor(origin.x / TILE_SIZE);
    const firstY = Math.floor(origin.y / TILE_SIZE);
    const lastX = Math.floor((origin.x + this.tileCanvas.width) / TILE_SIZE);
    const lastY = Math.floor((origin.y + this.tileCanvas.height) / TILE_SIZE);
    for (let ty = firstY; ty <= lastY; ty++) {
      if (ty < 0 || ty >= tileCount) continue;
      for (let tx = firstX; tx <= lastX; tx++) {
        const wrappedX = ((tx % tileCount) + tileCount) % tileCount;
        const image = this.tileImage(zoom, wrappedX, ty);
        const dx = tx * TILE_SIZE - origin.x;
        const dy = ty * TILE_SIZE - origin.y;
        if (image.complete && image.naturalWidth > 0) {
          ctx.drawImage(image, dx, dy, TILE_SIZE, TILE_SIZE);
        }
      }
    }
  }

  private tileImage(z: number, x: number, y: number): HTMLImageElement {
    const key = `${z}/${x}/${y}`;
    let image = this.tiles.get(key);
    if (!image) {
      image = new Image();
      image.crossOrigin = "anonymous";
      image.src = this.options.tileUrlTemplate
        .replace("{z}", String(z))
        .replace("{x}", String(x))
        .replace("{y}", String(y));
      image.addEventListener("load", () => this.redrawTiles());
      this.tiles.set(key, image);
    }
    return image;
  }
}

function clampLat(lat: number): number {
  return Math.min(Math.max(lat, -MAX_LAT), MAX_LAT);
}

function wrapLon(lon: number): number {
  let wrapped = ((lon + 180) % 360 + 360) % 360 - 180;
  if (wrapped === -180 && lon > 0) wrapped = 180;
  return wrapped;
}
