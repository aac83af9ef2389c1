/** Web-Mercator math shared by the tile layer and the circle overlay. */

export const TILE_SIZE = 256;
export const MAX_LAT = 85.05112878;

export function worldSize(zoom: number): number {
  return TILE_SIZE * 2 ** zoom;
}

/** World pixel coordinates at a zoom level; y grows south. */
export function project(lat: number, lon: number, zoom: number): { x: number; y: number } {
  const size = worldSize(zoom);
  const x = ((lon + 180) / 360) * size;
  const phi = (lat * Math.PI) / 180;
  const y = ((1 - Math.log(Math.tan(Math.PI / 4 + phi / 2)) / Math.PI) / 2) * size;
  return { x, y };
}

export function unproject(x: number, y: number, zoom: number): { lat: number; lon: number } {
  const size = worldSize(zoom);
  const lon = (x / size) * 360 - 180;
  const n = Math.PI * (1 - (2 * y) / size);
  const lat = (Math.atan(Math.sinh(n)) * 180) / Math.PI;
  return { lat, lon };
}
