"""Web-Mercator projection, PR quadtree over anchors, pick, marker clustering."""

from __future__ import annotations

import hashlib
import heapq
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence, Union

from shapely.geometry import Point as _ShapelyPoint
from shapely.geometry import Polygon as _ShapelyPolygon

from .errors import LatOutOfRange
from .model import LatLon, RateKind, RegionId, RegionValues, VariableKind

MAX_MERCATOR_LAT = 85.05112878
EARTH_RADIUS_KM = 6371.0088
TILE_SIZE = 256

# Clustering runs a deterministic merge chain from this zoom down to the
# requested one, so zooming in can only ever split clusters.
_CHAIN_TOP_ZOOM = 30

# Leaves may hold multiple points below this depth (floating-point guard;
# deterministic jitter keeps real data far above it).
_MAX_DEPTH = 50


def unit_xy(lat: float, lon: float) -> tuple[float, float]:
    """Project to Web-Mercator unit space: x, y in [0, 1], y growing south."""
    if abs(lat) > MAX_MERCATOR_LAT:
        raise LatOutOfRange(f"|{lat}| > {MAX_MERCATOR_LAT}")
    x = (lon + 180.0) / 360.0
    phi = math.radians(lat)
    y = (1.0 - math.log(math.tan(math.pi / 4.0 + phi / 2.0)) / math.pi) / 2.0
    return x, y


def project(lat: float, lon: float, zoom: float) -> tuple[float, float]:
    """World pixel coordinates at a zoom level (256 * 2^zoom pixel world)."""
    x, y = unit_xy(lat, lon)
    world = TILE_SIZE * (2.0 ** zoom)
    return x * world, y * world


def _unit_y_to_lat(y: float) -> float:
    return math.degrees(math.atan(math.sinh(math.pi * (1.0 - 2.0 * y))))


def central_angle(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle central angle in radians (haversine form)."""
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = phi2 - phi1
    dlam = math.radians(lon2 - lon1)
    h = math.sin(dphi / 2.0) ** 2 + \
        math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * math.asin(min(1.0, math.sqrt(h)))


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    return EARTH_RADIUS_KM * central_angle(lat1, lon1, lat2, lon2)


class _Node:
    __slots__ = ("x0", "y0", "x1", "y1", "depth",
                 "lat_lo", "lat_hi", "lon_lo", "lon_hi", "children", "points")

    def __init__(self, x0: float, y0: float, x1: float, y1: float, depth: int):
        self.x0, self.y0, self.x1, self.y1 = x0, y0, x1, y1
        self.depth = depth
        # y grows south, so y0 (top edge) is the northern, larger latitude.
        self.lat_hi = math.radians(_unit_y_to_lat(y0))
        self.lat_lo = math.radians(_unit_y_to_lat(y1))
        self.lon_lo = math.radians(x0 * 360.0 - 180.0)
        self.lon_hi = math.radians(x1 * 360.0 - 180.0)
        self.children: Optional[list["_Node"]] = None
        self.points: list["_TreePoint"] = []


@dataclass(frozen=True)
class _TreePoint:
    key: RegionId
    lat: float
    lon: float
    x: float
    y: float


def _jitter(key: RegionId, attempt: int) -> tuple[float, float]:
    digest = hashlib.sha1(f"{key.path}:{attempt}".encode()).digest()
    a = int.from_bytes(digest[:4], "big") % 2001 - 1000
    b = int.from_bytes(digest[4:8], "big") % 2001 - 1000
    return a * 1e-9, b * 1e-9


class PRQuadtree:
    """Point-region quadtree over a fixed unit-square Mercator cell.

    Leaves hold at most one point, so the structure depends only on the point
    set, never on insertion order. Nearest-neighbor search is exact under
    great-circle distance: cells are visited best-first using a lower bound
    on the central angle from the query to the cell's lat/lon rectangle.
    """

    def __init__(self):
        self._root = _Node(0.0, 0.0, 1.0, 1.0, 0)
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def insert(self, key: RegionId, lat: float, lon: float) -> None:
        x, y = unit_xy(lat, lon)
        self._insert(self._root, _TreePoint(key, lat, lon, x, y))
        self._size += 1

    def _insert(self, node: _Node, point: _TreePoint) -> None:
        while node.children is not None:
            node = node.children[self._quadrant(node, point.x, point.y)]
        if not node.points or node.depth >= _MAX_DEPTH:
            node.points.append(point)
            return
        existing = node.points
        node.points = []
        self._subdivide(node)
        for other in existing:
            self._insert(node, other)
        self._insert(node, point)

    @staticmethod
    def _quadrant(node: _Node, x: float, y: float) -> int:
        xm = (node.x0 + node.x1) / 2.0
        ym = (node.y0 + node.y1) / 2.0
        return (1 if x >= xm else 0) + (2 if y >= ym else 0)

    @staticmethod
    def _subdivide(node: _Node) -> None:
        xm = (node.x0 + node.x1) / 2.0
        ym = (node.y0 + node.y1) / 2.0
        d = node.depth + 1
        node.children = [
            _Node(node.x0, node.y0, xm, ym, d),
            _Node(xm, node.y0, node.x1, ym, d),
            _Node(node.x0, ym, xm, node.y1, d),
            _Node(xm, ym, node.x1, node.y1, d),
        ]

    def points(self) -> Iterator[_TreePoint]:
        stack = [self._root]
        while stack:
            node = stack.pop()
            if node.children is not None:
                stack.extend(node.children)
            else:
                yield from node.points

    def nearest(self, lat: float, lon: float,
                predicate: Optional[Callable[[RegionId], bool]] = None,
                ) -> Optional[tuple[RegionId, float]]:
        """Closest point (great-circle) passing the predicate, ties by key.

        Returns (key, distance_km) or None when nothing qualifies.
        """
        if self._size == 0:
            return None
        qlat_r = math.radians(lat)
        qlon_r = math.radians(lon)
        sin_q, cos_q = math.sin(qlat_r), math.cos(qlat_r)
        best_angle = math.inf
        best_key: Optional[RegionId] = None
        counter = 0
        heap: list[tuple[float, int, _Node]] = [(0.0, counter, self._root)]
        while heap:
            bound, _, node = heapq.heappop(heap)
            if bound > best_angle:
                break
            if node.children is None:
                for point in node.points:
                    if predicate is not None and not predicate(point.key):
                        continue
                    angle = central_angle(lat, lon, point.lat, point.lon)
                    if angle < best_angle or \
                            (angle == best_angle and best_key is not None
                             and point.key < best_key):
                        best_angle, best_key = angle, point.key
                continue
            for child in node.children:
                if child.children is None and not child.points:
                    continue
                counter += 1
                child_bound = _min_angle_to_rect(
                    qlat_r, qlon_r, sin_q, cos_q,
                    child.lat_lo, child.lat_hi, child.lon_lo, child.lon_hi)
                if child_bound <= best_angle:
                    heapq.heappush(heap, (child_bound, counter, child))
        if best_key is None:
            return None
        return best_key, best_angle * EARTH_RADIUS_KM

    def structure_signature(self):
        """Canonical nested tuple of the tree, for order-independence checks."""
        def visit(node: _Node):
            if node.children is not None:
                return ("node", tuple(visit(c) for c in node.children))
            return ("leaf", tuple(sorted((p.key.path, p.x, p.y) for p in node.points)))
        return visit(self._root)

    def validate(self) -> None:
        def visit(node: _Node):
            if node.children is not None:
                assert not node.points
                for child in node.children:
                    visit(child)
                return
            if node.depth < _MAX_DEPTH:
                assert len(node.points) <= 1
            for p in node.points:
                assert node.x0 <= p.x <= node.x1 and node.y0 <= p.y <= node.y1
        visit(self._root)


def _min_angle_to_rect(qlat: float, qlon: float, sin_q: float, cos_q: float,
                       lat_lo: float, lat_hi: float,
                       lon_lo: float, lon_hi: float) -> float:
    """Lower bound (exact up to rounding) on the central angle from a query
    point to any point of a lat/lon rectangle; all arguments in radians."""
    if lon_lo <= qlon <= lon_hi:
        if lat_lo <= qlat <= lat_hi:
            return 0.0
        angle = lat_lo - qlat if qlat < lat_lo else qlat - lat_hi
        return max(0.0, angle - 1e-12)
    # Outside in longitude: the closest rectangle point lies on the nearer
    # boundary meridian; minimize over its latitude segment analytically.
    two_pi = 2.0 * math.pi
    d_lo = abs(qlon - lon_lo) % two_pi
    d_lo = min(d_lo, two_pi - d_lo)
    d_hi = abs(qlon - lon_hi) % two_pi
    d_hi = min(d_hi, two_pi - d_hi)
    dlam = min(d_lo, d_hi)
    a = sin_q
    b = cos_q * math.cos(dlam)
    peak = math.atan2(a, b)
    best = -1.0
    for phi in (lat_lo, lat_hi, min(max(peak, lat_lo), lat_hi)):
        g = a * math.sin(phi) + b * math.cos(phi)
        if g > best:
            best = g
    angle = math.acos(min(1.0, max(-1.0, best)))
    return max(0.0, angle - 1e-12)


def build_tree(anchors: Iterable[tuple[RegionId, float, float]]) -> PRQuadtree:
    """Build a PR quadtree; exactly coincident anchors get a deterministic
    sub-millimeter jitter so every leaf ends up with one point."""
    tree = PRQuadtree()
    occupied: set[tuple[float, float]] = set()
    for key, lat, lon in sorted(anchors, key=lambda a: a[0]):
        attempt = 0
        jlat, jlon = lat, lon
        while (jlat, jlon) in occupied:
            attempt += 1
            dlat, dlon = _jitter(key, attempt)
            jlat = min(max(lat + dlat, -MAX_MERCATOR_LAT), MAX_MERCATOR_LAT)
            jlon = min(max(lon + dlon, -180.0), 180.0)
        occupied.add((jlat, jlon))
        tree.insert(key, jlat, jlon)
    return tree


@dataclass(frozen=True)
class PickCandidate:
    """What pick needs to know about one displayed region."""
    nonzero: bool
    boundary: Optional[tuple[LatLon, ...]] = None


def _polygon_covers(boundary: Sequence[LatLon], lat: float, lon: float) -> bool:
    if len(boundary) < 3:
        return False
    polygon = _ShapelyPolygon([(p.lon, p.lat) for p in boundary])
    return polygon.covers(_ShapelyPoint(lon, lat))


def pick(tree: PRQuadtree, candidates: Mapping[RegionId, PickCandidate],
         lat: float, lon: float) -> Optional[RegionId]:
    """Containment-first pick: the region whose polygon contains the query
    wins if it has any nonzero value; otherwise the nearest nonzero anchor;
    None when every displayed value is zero."""
    containing = [region_id for region_id in sorted(candidates)
                  if candidates[region_id].boundary is not None
                  and _polygon_covers(candidates[region_id].boundary, lat, lon)]
    if len(containing) == 1 and candidates[containing[0]].nonzero:
        return containing[0]
    hit = tree.nearest(
        lat, lon,
        predicate=lambda rid: rid in candidates and candidates[rid].nonzero)
    return hit[0] if hit else None


@dataclass(frozen=True)
class ClusterNode:
    """Aggregated group of nearby frame entries with conserved totals."""

    members: tuple[RegionId, ...]
    anchor_member: RegionId
    label: str
    lat: float
    lon: float
    variables: dict[VariableKind, float]
    rates: dict[RateKind, float]
    totals: dict[VariableKind, int]
    population: Optional[int]

    @property
    def all_zero(self) -> bool:
        return all(v == 0 for v in self.variables.values()) and \
            all(v == 0 for v in self.rates.values())


PrimarySeries = Union[VariableKind, RateKind, None]
RateFn = Callable[[Mapping[VariableKind, int], Optional[int]], dict[RateKind, float]]


class _Cluster:
    __slots__ = ("entries", "anchor", "primary", "ux", "uy")

    def __init__(self, entry: RegionValues, primary_value: float,
                 ux: float, uy: float):
        self.entries = [entry]
        self.anchor = entry
        self.primary = primary_value
        self.ux = ux
        self.uy = uy


def _primary_value(entry: RegionValues, primary: PrimarySeries) -> float:
    if isinstance(primary, VariableKind):
        return entry.variables.get(primary, 0)
    if isinstance(primary, RateKind):
        return entry.rates.get(primary, 0)
    return 0.0


def _absorb(winner: _Cluster, loser: _Cluster) -> None:
    winner.entries.extend(loser.entries)
    if loser.primary > winner.primary or \
            (loser.primary == winner.primary
             and loser.anchor.region < winner.anchor.region):
        winner.anchor = loser.anchor
        winner.primary = loser.primary
        winner.ux, winner.uy = loser.ux, loser.uy


def _agglomerate(clusters: list[_Cluster], zoom: int,
                 pixel_radius: float) -> list[_Cluster]:
    """One greedy pass in descending primary order: join the nearest open
    cluster within pixel_radius at this zoom, else open a new one."""
    world = TILE_SIZE * (2.0 ** zoom)
    order = sorted(range(len(clusters)),
                   key=lambda i: (-clusters[i].primary, clusters[i].anchor.region))
    accepted: list[_Cluster] = []
    if pixel_radius == 0:
        exact: dict[tuple[float, float], _Cluster] = {}
        for i in order:
            item = clusters[i]
            host = exact.get((item.ux, item.uy))
            if host is not None:
                _absorb(host, item)
            else:
                exact[(item.ux, item.uy)] = item
                accepted.append(item)
        return accepted

    cell_w = pixel_radius / world
    grid: dict[tuple[int, int], list[int]] = {}
    for i in order:
        item = clusters[i]
        cx, cy = int(item.ux // cell_w), int(item.uy // cell_w)
        best = None
        for gx in (cx - 1, cx, cx + 1):
            for gy in (cy - 1, cy, cy + 1):
                for idx in grid.get((gx, gy), ()):
                    host = accepted[idx]
                    dx = (host.ux - item.ux) * world
                    dy = (host.uy - item.uy) * world
                    dist = math.hypot(dx, dy)
                    if dist <= pixel_radius and (best is None or dist < best[0]):
                        best = (dist, idx)
        if best is not None:
            host = accepted[best[1]]
            old_cell = (int(host.ux // cell_w), int(host.uy // cell_w))
            _absorb(host, item)
            new_cell = (int(host.ux // cell_w), int(host.uy // cell_w))
            if new_cell != old_cell:
                grid[old_cell].remove(best[1])
                grid.setdefault(new_cell, []).append(best[1])
        else:
            grid.setdefault((cx, cy), []).append(len(accepted))
            accepted.append(item)
    return accepted


def _cap(clusters: list[_Cluster], max_markers: int) -> list[_Cluster]:
    """Merge the two nearest clusters until at most max_markers remain.

    Distances compare in unit space, which preserves pixel ordering at every
    zoom, so the merge sequence itself is zoom-independent.
    """
    alive = list(range(len(clusters)))
    while len(alive) > max_markers:
        best = None
        for ai in range(len(alive)):
            for bi in range(ai + 1, len(alive)):
                i, j = alive[ai], alive[bi]
                d = math.hypot(clusters[i].ux - clusters[j].ux,
                               clusters[i].uy - clusters[j].uy)
                if best is None or d < best[0]:
                    best = (d, ai, bi)
        _, ai, bi = best
        _absorb(clusters[alive[ai]], clusters[alive[bi]])
        del alive[bi]
    return [clusters[i] for i in alive]


def _finalize(cluster_: _Cluster, rate_fn: Optional[RateFn]) -> ClusterNode:
    entries = cluster_.entries
    members = tuple(sorted(e.region for e in entries))
    variables: dict[VariableKind, float] = {}
    for entry in entries:
        for var, value in entry.variables.items():
            variables[var] = variables.get(var, 0) + value
    totals: dict[VariableKind, int] = {}
    for var in VariableKind:
        if all(var in e.totals for e in entries):
            totals[var] = sum(e.totals[var] for e in entries)
    population: Optional[int] = None
    if all(e.population is not None for e in entries):
        population = sum(e.population for e in entries)
    anchor = cluster_.anchor
    label = anchor.display_name + ("; etc." if len(entries) > 1 else "")
    return ClusterNode(
        members=members,
        anchor_member=anchor.region,
        label=label,
        lat=anchor.anchor.lat,
        lon=anchor.anchor.lon,
        variables=variables,
        rates=rate_fn(totals, population) if rate_fn is not None else {},
        totals=totals,
        population=population,
    )


def cluster(entries: Sequence[RegionValues], zoom: int,
            pixel_radius: float = 60.0,
            max_markers: Optional[int] = None,
            primary: PrimarySeries = None,
            rate_fn: Optional[RateFn] = None) -> list[ClusterNode]:
    """Total-conserving greedy clustering of frame entries.

    The greedy pass runs as a merge chain from a fixed top zoom down to the
    requested one, so for fixed parameters every cluster at zoom z+1 is a
    subset of exactly one cluster at zoom z (zooming in only splits). Rates
    are recomputed from summed raw inputs via rate_fn, never averaged.
    """
    if pixel_radius < 0:
        raise ValueError("pixel_radius must be >= 0")
    if max_markers is not None and max_markers < 1:
        raise ValueError("max_markers must be >= 1")
    working = []
    for entry in entries:
        ux, uy = unit_xy(entry.anchor.lat, entry.anchor.lon)
        working.append(_Cluster(entry, _primary_value(entry, primary), ux, uy))

    capping = max_markers is not None and len(working) > max_markers
    if pixel_radius == 0 and not capping:
        chain = [zoom]
    else:
        top = _chain_start(working, zoom, pixel_radius) if not capping \
            else max(_CHAIN_TOP_ZOOM, zoom)
        chain = range(top, zoom - 1, -1)
    for z in chain:
        working = _agglomerate(working, z, pixel_radius)
        if max_markers is not None and len(working) > max_markers:
            working = _cap(working, max_markers)
    nodes = [_finalize(c, rate_fn) for c in working]
    nodes.sort(key=lambda n: n.anchor_member)
    return nodes


def _chain_start(working: Sequence[_Cluster], zoom: int, pixel_radius: float) -> int:
    """Highest zoom at which any merge is possible; levels above it are
    provably no-ops, so the chain may start there."""
    top = max(_CHAIN_TOP_ZOOM, zoom)
    if pixel_radius == 0 or len(working) < 2:
        return zoom
    min_d = math.inf
    for i in range(len(working)):
        for j in range(i + 1, len(working)):
            d = math.hypot(working[i].ux - working[j].ux,
                           working[i].uy - working[j].uy)
            if d < min_d:
                min_d = d
    if min_d == 0:
        return top
    limit = math.log2(pixel_radius / (TILE_SIZE * min_d))
    return max(zoom, min(top, math.floor(limit)))
