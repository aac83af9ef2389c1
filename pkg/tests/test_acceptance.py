"""Acceptance criteria, one test per criterion at its stated tolerance.

Run with ``pytest -s tests/test_acceptance.py`` to see one pass/fail line per
criterion with its elapsed time.
"""

from __future__ import annotations

import contextlib
import json
import math
import random
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from conftest import EPOCH, load_jhu_dataset, random_dataset
from geocircles.cli import main as cli_main
from geocircles.ingest import parse_timeseries_csv
from geocircles.model import (
    LatLon,
    Level,
    RateKind,
    RegionId,
    RegionValues,
    ScalingMethod,
    ScalingSpec,
    TimeWindow,
    VariableKind,
)
from geocircles.query import (
    Aggregation,
    Mode,
    QuerySpec,
    build_pyramid,
    evaluate_frame,
    rate_value,
    threshold_query,
    window_value,
)
from geocircles.scaling import FLANNERY_EXPONENT, radius
from geocircles.server import create_app
from geocircles.service import SnapshotState, build_frame_payload, dump_json
from geocircles.snapshot import save_snapshot
from geocircles.spatial import EARTH_RADIUS_KM, PickCandidate, build_tree, cluster, pick

C, D, R = VariableKind.CONFIRMED, VariableKind.DEATHS, VariableKind.RECOVERED


@contextlib.contextmanager
def criterion(name: str, limit_seconds: float):
    started = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    elapsed = time.monotonic() - started
    assert elapsed < limit_seconds, \
        f"{name}: {elapsed:.2f}s exceeds {limit_seconds}s budget"
    print(f"[PASS] {name} ({elapsed:.2f}s)")


@pytest.fixture(scope="module")
def fixtures100():
    """100 random fixtures, each at most 10 regions by 64 days."""
    return [random_dataset(seed=1000 + i, n_regions=(i % 10) + 1, n_days=64)
            for i in range(100)]


def test_one_day_window_identity(fixtures100):
    with criterion("one-day-window identity (cumulative == daily average)", 1.0):
        for dataset in fixtures100:
            for region in dataset.regions_at(Level.COUNTRY):
                for day in range(dataset.calendar.n_days):
                    window = TimeWindow(day, day)
                    cumulative = window_value(dataset, region.id, C, window)
                    average = window_value(dataset, region.id, C, window,
                                           Aggregation.DAILY_AVERAGE)
                    assert cumulative == average


def test_flannery_law():
    with criterion("Flannery power law, 1e-9 relative", 1.0):
        spec = ScalingSpec(method=ScalingMethod.FLANNERY, base_radius_px=13.0,
                           reference_value=97.0, user_factor=1.7,
                           r_min_px=1e-12, r_max_px=1e12)
        rng = random.Random(570)
        for _ in range(1000):
            v = rng.uniform(1e-3, 1e7)
            w = rng.uniform(1e-3, 1e7)
            ratio = radius(v, spec) / radius(w, spec)
            expected = (v / w) ** FLANNERY_EXPONENT
            assert abs(ratio - expected) <= 1e-9 * abs(expected)


def test_argmax_invariance_under_user_factor():
    with criterion("argmax invariance of unclamped radii under user factor", 1.0):
        rng = random.Random(81)
        for _ in range(100):
            values = [rng.uniform(0.001, 1e6) for _ in range(rng.randrange(2, 30))]
            for method in ScalingMethod:
                orderings = []
                for factor in (0.1, 1.0, 8.0):
                    spec = ScalingSpec(method=method, base_radius_px=10.0,
                                       reference_value=max(values),
                                       user_factor=factor,
                                       r_min_px=1e-12, r_max_px=1e12)
                    radii = [radius(v, spec) for v in values]
                    orderings.append(sorted(range(len(values)),
                                            key=lambda i: (radii[i], i)))
                assert orderings[0] == orderings[1] == orderings[2]


def _random_frame(rng, n):
    entries = []
    for i in range(n):
        value = rng.randrange(0, 10_000)
        entries.append(RegionValues(
            region=RegionId(f"e{i:03d}"), display_name=f"E{i:03d}",
            anchor=LatLon(rng.uniform(-70, 70), rng.uniform(-170, 170)),
            variables={C: value, D: rng.randrange(0, 500)},
            rates={}, totals={C: value}, population=rng.randrange(1, 10**7)))
    return entries


def test_cluster_conservation_and_refinement():
    with criterion("cluster conservation + monotone refinement", 5.0):
        rng = random.Random(35)
        for trial in range(100):
            entries = _random_frame(rng, rng.randrange(2, 21))
            for pixel_radius in (0.0, 40.0, 2000.0):
                for max_markers in (None, 5):
                    zoom = rng.randrange(0, 9)
                    nodes = cluster(entries, zoom=zoom, pixel_radius=pixel_radius,
                                    max_markers=max_markers, primary=C)
                    for var in (C, D):
                        assert sum(n.variables[var] for n in nodes) == \
                            sum(e.variables[var] for e in entries)
                    members = sorted(m for n in nodes for m in n.members)
                    assert members == sorted(e.region for e in entries)
                    if max_markers is not None:
                        assert len(nodes) <= max_markers

            # Monotone refinement: zooming in only splits, never merges.
            for max_markers in (None, 4):
                previous = None
                for zoom in range(7, -1, -1):
                    nodes = cluster(entries, zoom=zoom, pixel_radius=70.0,
                                    max_markers=max_markers, primary=C)
                    partition = {m: tuple(n.members) for n in nodes
                                 for m in n.members}
                    if previous is not None:
                        # previous is the finer (higher) zoom
                        for node_members in set(previous.values()):
                            hosts = {partition[m] for m in node_members}
                            assert len(hosts) == 1
                    previous = partition


def test_pr_quadtree_nearest_equals_brute_force():
    with criterion("PR quadtree NN == linear scan, 1000 x 1000", 5.0):
        rng = random.Random(1000)
        ids = [RegionId(f"p{i:04d}") for i in range(1000)]
        anchors = [(ids[i], rng.uniform(-80, 80), rng.uniform(-179.9, 179.9))
                   for i in range(1000)]
        tree = build_tree(anchors)
        lats = np.array([a[1] for a in anchors])
        lons = np.array([a[2] for a in anchors])
        rad_lats = np.radians(lats)
        rad_lons = np.radians(lons)
        for _ in range(1000):
            qlat, qlon = rng.uniform(-85, 85), rng.uniform(-180, 180)
            phi1 = math.radians(qlat)
            h = np.sin((rad_lats - phi1) / 2) ** 2 + \
                math.cos(phi1) * np.cos(rad_lats) * \
                np.sin((rad_lons - math.radians(qlon)) / 2) ** 2
            distances = 2 * EARTH_RADIUS_KM * np.arcsin(np.minimum(1.0, np.sqrt(h)))
            best = int(np.argmin(distances))
            if np.count_nonzero(distances == distances[best]) > 1:
                best = min((i for i in range(1000)
                            if distances[i] == distances[best]),
                           key=lambda i: ids[i])
            got, _ = tree.nearest(qlat, qlon)
            assert got == ids[best]


def test_pick_containment_rule():
    with criterion("pick containment beats nearer anchor", 1.0):
        # Query (9.9, 0) is inside big's polygon; near's anchor is only
        # ~0.6 degrees away while big's anchor is ~9.9 degrees away.
        big = RegionId("bigland")
        near = RegionId("nearland")
        far = RegionId("farland")
        boundary = (LatLon(-10, -10), LatLon(-10, 10), LatLon(10, 10),
                    LatLon(10, -10))
        candidates = {
            big: PickCandidate(nonzero=True, boundary=boundary),
            near: PickCandidate(nonzero=True),
            far: PickCandidate(nonzero=True),
        }
        tree = build_tree([(big, 0.0, 0.0), (near, 10.5, 0.0), (far, 40.0, 40.0)])
        assert pick(tree, candidates, 9.9, 0.0) == big
        # Sanity: without the polygon the nearer anchor wins.
        no_boundary = {key: PickCandidate(nonzero=True) for key in candidates}
        assert pick(tree, no_boundary, 9.9, 0.0) == near


def test_threshold_equals_exhaustive_scan(fixtures100):
    with criterion("threshold query == exhaustive scan + pruning bound", 5.0):
        rng = random.Random(64)
        for i, dataset in enumerate(fixtures100):
            wsize = (1, 7, 16, 64)[i % 4]
            temporal = TimeWindow(0, 63)
            regions = dataset.regions_at(Level.COUNTRY)
            sample_windows = [TimeWindow(end - wsize + 1, end)
                              for end in range(wsize - 1, 64)]
            all_values = [window_value(dataset, r.id, C, w)
                          for r in regions for w in sample_windows]
            value = sorted(all_values)[len(all_values) // 2]

            expected: dict[RegionId, list] = {}
            scanned = 0
            for region in regions:
                for window in sample_windows:
                    candidate = window_value(dataset, region.id, C, window)
                    scanned += 1
                    if candidate >= value:
                        expected.setdefault(region.id, []).append(
                            dataset.calendar.date_at(window.end_day))

            pyramid = build_pyramid(dataset, C, Level.COUNTRY)
            result = threshold_query(dataset, pyramid, C, "ge", value,
                                     Level.COUNTRY, None, temporal, wsize)
            assert result.matches == sorted(expected.items())
            assert result.evaluated <= scanned


def test_rate_formulas():
    with criterion("rate formulas: incidence, mortality, recovery", 1.0):
        from conftest import table_from_rows, country
        from geocircles.ingest import build_dataset
        from geocircles.model import Calendar
        calendar = Calendar(EPOCH, 1)
        dataset = build_dataset(
            [table_from_rows(C, calendar, [(country("x", 10, 10), [2500])])],
            {RegionId("x"): 500_000})
        assert rate_value(dataset, RegionId("x"), RateKind.INCIDENCE,
                          TimeWindow(0, 0)) == 500.0

        dataset_m = build_dataset([
            table_from_rows(C, calendar, [(country("x", 10, 10), [200])]),
            table_from_rows(D, calendar, [(country("x", 10, 10), [10])]),
        ])
        assert rate_value(dataset_m, RegionId("x"), RateKind.MORTALITY,
                          TimeWindow(0, 0)) == 0.05

        # Recovery has a zero denominator when deaths and recoveries are 0.
        dataset_r = build_dataset([
            table_from_rows(C, calendar, [(country("x", 10, 10), [5])]),
            table_from_rows(D, calendar, [(country("x", 10, 10), [0])]),
            table_from_rows(R, calendar, [(country("x", 10, 10), [0])]),
        ])
        assert rate_value(dataset_r, RegionId("x"), RateKind.RECOVERY,
                          TimeWindow(0, 0)) is None


def test_ingest_round_trip(jhu_dir):
    with criterion("ingest round-trip: monotone, finals preserved, 1 adjustment", 1.0):
        dataset = load_jhu_dataset(jhu_dir)
        assert dataset.report.adjusted_cells == 1
        raw_finals = {}
        for name, variable in (("confirmed", C), ("deaths", D), ("recovered", R)):
            table = parse_timeseries_csv((jhu_dir / f"{name}.csv").read_bytes(),
                                         variable)
            for region, raw in table.rows:
                raw_finals[(region.id, variable)] = raw[-1]
        for (region_id, variable), final in raw_finals.items():
            cleaned = dataset.series_for(region_id, variable).cumulative
            assert cleaned[-1] == final
            assert np.all(np.diff(cleaned) >= 0)


def test_total_final_frame_equals_maximum_window(jhu_dir, fixtures100):
    with criterion("Total-mode final frame == Maximum-window frame (bytes)", 1.0):
        cases = [load_jhu_dataset(jhu_dir)] + fixtures100[:10]
        for dataset in cases:
            state = SnapshotState(dataset)
            base = {"vars": "confirmed,deaths", "rates": "mortality",
                    "cluster_px": "40", "zoom": "3"}
            total = build_frame_payload(state, {**base, "mode": "total"})
            maxwin = build_frame_payload(state, {**base, "mode": "window",
                                                 "window": "max"})
            assert dump_json(total["entries"]) == dump_json(maxwin["entries"])


def test_cli_api_parity(jhu_dir, tmp_path, capsys):
    with criterion("CLI/API parity: byte-identical bodies", 5.0):
        snapshot_dir = tmp_path / "snapshot"
        save_snapshot(load_jhu_dataset(jhu_dir), snapshot_dir)
        app = create_app(SnapshotState(load_jhu_dataset(jhu_dir)))

        matrix = [
            ("frame", "/api/frame", {}),
            ("frame", "/api/frame", {"vars": "confirmed", "rates": "",
                                     "cluster_px": "0"}),
            ("frame", "/api/frame", {"mode": "window", "window": "2",
                                     "agg": "daily_avg", "date": "2020-01-25",
                                     "vars": "confirmed,deaths",
                                     "rates": "incidence,mortality",
                                     "zoom": "4", "scale_method": "log",
                                     "scale_factor": "confirmed:2.0"}),
            ("series", "/api/series", {"focus": "israel", "baseline": "sweden",
                                       "window": "2", "vars": "confirmed",
                                       "rates": "mortality"}),
            ("threshold", "/api/threshold", {"metric": "confirmed", "op": "ge",
                                             "value": "6", "window": "1"}),
            ("threshold", "/api/threshold", {"metric": "incidence", "op": "le",
                                             "value": "0.1"}),
        ]
        with TestClient(app) as client:
            for command, endpoint, params in matrix:
                api_body = client.get(endpoint, params=params).content
                argv = ["query", "--snapshot", str(snapshot_dir), command]
                for key, value in params.items():
                    argv += [f"--{key.replace('_', '-')}", value]
                code = cli_main(argv)
                out = capsys.readouterr().out
                assert code == 0
                assert out.encode() == api_body, f"mismatch for {params}"
