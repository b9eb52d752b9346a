from __future__ import annotations

import io
import math

import numpy as np
import pytest

from adsbfuel.emissions import CSV_HEADER, EmissionGrid, GridSpec, export_csv, export_text, grid_flight, import_csv, merge
from adsbfuel.errors import SpanMismatch, SpecMismatch
from adsbfuel.monotone import FuelSeries, build_curve, eval_curve
from adsbfuel.trajectory import FlightTrack


def hold_track(duration=600.0, lat=30.0, lon=120.0, alt=8500.0) -> FlightTrack:
    t = np.arange(0.0, duration + 1, 10.0)
    n = len(t)
    return FlightTrack(t, np.full(n, lat), np.full(n, lon), np.full(n, alt), np.full(n, 200.0))


def wandering_track(rng, duration=1800.0, t0=0.0) -> FlightTrack:
    t = t0 + np.arange(0.0, duration + 1, 10.0)
    n = len(t)
    lat = 30.0 + np.cumsum(rng.normal(0, 0.02, n))
    lon = 120.0 + np.cumsum(rng.normal(0, 0.02, n))
    alt = np.abs(6000.0 + np.cumsum(rng.normal(0, 150.0, n)))
    return FlightTrack(t, lat, lon, alt, np.full(n, 200.0))


def curve_for(track: FlightTrack, rng, step=200.0):
    span = track.duration
    T = np.unique(np.r_[np.arange(0.0, span, step), span])
    Q = np.r_[0.0, np.cumsum(rng.uniform(0.5, 1.5, len(T) - 1) * np.diff(T))]
    return build_curve(FuelSeries(T, Q))


def test_hold_lands_in_one_cell(rng):
    tr = hold_track()
    c = curve_for(tr, rng)
    g = grid_flight(tr, c)
    assert list(g.as_dict()) == [(90, 363, 8)]
    assert (math.floor(30.0 / 0.33), math.floor(120.0 / 0.33)) == (90, 363)
    assert g.total() == pytest.approx(3.16 * eval_curve(c, tr.duration), rel=1e-12)


def test_conservation(rng):
    for _ in range(5):
        tr = wandering_track(rng)
        c = curve_for(tr, rng)
        g = grid_flight(tr, c)
        Q0, Q1 = eval_curve(c, [0.0, tr.duration])
        assert g.total() == pytest.approx(3.16 * (Q1 - Q0), rel=1e-9)
        assert len(g) > 1
        assert all(v >= 0 for v in g.as_dict().values())


def test_track_not_starting_at_zero(rng):
    tr = wandering_track(rng, t0=5000.0)
    g = grid_flight(tr, curve_for(tr, rng))
    assert g.total() > 0


def test_midpoint_assignment():
    # crossing from layer 0 to layer 1 at t = 100.5 s in a linear climb
    t = np.array([0.0, 201.0])
    tr = FlightTrack(t, np.full(2, 30.0), np.full(2, 120.0), np.array([0.0, 2010.0]), np.full(2, 100.0))
    c = build_curve(FuelSeries([0.0, 100.0, 201.0], [0.0, 100.0, 201.0]))
    d = grid_flight(tr, c, GridSpec(emission_factor=1.0)).as_dict()
    # sub-step midpoints k + 0.5 sit at altitude 10 (k + 0.5); 100 of them below 1000 m
    assert d[(90, 363, 0)] == pytest.approx(100.0, rel=1e-12)
    assert d[(90, 363, 1)] == pytest.approx(100.0, rel=1e-12)
    assert d[(90, 363, 2)] == pytest.approx(1.0, rel=1e-12)


def test_negative_altitude_and_longitude_wrap():
    spec = GridSpec()
    idx = spec.indices([10.0, 10.0], [179.9, 180.0], [-50.0, 10.0])
    assert idx[0, 2] == 0 and idx[1, 2] == 0
    assert idx[1, 1] == math.floor(-180.0 / 0.33)
    assert idx[0, 1] == math.floor(179.9 / 0.33)


def test_span_mismatch(rng):
    tr = hold_track(600.0)
    with pytest.raises(SpanMismatch):
        grid_flight(tr, curve_for(hold_track(800.0), rng))


def test_merge_properties(rng):
    grids = [grid_flight(tr, curve_for(tr, rng)) for tr in (wandering_track(rng) for _ in range(3))]
    a, b, c = grids
    empty = EmissionGrid(GridSpec())
    assert merge([a, empty]).equals(a)
    assert merge([a, b]).equals(merge([b, a]))
    assert merge([merge([a, b]), c]).equals(merge([a, merge([b, c])]))
    assert merge([a, b, c]).total() == pytest.approx(a.total() + b.total() + c.total(), rel=1e-12)
    with pytest.raises(SpecMismatch):
        merge([a, EmissionGrid(GridSpec(cell_deg=0.5))])


def test_merge_equals_joint_gridding(rng):
    # gridding two flights "together" means accumulating every sub-step of
    # both into one grid; merging per-flight grids must give the same cells
    tracks = [wandering_track(rng) for _ in range(2)]
    curves = [curve_for(tr, rng) for tr in tracks]
    separate = merge([grid_flight(tr, c) for tr, c in zip(tracks, curves)])
    joint = EmissionGrid(GridSpec())
    spec = joint.spec
    for tr, c in zip(tracks, curves):
        edges = np.r_[np.arange(0.0, tr.duration, 1.0), tr.duration]
        mass = spec.emission_factor * np.diff(eval_curve(c, edges))
        mid = 0.5 * (edges[1:] + edges[:-1])
        idx = spec.indices(np.interp(mid, tr.t, tr.lat), np.interp(mid, tr.t, tr.lon), np.interp(mid, tr.t, tr.alt))
        for key, m in zip(map(tuple, idx), mass):
            joint.add(key, [m])
    assert separate.equals(joint)


def test_csv_round_trip(rng):
    tr = wandering_track(rng)
    g = grid_flight(tr, curve_for(tr, rng))
    text = export_text(g)
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    keys = [tuple(int(x) for x in ln.split(",")[:3]) for ln in lines[1:]]
    assert keys == sorted(keys)
    back = import_csv(io.StringIO(text))
    assert back.equals(g)
    buf = io.StringIO()
    export_csv(back, buf)
    assert buf.getvalue() == text


def test_refinement_reaggregates_exactly(rng):
    for _ in range(3):
        tr = wandering_track(rng)
        c = curve_for(tr, rng)
        coarse = grid_flight(tr, c)
        fine = grid_flight(tr, c, coarse.spec.refined(2))
        assert len(fine) >= len(coarse)
        assert fine.coarsen(2).equals(coarse)


def test_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(cell_deg=0.0)
    with pytest.raises(ValueError):
        GridSpec(emission_factor=-1.0)


def test_flow_type_checked(rng):
    with pytest.raises(TypeError):
        grid_flight(hold_track(), object())
