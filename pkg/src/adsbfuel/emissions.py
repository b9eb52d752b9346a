"""Gridded CO2 inventory from flight tracks and fuel-flow curves.

Fuel burned in each 1 s sub-step is converted to CO2 with a configurable
emission factor and credited to the grid cell holding the sub-step midpoint.
Cells keep their contributions as exact floating-point expansions
(non-overlapping partials, as in ``math.fsum``), so merging grids and
re-aggregating a refined grid reproduce the coarse values bit for bit.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

from .errors import SpanMismatch, SpecMismatch
from .monotone import InstantaneousFlow, MonotoneCurve, eval_curve
from .trajectory import FlightTrack

CSV_HEADER = ("lat_idx", "lon_idx", "layer_idx", "lat_min", "lon_min", "alt_min", "co2_kg")
SUB_STEP = 1.0


@dataclass(frozen=True)
class GridSpec:
    cell_deg: float = 0.33
    layer_m: float = 1000.0
    emission_factor: float = 3.16

    def __post_init__(self):
        if not (self.cell_deg > 0 and self.layer_m > 0 and self.emission_factor > 0):
            raise ValueError("cell_deg, layer_m and emission_factor must be positive")

    def refined(self, k: int = 2) -> GridSpec:
        return GridSpec(self.cell_deg / k, self.layer_m, self.emission_factor)

    def indices(self, lat, lon, alt) -> np.ndarray:
        """``(n, 3)`` integer cell indices; negative altitudes go to layer 0."""
        lat = np.asarray(lat, dtype=float)
        lon = np.asarray(lon, dtype=float)
        alt = np.maximum(np.asarray(alt, dtype=float), 0.0)
        lon = (lon + 180.0) % 360.0 - 180.0
        return np.column_stack(
            [
                np.floor(lat / self.cell_deg),
                np.floor(lon / self.cell_deg),
                np.floor(alt / self.layer_m),
            ]
        ).astype(np.int64)


def _grow(partials: list[float], x: float) -> None:
    # Shewchuk's exact accumulation; partials stay non-overlapping
    i = 0
    for y in partials:
        if abs(x) < abs(y):
            x, y = y, x
        hi = x + y
        lo = y - (hi - x)
        if lo:
            partials[i] = lo
            i += 1
        x = hi
    partials[i:] = [x]


Key = tuple[int, int, int]


@dataclass(eq=False)
class EmissionGrid:
    spec: GridSpec
    cells: dict[Key, list[float]] = field(default_factory=dict)

    def add(self, key: Key, values: Iterable[float]) -> None:
        values = [float(v) for v in values]
        if any(v < 0 for v in values):
            raise ValueError("emitted mass must be non-negative")
        self._absorb(key, values)

    def _absorb(self, key: Key, partials: Iterable[float]) -> None:
        # partials of another cell may carry negative rounding terms
        acc = self.cells.setdefault(tuple(int(i) for i in key), [])
        for v in partials:
            _grow(acc, float(v))

    def value(self, key: Key) -> float:
        return math.fsum(self.cells.get(tuple(key), ()))

    def as_dict(self) -> dict[Key, float]:
        return {k: math.fsum(p) for k, p in sorted(self.cells.items())}

    def total(self) -> float:
        return math.fsum(x for p in self.cells.values() for x in p)

    def __len__(self) -> int:
        return len(self.cells)

    def equals(self, other: EmissionGrid) -> bool:
        return self.spec == other.spec and self.as_dict() == other.as_dict()

    def coarsen(self, k: int = 2) -> EmissionGrid:
        """Sum ``k x k`` horizontal blocks into a grid with ``k`` times the cell size."""
        out = EmissionGrid(GridSpec(self.spec.cell_deg * k, self.spec.layer_m, self.spec.emission_factor))
        for (i, j, layer), partials in sorted(self.cells.items()):
            out._absorb((i // k, j // k, layer), partials)
        return out


def _cumulative(flow) -> MonotoneCurve:
    if isinstance(flow, InstantaneousFlow):
        return flow.curve
    if isinstance(flow, MonotoneCurve):
        return flow
    raise TypeError("flow must be a MonotoneCurve or InstantaneousFlow")


def grid_flight(track: FlightTrack, flow, spec: GridSpec | None = None) -> EmissionGrid:
    """Distribute a flight's CO2 over grid cells.

    ``flow`` is the cumulative-fuel curve of the track with time measured
    from the first track sample; its domain must match the track span.
    """
    spec = spec or GridSpec()
    curve = _cumulative(flow)
    lo, hi = curve.domain
    span = track.duration
    tol = 1e-9 * max(1.0, span)
    if abs(lo) > tol or abs(hi - span) > tol:
        raise SpanMismatch(f"curve covers [{lo:g}, {hi:g}] s, track spans [0, {span:g}] s")
    edges = np.arange(0.0, hi, SUB_STEP)
    edges = np.r_[edges, hi] if hi - edges[-1] > 0 else edges
    Q = eval_curve(curve, edges)
    mass = spec.emission_factor * np.diff(Q)
    mid = 0.5 * (edges[1:] + edges[:-1]) + track.t[0]
    idx = spec.indices(
        np.interp(mid, track.t, track.lat),
        np.interp(mid, track.t, track.lon),
        np.interp(mid, track.t, track.alt),
    )
    grid = EmissionGrid(spec)
    order = np.lexsort(idx.T[::-1])
    idx, mass = idx[order], mass[order]
    cuts = np.flatnonzero(np.any(np.diff(idx, axis=0) != 0, axis=1)) + 1
    for a, b in zip(np.r_[0, cuts], np.r_[cuts, len(mass)]):
        grid.add(tuple(idx[a]), mass[a:b].tolist())
    return grid


def merge(grids: Iterable[EmissionGrid], spec: GridSpec | None = None) -> EmissionGrid:
    """Cell-wise sum of grids sharing one spec."""
    grids = list(grids)
    if spec is None:
        if not grids:
            raise ValueError("merge of no grids needs an explicit spec")
        spec = grids[0].spec
    out = EmissionGrid(spec)
    for g in grids:
        if g.spec != spec:
            raise SpecMismatch(f"grid spec {g.spec} differs from {spec}")
        for key, partials in sorted(g.cells.items()):
            out._absorb(key, partials)
    return out


def export_csv(grid: EmissionGrid, sink: IO[str]) -> None:
    w = csv.writer(sink, lineterminator="\n")
    w.writerow(CSV_HEADER)
    s = grid.spec
    for (i, j, k), value in grid.as_dict().items():
        w.writerow([i, j, k, repr(i * s.cell_deg), repr(j * s.cell_deg), repr(k * s.layer_m), repr(value)])


def export_text(grid: EmissionGrid) -> str:
    buf = io.StringIO()
    export_csv(grid, buf)
    return buf.getvalue()


def import_csv(source: IO[str], spec: GridSpec | None = None) -> EmissionGrid:
    """Read an inventory written by :func:`export_csv`."""
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None or tuple(header) != CSV_HEADER:
        raise ValueError(f"expected header {','.join(CSV_HEADER)}")
    grid = EmissionGrid(spec or GridSpec())
    for row in reader:
        if not row:
            continue
        grid.add((int(row[0]), int(row[1]), int(row[2])), [float(row[6])])
    return grid
