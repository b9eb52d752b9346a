"""Flight surveillance tracks: parsing, cleaning, slicing and evaluation.

Tracks are stored column-wise (``t, lat, lon, alt, gs``) in read-only numpy
arrays.  Units at the file boundary are seconds, degrees, meters and meters
per second.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

from .errors import EmptySlice, EmptyTrack, MalformedRecord, TooSparse

COLUMNS = ("t", "lat", "lon", "alt", "gs")

ALT_BOUNDS = (-500.0, 20000.0)
GS_BOUNDS = (0.0, 400.0)


@dataclass(frozen=True)
class TrackPoint:
    t: float
    lat: float
    lon: float
    alt: float
    gs: float


@dataclass(frozen=True)
class AircraftMeta:
    aircraft_type: str
    age: float
    wingspan: float

    def __post_init__(self):
        if not self.age >= 0:
            raise ValueError(f"age must be non-negative, got {self.age}")
        if not self.wingspan > 0:
            raise ValueError(f"wingspan must be positive, got {self.wingspan}")

    def to_dict(self) -> dict:
        return {"aircraft_type": self.aircraft_type, "age": self.age, "wingspan": self.wingspan}

    @classmethod
    def from_dict(cls, d: dict) -> AircraftMeta:
        return cls(str(d["aircraft_type"]), float(d["age"]), float(d["wingspan"]))


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class FlightTrack:
    """Time-ordered samples plus aircraft metadata.

    Construction only checks shape; ordering and physical bounds are the job
    of :func:`clean_track`.
    """

    t: np.ndarray
    lat: np.ndarray
    lon: np.ndarray
    alt: np.ndarray
    gs: np.ndarray
    meta: AircraftMeta | None = None
    flight_id: str | None = None

    def __post_init__(self):
        cols = [_frozen(getattr(self, c)) for c in COLUMNS]
        n = len(cols[0])
        if any(c.ndim != 1 or len(c) != n for c in cols):
            raise ValueError("track columns must be 1-D and of equal length")
        for name, col in zip(COLUMNS, cols):
            object.__setattr__(self, name, col)

    @classmethod
    def from_points(cls, points: Iterable[TrackPoint], meta=None, flight_id=None) -> FlightTrack:
        pts = list(points)
        cols = {c: [getattr(p, c) for p in pts] for c in COLUMNS}
        return cls(**cols, meta=meta, flight_id=flight_id)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def points(self) -> list[TrackPoint]:
        return [TrackPoint(*map(float, row)) for row in zip(*(getattr(self, c) for c in COLUMNS))]

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    def _take(self, mask_or_idx) -> FlightTrack:
        return FlightTrack(
            *(getattr(self, c)[mask_or_idx] for c in COLUMNS), meta=self.meta, flight_id=self.flight_id
        )

    def equals(self, other: FlightTrack) -> bool:
        return (
            self.meta == other.meta
            and len(self) == len(other)
            and all(np.array_equal(getattr(self, c), getattr(other, c)) for c in COLUMNS)
        )


@dataclass(frozen=True)
class CleaningConfig:
    max_climb_rate: float = 60.0
    min_points: int = 10
    alt_bounds: tuple[float, float] = ALT_BOUNDS
    gs_bounds: tuple[float, float] = GS_BOUNDS


@dataclass
class CleaningReport:
    duplicates: int = 0
    out_of_order: int = 0
    bounds: int = 0
    climb_rate: int = 0
    kept: int = 0

    @property
    def removed(self) -> int:
        return self.duplicates + self.out_of_order + self.bounds + self.climb_rate


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------


def _as_text(source) -> str:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source).decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data


def _parse_float(value, line: int, name: str) -> float:
    if value is None or value == "":
        raise MalformedRecord(line, f"missing field {name!r}")
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise MalformedRecord(line, f"cannot parse {name}={value!r}") from None
    if not math.isfinite(x):
        raise MalformedRecord(line, f"non-finite {name}={value!r}")
    return x


def parse_track(source, format: str = "csv", meta: AircraftMeta | None = None, flight_id=None) -> FlightTrack:
    """Parse a track from bytes, text or a file object.

    CSV files carry header ``t,lat,lon,alt,gs``; their metadata comes from
    ``meta`` (sidecar JSON or CLI flags).  JSONL files may open with a
    metadata object ``{"aircraft_type", "age", "wingspan"}`` which takes
    precedence over ``meta``.  Row order is preserved.
    """
    text = _as_text(source)
    rows: list[list[float]] = []
    if format == "csv":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is None:
            raise EmptyTrack("empty file")
        header = [h.strip() for h in header]
        if header[: len(COLUMNS)] != list(COLUMNS):
            raise MalformedRecord(1, f"expected header {','.join(COLUMNS)}, got {','.join(header)}")
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not f.strip() for f in rec):
                continue
            if len(rec) < len(COLUMNS):
                raise MalformedRecord(lineno, f"expected {len(COLUMNS)} fields, got {len(rec)}")
            rows.append([_parse_float(rec[i].strip(), lineno, c) for i, c in enumerate(COLUMNS)])
    elif format == "jsonl":
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(lineno, f"invalid JSON: {exc.msg}") from None
            if not isinstance(obj, dict):
                raise MalformedRecord(lineno, "expected a JSON object")
            if not rows and "aircraft_type" in obj and "t" not in obj:
                try:
                    meta = AircraftMeta.from_dict(obj)
                except (KeyError, TypeError, ValueError) as exc:
                    raise MalformedRecord(lineno, f"bad metadata: {exc}") from None
                flight_id = obj.get("flight_id", flight_id)
                continue
            rows.append([_parse_float(obj.get(c), lineno, c) for c in COLUMNS])
    else:
        raise ValueError(f"unknown track format {format!r}")

    if len(rows) < 2:
        raise EmptyTrack(f"track has {len(rows)} point(s); at least 2 required")
    arr = np.array(rows, dtype=float)
    return FlightTrack(*arr.T, meta=meta, flight_id=flight_id)


def write_track(track: FlightTrack, sink: IO[str], format: str = "csv") -> None:
    """Serialize ``track``; floats use ``repr`` so parsing round-trips exactly."""
    cols = [getattr(track, c) for c in COLUMNS]
    if format == "csv":
        sink.write(",".join(COLUMNS) + "\n")
        for row in zip(*cols):
            sink.write(",".join(repr(float(x)) for x in row) + "\n")
    elif format == "jsonl":
        if track.meta is not None:
            head = track.meta.to_dict()
            if track.flight_id is not None:
                head["flight_id"] = track.flight_id
            sink.write(json.dumps(head) + "\n")
        for row in zip(*cols):
            sink.write(json.dumps(dict(zip(COLUMNS, map(float, row)))) + "\n")
    else:
        raise ValueError(f"unknown track format {format!r}")


def load_track(path, meta: AircraftMeta | None = None) -> FlightTrack:
    """Read a track file, picking the format from the suffix.

    A CSV's metadata may live in a sidecar ``<stem>.json`` next to it.
    """
    import pathlib

    path = pathlib.Path(path)
    fmt = "jsonl" if path.suffix in (".jsonl", ".json") else "csv"
    if fmt == "csv" and meta is None:
        sidecar = path.with_suffix(".json")
        if sidecar.exists():
            meta = AircraftMeta.from_dict(json.loads(sidecar.read_text()))
    return parse_track(path.read_bytes(), fmt, meta=meta, flight_id=path.stem)


# ---------------------------------------------------------------------------
# cleaning and slicing
# ---------------------------------------------------------------------------


def clean_track(track: FlightTrack, cfg: CleaningConfig | None = None) -> tuple[FlightTrack, CleaningReport]:
    """Drop duplicate/out-of-order timestamps, out-of-envelope points and climb-rate spikes.

    The climb-rate test compares each point with the last *kept* point, which
    makes the operation idempotent.
    """
    cfg = cfg or CleaningConfig()
    report = CleaningReport()
    keep = np.zeros(len(track), dtype=bool)
    lo_a, hi_a = cfg.alt_bounds
    lo_v, hi_v = cfg.gs_bounds
    last = -1
    for i in range(len(track)):
        t, alt, gs = track.t[i], track.alt[i], track.gs[i]
        if last >= 0 and t == track.t[last]:
            report.duplicates += 1
            continue
        if last >= 0 and t < track.t[last]:
            report.out_of_order += 1
            continue
        finite = all(math.isfinite(getattr(track, c)[i]) for c in COLUMNS)
        if (
            not finite
            or not (lo_a <= alt <= hi_a)
            or not (lo_v <= gs <= hi_v)
            or not (-90.0 <= track.lat[i] <= 90.0)
            or not (-180.0 <= track.lon[i] < 180.0)
        ):
            report.bounds += 1
            continue
        if last >= 0 and abs(alt - track.alt[last]) > cfg.max_climb_rate * (t - track.t[last]):
            report.climb_rate += 1
            continue
        keep[i] = True
        last = i
    report.kept = int(keep.sum())
    if report.kept < cfg.min_points:
        raise TooSparse(f"{report.kept} point(s) survived cleaning; {cfg.min_points} required")
    return track._take(keep), report


def _interp_columns(track: FlightTrack, t: float) -> list[float]:
    return [t] + [float(np.interp(t, track.t, getattr(track, c))) for c in COLUMNS[1:]]


def slice_track(track: FlightTrack, t_a: float, t_b: float) -> FlightTrack:
    """Points with ``t`` in ``[t_a, t_b]``, re-based so the first point is at 0.

    Boundaries falling strictly inside the track span get a linearly
    interpolated point inserted at exactly ``t_a`` / ``t_b``.
    """
    if not t_a < t_b:
        raise ValueError(f"need t_a < t_b, got [{t_a}, {t_b}]")
    t0, t1 = track.t[0], track.t[-1]
    if t_b < t0 or t_a > t1:
        raise EmptySlice(f"[{t_a}, {t_b}] does not overlap track span [{t0}, {t1}]")
    inside = (track.t >= t_a) & (track.t <= t_b)
    rows = np.column_stack([getattr(track, c) for c in COLUMNS])[inside]
    head, tail = [], []
    if t0 < t_a and (not len(rows) or rows[0, 0] > t_a):
        head = [_interp_columns(track, t_a)]
    if t_b < t1 and (not len(rows) or rows[-1, 0] < t_b):
        tail = [_interp_columns(track, t_b)]
    rows = np.vstack([r for r in (np.array(head).reshape(-1, 5), rows, np.array(tail).reshape(-1, 5))])
    if len(rows) < 2:
        raise EmptySlice(f"[{t_a}, {t_b}] leaves fewer than 2 points")
    rows[:, 0] -= rows[0, 0]
    return FlightTrack(*rows.T, meta=track.meta, flight_id=track.flight_id)


def eval_profile(track: FlightTrack, t):
    """Piecewise-linear (alt, gs) at time(s) ``t``; zero past the last sample."""
    t_arr = np.asarray(t, dtype=float)
    alt = np.interp(t_arr, track.t, track.alt)
    gs = np.interp(t_arr, track.t, track.gs)
    beyond = t_arr > track.t[-1]
    alt = np.where(beyond, 0.0, alt)
    gs = np.where(beyond, 0.0, gs)
    if t_arr.ndim == 0:
        return float(alt), float(gs)
    return alt, gs
