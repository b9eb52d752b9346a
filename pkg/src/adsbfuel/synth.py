"""Synthetic ground truth: fuel law, flight generator, quadrature, datasets.

Profiles are climb / cruise / descent with smoothed corners: vertical rate
and longitudinal acceleration are piecewise constant, blended across each
phase change with a smoothstep of width ``transition`` seconds, so altitude
and speed are C2 in time.  Low-amplitude noise is a seeded sum of sinusoids
under a smooth per-phase envelope, which keeps the whole profile analytic
and lets :func:`integrate_fuel` work along the continuous truth rather than
the samples.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .spectral import SpectralFeature, featurize
from .trajectory import AircraftMeta, FlightTrack

H_REF = 12000.0
EARTH_RADIUS = 6371000.0
MIN_SEGMENT = 200.0


@dataclass(frozen=True)
class FuelLaw:
    """Instantaneous burn ``q(h, h', v, v')`` of one aircraft type, kg/s."""

    c0: float  # base burn, kg/s
    c1: float  # climb cost, kg/m
    c2: float  # drag cost, kg s / m^2
    c3: float  # acceleration cost, kg s^2 / m^2
    c4: float  # altitude relief, in [0, 0.5]

    def __post_init__(self):
        if not self.c0 > 0 or min(self.c1, self.c2, self.c3) < 0 or not 0 <= self.c4 <= 0.5:
            raise ValueError(f"invalid fuel law {self}")


# Narrow-body-like types; wingspans in meters.
DEFAULT_LAWS = {
    "A320": FuelLaw(0.42, 0.045, 7.5e-6, 2.0e-3, 0.30),
    "B738": FuelLaw(0.45, 0.050, 7.0e-6, 2.2e-3, 0.28),
    "A321": FuelLaw(0.52, 0.060, 8.5e-6, 2.5e-3, 0.30),
}
DEFAULT_WINGSPAN = {"A320": 35.8, "B738": 35.8, "A321": 35.8}
DEFAULT_CRUISE_SPEED = {"A320": (220.0, 240.0), "B738": (225.0, 245.0), "A321": (220.0, 240.0)}


def q_true(law: FuelLaw, h, dh, v, dv):
    """Ground-truth fuel flow, kg/s, clamped below at ``0.01 * c0``."""
    h, dh, v, dv = (np.asarray(x, dtype=float) for x in (h, dh, v, dv))
    q = (law.c0 + law.c1 * np.maximum(dh, 0.0) + law.c2 * v**2 + law.c3 * np.maximum(dv, 0.0) * v) * (
        1.0 - law.c4 * h / H_REF
    )
    q = np.maximum(q, 0.01 * law.c0)
    return float(q) if q.ndim == 0 else q


# ---------------------------------------------------------------------------
# smooth piecewise-constant rates
# ---------------------------------------------------------------------------


def _smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3.0 - 2.0 * x)


def _smoothstep_d(x):
    inside = (x > 0.0) & (x < 1.0)
    return np.where(inside, 6.0 * x * (1.0 - x), 0.0)


def _smoothstep_int(x):
    """Antiderivative of the clipped smoothstep, zero at x <= 0."""
    xc = np.clip(x, 0.0, 1.0)
    return np.where(x >= 1.0, 0.5 + (x - 1.0), xc**3 - xc**4 / 2.0)


@dataclass(frozen=True)
class SmoothSteps:
    """Piecewise-constant ``levels`` between ``breaks``, smoothed over ``width``.

    Each jump at ``breaks[i]`` is spread symmetrically over
    ``[breaks[i] - width/2, breaks[i] + width/2]``, which preserves the
    integral of the unsmoothed steps outside the windows.
    """

    breaks: tuple[float, ...]  # interior break points
    levels: tuple[float, ...]  # len(breaks) + 1
    width: float

    def _terms(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        b = np.asarray(self.breaks, dtype=float)
        jumps = np.diff(self.levels)
        return t, b, jumps

    def level(self, t):
        t, b, jumps = self._terms(t)
        if not len(b):
            return np.full(t.shape[:-1], self.levels[0])
        if self.width == 0.0:
            return self.levels[0] + np.sum(jumps * (t[..., :] >= b), axis=-1)
        x = (t - b) / self.width + 0.5
        return self.levels[0] + np.sum(jumps * _smoothstep(x), axis=-1)

    def slope(self, t):
        t, b, jumps = self._terms(t)
        if not len(b) or self.width == 0.0:
            return np.zeros(t.shape[:-1])
        x = (t - b) / self.width + 0.5
        return np.sum(jumps * _smoothstep_d(x), axis=-1) / self.width

    def integral(self, t):
        """``int_0^t level`` for ``t >= 0`` (break windows must start after 0)."""
        t, b, jumps = self._terms(t)
        base = self.levels[0] * t[..., 0]
        if not len(b):
            return base
        if self.width == 0.0:
            return base + np.sum(jumps * np.maximum(t - b, 0.0), axis=-1)
        x = (t - b) / self.width + 0.5
        return base + np.sum(jumps * self.width * _smoothstep_int(x), axis=-1)

    def kinks(self) -> list[float]:
        if self.width == 0.0:
            return list(self.breaks)
        out = []
        for b in self.breaks:
            out += [b - self.width / 2.0, b + self.width / 2.0]
        return out


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseProfile:
    cruise_alt: float = 10000.0
    climb_rate: float = 10.0
    descent_rate: float = 7.0
    cruise_speed: float = 230.0
    cruise_duration: float = 3600.0
    initial_speed: float = 80.0
    final_speed: float = 75.0
    start_alt: float = 0.0
    end_alt: float = 0.0
    transition: float = 240.0
    # noise amplitudes per phase: (climb, cruise, descent)
    alt_noise: tuple[float, float, float] = (20.0, 10.0, 20.0)
    speed_noise: tuple[float, float, float] = (1.5, 1.0, 1.5)
    sample_interval: float = 10.0
    seed: int = 0
    origin: tuple[float, float] = (30.0, 115.0)
    heading_deg: float = 45.0

    @property
    def climb_duration(self) -> float:
        return max(self.cruise_alt - self.start_alt, 0.0) / self.climb_rate

    @property
    def descent_duration(self) -> float:
        return max(self.cruise_alt - self.end_alt, 0.0) / self.descent_rate

    @property
    def duration(self) -> float:
        return self.climb_duration + self.cruise_duration + self.descent_duration

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> PhaseProfile:
        d = dict(d)
        for k in ("alt_noise", "speed_noise", "origin"):
            if k in d:
                d[k] = tuple(d[k])
        return cls(**d)


def _phase_pieces(p: PhaseProfile):
    durations = [p.climb_duration, p.cruise_duration, p.descent_duration]
    climb_acc = (p.cruise_speed - p.initial_speed) / p.climb_duration if p.climb_duration > 0 else 0.0
    desc_acc = (p.final_speed - p.cruise_speed) / p.descent_duration if p.descent_duration > 0 else 0.0
    rates = [p.climb_rate, 0.0, -p.descent_rate]
    accs = [climb_acc, 0.0, desc_acc]
    keep = [i for i, d in enumerate(durations) if d > 0]
    return [durations[i] for i in keep], [rates[i] for i in keep], [accs[i] for i in keep], keep


_NOISE_COMPONENTS = 3
_NOISE_PERIODS = (300.0, 1200.0)
_NOISE_TAPER = 300.0


@dataclass(frozen=True, eq=False)
class SyntheticFlight:
    """Continuous kinematics of a generated flight plus its sampled track."""

    profile: PhaseProfile
    meta: AircraftMeta
    flight_id: str | None = None

    def __post_init__(self):
        p = self.profile
        durs, rates, accs, phases = _phase_pieces(p)
        if not durs:
            raise ValueError("profile has zero duration")
        edges = tuple(float(x) for x in np.cumsum(durs)[:-1])
        width = min([p.transition] + list(durs)) if len(durs) > 1 else 0.0
        object.__setattr__(self, "_alt", SmoothSteps(edges, tuple(rates), width))
        object.__setattr__(self, "_spd", SmoothSteps(edges, tuple(accs), width))
        initial = p.initial_speed if p.climb_duration > 0 else p.cruise_speed

        object.__setattr__(self, "_v0", initial)
        T = float(sum(durs))
        object.__setattr__(self, "duration", T)

        # noise envelope: zero at both ends, per-phase amplitude in between
        taper = min(_NOISE_TAPER, T / 4.0)
        amp_breaks = (taper, *edges, T - taper)
        gaps = np.diff(np.r_[0.0, sorted(amp_breaks), T])
        amp_w = float(min(p.transition, taper, np.min(gaps)))
        amp_h = (0.0, *(p.alt_noise[i] for i in phases), 0.0)
        amp_v = (0.0, *(p.speed_noise[i] for i in phases), 0.0)
        object.__setattr__(self, "_env_h", SmoothSteps(amp_breaks, amp_h, amp_w))
        object.__setattr__(self, "_env_v", SmoothSteps(amp_breaks, amp_v, amp_w))

        rng = np.random.default_rng([p.seed, 0x5EED])
        noise = []
        for _ in range(2):
            omega = 2 * math.pi / rng.uniform(*_NOISE_PERIODS, size=_NOISE_COMPONENTS)
            phase = rng.uniform(0, 2 * math.pi, size=_NOISE_COMPONENTS)
            weight = rng.uniform(0.5, 1.0, size=_NOISE_COMPONENTS)
            noise.append((omega, phase, weight / weight.sum()))
        object.__setattr__(self, "_noise", tuple(noise))

    # -- continuous kinematics ---------------------------------------------
    def _n(self, which: int, t):
        omega, phase, weight = self._noise[which]
        flat = np.reshape(t, (-1, 1))
        arg = flat * omega + phase
        n = np.sin(arg) @ weight
        dn = np.cos(arg) @ (omega * weight)
        return n.reshape(np.shape(t)), dn.reshape(np.shape(t))

    def altitude(self, t):
        t = np.asarray(t, dtype=float)
        n, _ = self._n(0, t)
        return self.profile.start_alt + self._alt.integral(t) + self._env_h.level(t) * n

    def climb_rate(self, t):
        t = np.asarray(t, dtype=float)
        n, dn = self._n(0, t)
        return self._alt.level(t) + self._env_h.slope(t) * n + self._env_h.level(t) * dn

    def speed(self, t):
        t = np.asarray(t, dtype=float)
        n, _ = self._n(1, t)
        return self._v0 + self._spd.integral(t) + self._env_v.level(t) * n

    def acceleration(self, t):
        t = np.asarray(t, dtype=float)
        n, dn = self._n(1, t)
        return self._spd.level(t) + self._env_v.slope(t) * n + self._env_v.level(t) * dn

    def breakpoints(self) -> list[float]:
        """Times where the integrand's smoothness drops (phase blend edges)."""
        pts = self._alt.kinks() + self._spd.kinks() + self._env_h.kinks() + self._env_v.kinks()
        return sorted(x for x in set(pts) if 0.0 < x < self.duration)

    def sample_times(self) -> np.ndarray:
        dt = self.profile.sample_interval
        t = np.arange(0.0, self.duration, dt)
        if self.duration - t[-1] < 1e-9:
            t = t[:-1]
        return np.r_[t, self.duration]

    @property
    def track(self) -> FlightTrack:
        t = self.sample_times()
        alt = self.altitude(t)
        gs = self.speed(t)
        lat, lon = self._positions(t)
        return FlightTrack(t, lat, lon, alt, gs, meta=self.meta, flight_id=self.flight_id)

    def _positions(self, t):
        fine = np.linspace(0.0, self.duration, max(int(self.duration / 5.0) + 1, 2))
        v = self.speed(fine)
        dist = np.r_[0.0, np.cumsum((v[1:] + v[:-1]) / 2.0 * np.diff(fine))]
        d = np.interp(t, fine, dist)
        lat0, lon0 = self.profile.origin
        psi = math.radians(self.profile.heading_deg)
        lat = lat0 + np.degrees(d * math.cos(psi) / EARTH_RADIUS)
        lon = lon0 + np.degrees(d * math.sin(psi) / (EARTH_RADIUS * math.cos(math.radians(lat0))))
        lon = (lon + 180.0) % 360.0 - 180.0
        return lat, lon

    def fuel_flow(self, law: FuelLaw, t):
        t = np.asarray(t, dtype=float)
        nh, dnh = self._n(0, t)
        nv, dnv = self._n(1, t)
        eh, ev = self._env_h.level(t), self._env_v.level(t)
        h = self.profile.start_alt + self._alt.integral(t) + eh * nh
        dh = self._alt.level(t) + self._env_h.slope(t) * nh + eh * dnh
        v = self._v0 + self._spd.integral(t) + ev * nv
        dv = self._spd.level(t) + self._env_v.slope(t) * nv + ev * dnv
        return q_true(law, h, dh, v, dv)


def generate_flight(profile: PhaseProfile, meta: AircraftMeta, flight_id: str | None = None) -> SyntheticFlight:
    return SyntheticFlight(profile, meta, flight_id)


def generate_track(profile: PhaseProfile, meta: AircraftMeta, flight_id: str | None = None) -> FlightTrack:
    """Sampled track of a generated flight; deterministic given ``profile.seed``."""
    return generate_flight(profile, meta, flight_id).track


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


def _sign_roots(f, edges: np.ndarray, iters: int = 12) -> np.ndarray:
    """Roots of ``f`` in panels whose end values differ in sign, by Illinois iterations.

    Panels are no wider than one sample interval while the noise periods are
    at least 300 s, so two roots never share a panel.
    """
    y = f(edges)
    change = np.flatnonzero(np.sign(y[1:]) * np.sign(y[:-1]) < 0)
    if not len(change):
        return np.empty(0)
    a, b = edges[change], edges[change + 1]
    fa, fb = y[change], y[change + 1]
    side = np.zeros(len(a))
    for _ in range(iters):
        with np.errstate(divide="ignore", invalid="ignore"):
            r = (a * fb - b * fa) / (fb - fa)
        r = np.where(np.isfinite(r) & (r > a) & (r < b), r, (a + b) / 2.0)
        fr = f(r)
        left = np.sign(fr) * np.sign(fa) <= 0
        # Illinois: halve the stale endpoint's value when the same side repeats
        fa = np.where(left & (side == -1), fa / 2.0, fa)
        fb = np.where(~left & (side == 1), fb / 2.0, fb)
        b, fb = np.where(left, r, b), np.where(left, fr, fb)
        a, fa = np.where(left, a, r), np.where(left, fa, fr)
        side = np.where(left, -1, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = (a * fb - b * fa) / (fb - fa)
    return np.where(np.isfinite(r) & (r >= a) & (r <= b), r, (a + b) / 2.0)


def _panels(flight: SyntheticFlight, t_a: float, t_b: float, extra=()) -> np.ndarray:
    # one panel per sample interval at most, so every interval gets >= `order` nodes
    m = max(1, math.ceil((t_b - t_a) / flight.profile.sample_interval))
    pts = np.r_[np.linspace(t_a, t_b, m + 1), np.asarray(extra, dtype=float), flight.breakpoints()]
    edges = np.unique(np.clip(pts, t_a, t_b))
    # split where max(h', 0) and max(v', 0) switch branch
    roots = np.r_[_sign_roots(flight.climb_rate, edges), _sign_roots(flight.acceleration, edges)]
    return np.unique(np.r_[edges, roots])


def cumulative_fuel(law: FuelLaw, flight: SyntheticFlight, times, order: int = 5) -> np.ndarray:
    """Fuel burned on ``[times[0], times[i]]`` for each ``i`` (composite Gauss-Legendre).

    Panels are at most one sample interval wide and also break at every
    requested time, at phase-blend edges and where the climb rate or
    acceleration changes sign.
    """
    times = np.asarray(times, dtype=float)
    edges = _panels(flight, float(times[0]), float(times[-1]), extra=times)
    x, w = np.polynomial.legendre.leggauss(order)
    lo, hi = edges[:-1], edges[1:]
    half = (hi - lo) / 2.0
    nodes = lo[:, None] + half[:, None] * (x + 1.0)
    panel = (flight.fuel_flow(law, nodes) @ w) * half
    cum = np.r_[0.0, np.cumsum(panel)]
    idx = np.searchsorted(edges, times)
    return cum[idx]


def integrate_fuel(law: FuelLaw, flight: SyntheticFlight, t_a: float, t_b: float, order: int = 5) -> float:
    """Fuel burned over ``[t_a, t_b]`` along the continuous profile, kg."""
    if not 0.0 <= t_a <= t_b <= flight.duration:
        raise ValueError(f"[{t_a}, {t_b}] is not within [0, {flight.duration}]")
    if t_a == t_b:
        return 0.0
    return float(cumulative_fuel(law, flight, [t_a, t_b], order)[-1])


# ---------------------------------------------------------------------------
# datasets
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TrainingSample:
    feature: SpectralFeature
    meta: AircraftMeta
    q_true: float
    flight_id: str | None = None

    def __post_init__(self):
        if not self.q_true > 0:
            raise ValueError(f"q_true must be positive, got {self.q_true}")

    def to_dict(self) -> dict:
        d = {"flight_id": self.flight_id}
        d.update(self.feature.to_dict())
        d["meta"] = self.meta.to_dict()
        d["q_true"] = float(self.q_true)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> TrainingSample:
        return cls(SpectralFeature.from_dict(d), AircraftMeta.from_dict(d["meta"]), float(d["q_true"]), d.get("flight_id"))


@dataclass(frozen=True)
class ProfileRanges:
    """Uniform ranges the dataset generator draws flight profiles from."""

    cruise_alt: tuple[float, float] = (8000.0, 12000.0)
    climb_rate: tuple[float, float] = (7.0, 13.0)
    descent_rate: tuple[float, float] = (5.0, 9.0)
    cruise_duration: tuple[float, float] = (600.0, 5400.0)
    initial_speed: tuple[float, float] = (75.0, 90.0)
    final_speed: tuple[float, float] = (65.0, 80.0)
    age: tuple[float, float] = (0.0, 25.0)
    sample_interval: float = 10.0

    @property
    def max_duration(self) -> float:
        hi_alt = self.cruise_alt[1]
        return hi_alt / self.climb_rate[0] + self.cruise_duration[1] + hi_alt / self.descent_rate[0]


@dataclass(frozen=True)
class SynthConfig:
    laws: dict = field(default_factory=lambda: dict(DEFAULT_LAWS))
    mixture: dict = field(default_factory=lambda: {k: 1.0 / len(DEFAULT_LAWS) for k in DEFAULT_LAWS})
    wingspan: dict = field(default_factory=lambda: dict(DEFAULT_WINGSPAN))
    cruise_speed: dict = field(default_factory=lambda: dict(DEFAULT_CRUISE_SPEED))
    ranges: ProfileRanges = field(default_factory=ProfileRanges)
    segments_per_flight: int = 4
    T_M: float | None = None

    @property
    def t_m(self) -> float:
        """Explicit ``T_M`` or the longest possible flight rounded up to the hour."""
        if self.T_M is not None:
            return float(self.T_M)
        return 3600.0 * math.ceil(self.ranges.max_duration / 3600.0)

    @classmethod
    def from_dict(cls, d: dict) -> SynthConfig:
        d = dict(d)
        if "laws" in d:
            d["laws"] = {k: FuelLaw(**v) for k, v in d["laws"].items()}
        if "ranges" in d:
            r = {k: tuple(v) if isinstance(v, list) else v for k, v in d["ranges"].items()}
            d["ranges"] = ProfileRanges(**r)
        for k in ("cruise_speed",):
            if k in d:
                d[k] = {t: tuple(v) for t, v in d[k].items()}
        return cls(**d)


def random_flight(cfg: SynthConfig, seed: int, index: int) -> tuple[SyntheticFlight, str]:
    """Flight number ``index`` of the corpus seeded by ``seed``."""
    rng = np.random.default_rng([seed, index])
    types = sorted(cfg.mixture)
    p = np.array([cfg.mixture[t] for t in types], dtype=float)
    actype = types[int(rng.choice(len(types), p=p / p.sum()))]
    r = cfg.ranges
    u = lambda lohi: float(rng.uniform(*lohi))  # noqa: E731
    profile = PhaseProfile(
        cruise_alt=u(r.cruise_alt),
        climb_rate=u(r.climb_rate),
        descent_rate=u(r.descent_rate),
        cruise_speed=u(cfg.cruise_speed[actype]),
        cruise_duration=u(r.cruise_duration),
        initial_speed=u(r.initial_speed),
        final_speed=u(r.final_speed),
        sample_interval=r.sample_interval,
        seed=int(rng.integers(2**63)),
        origin=(u((20.0, 45.0)), u((100.0, 125.0))),
        heading_deg=u((0.0, 360.0)),
    )
    meta = AircraftMeta(actype, round(u(r.age), 2), cfg.wingspan[actype])
    return SyntheticFlight(profile, meta, f"{seed}-{index}"), actype


def _segment_bounds(rng, t: np.ndarray, kind: int) -> tuple[int, int]:
    dur = t[-1]
    if kind == 0 or dur <= MIN_SEGMENT:
        return 0, len(t) - 1
    if kind == 1:
        length = rng.uniform(MIN_SEGMENT, dur)
        start = 0.0
    else:
        length = rng.uniform(MIN_SEGMENT, dur)
        start = rng.uniform(0.0, dur - length)
    i = int(np.searchsorted(t, start, side="left"))
    i = min(i, len(t) - 2)
    j = int(np.searchsorted(t, t[i] + length, side="left"))
    j = min(max(j, i + 1), len(t) - 1)
    while t[j] - t[i] < MIN_SEGMENT and j < len(t) - 1:
        j += 1
    while t[j] - t[i] < MIN_SEGMENT and i > 0:
        i -= 1
    return i, j


def flight_samples(cfg: SynthConfig, seed: int, index: int, count: int, N_h: int, N_v: int) -> list[TrainingSample]:
    """Samples drawn from one flight: whole flight, a prefix, then interior segments."""
    flight, actype = random_flight(cfg, seed, index)
    law = cfg.laws[actype]
    track = flight.track
    t = track.t
    rng = np.random.default_rng([seed, index, 1])
    bounds = [_segment_bounds(rng, t, min(k, 2)) for k in range(count)]
    needed = np.unique([i for ij in bounds for i in ij])
    cum = dict(zip(needed.tolist(), cumulative_fuel(law, flight, np.r_[0.0, t[needed]])[1:]))
    out = []
    for i, j in bounds:
        seg = FlightTrack(
            t[i : j + 1], track.lat[i : j + 1], track.lon[i : j + 1], track.alt[i : j + 1], track.gs[i : j + 1]
        )
        feat = featurize(seg, N_h, N_v, cfg.t_m)
        out.append(TrainingSample(feat, flight.meta, float(cum[j] - cum[i]), f"{flight.flight_id}:{i}-{j}"))
    return out


def _flight_block(args):
    cfg, seed, flights, m, N_h, N_v = args
    return [s for f in flights for s in flight_samples(cfg, seed, f, m, N_h, N_v)]


def make_dataset(
    n: int,
    cfg: SynthConfig | None = None,
    seed: int = 0,
    N_h: int = 50,
    N_v: int = 50,
    threads: int = 1,
) -> list[TrainingSample]:
    """``n`` labelled samples, ``cfg.segments_per_flight`` per generated flight.

    Flight ``f`` is seeded from ``(seed, f)`` only, so a dataset of size
    ``n`` is a prefix of any larger one with the same seed and the index
    space can be split across worker processes without changing results.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    cfg = cfg or SynthConfig()
    m = max(1, cfg.segments_per_flight)
    n_flights = math.ceil(n / m)
    flights = list(range(n_flights))
    if threads <= 1:
        samples = _flight_block((cfg, seed, flights, m, N_h, N_v))
    else:
        from concurrent.futures import ProcessPoolExecutor

        chunks = [flights[i : i + 256] for i in range(0, n_flights, 256)]
        with ProcessPoolExecutor(max_workers=threads) as ex:
            parts = ex.map(_flight_block, [(cfg, seed, c, m, N_h, N_v) for c in chunks])
            samples = [s for part in parts for s in part]
    return samples[:n]


def held_out_flights(cfg: SynthConfig | None, seed: int, count: int) -> list[tuple[SyntheticFlight, FuelLaw]]:
    """Whole flights from an independent seed, with their laws."""
    cfg = cfg or SynthConfig()
    out = []
    for i in range(count):
        flight, actype = random_flight(cfg, seed, i)
        out.append((flight, cfg.laws[actype]))
    return out
