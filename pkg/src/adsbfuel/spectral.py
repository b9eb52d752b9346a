"""Cosine-series features of altitude and speed profiles.

A sampled series on ``[t_0, t_k]`` is mapped to ``t* = (t - t_0) * pi / T_M``,
interpolated linearly, zero-padded on ``[t_k*, pi]`` and extended evenly to
``[-pi, pi]``.  Its cosine coefficients have a closed form, one sum over the
linear pieces:

    alpha_0 = (2/pi) * sum_j (f_{j+1} + f_j) (t*_{j+1} - t*_j) / 2
    alpha_n = (2/pi) * sum_j [ M_j Ct_j(n) / n^2 + N_j(n) / n ]

with ``M_j`` the slope of piece ``j``, ``Ct_j(n) = cos(n t*_{j+1}) - cos(n t*_j)``
and ``N_j(n) = f_{j+1} sin(n t*_{j+1}) - f_j sin(n t*_j)``.
:func:`fourier_quadrature` computes the same numbers by Gauss-Legendre
integration and serves as the reference for :func:`fourier_closed_form`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SpanExceedsTM
from .trajectory import FlightTrack

DEFAULT_RADIUS = 50
MAX_RADIUS = 200


@dataclass(frozen=True, eq=False)
class NormalizedSeries:
    tstar: np.ndarray
    values: np.ndarray
    T_M: float = math.pi

    def __post_init__(self):
        ts = np.asarray(self.tstar, dtype=float)
        vs = np.asarray(self.values, dtype=float)
        if ts.ndim != 1 or ts.shape != vs.shape or len(ts) < 2:
            raise ValueError("tstar and values must be 1-D, equal length, at least 2 samples")
        if ts[0] != 0.0 or ts[-1] > math.pi or np.any(np.diff(ts) <= 0):
            raise ValueError("tstar must start at 0, increase strictly and stay within [0, pi]")
        object.__setattr__(self, "tstar", ts)
        object.__setattr__(self, "values", vs)


@dataclass(frozen=True, eq=False)
class SpectralFeature:
    alpha: np.ndarray
    beta: np.ndarray
    t0: float
    T_M: float

    @property
    def radii(self) -> tuple[int, int]:
        return len(self.alpha) - 1, len(self.beta) - 1

    def to_dict(self) -> dict:
        return {
            "t0": float(self.t0),
            "T_M": float(self.T_M),
            "alpha": [float(x) for x in self.alpha],
            "beta": [float(x) for x in self.beta],
        }

    @classmethod
    def from_dict(cls, d: dict) -> SpectralFeature:
        return cls(np.asarray(d["alpha"], float), np.asarray(d["beta"], float), float(d["t0"]), float(d["T_M"]))


def normalize_time(times, T_M: float) -> np.ndarray:
    """Map ``times`` onto ``[0, pi]`` relative to their first element."""
    times = np.asarray(times, dtype=float)
    span = times[-1] - times[0]
    if span > T_M:
        raise SpanExceedsTM(f"series spans {span:g} s, longer than T_M = {T_M:g} s")
    return (times - times[0]) * math.pi / T_M


def _closed_form_many(tstar: np.ndarray, columns: list[np.ndarray], N: int) -> list[np.ndarray]:
    t = tstar
    dt = np.diff(t)
    outs = []
    if N > 0:
        n = np.arange(1, N + 1, dtype=float)[:, None]
        # cos(b) - cos(a) as a product keeps accuracy on short pieces
        ct = -2.0 * np.sin(n * (t[1:] + t[:-1]) / 2.0) * np.sin(n * dt / 2.0) / n**2
        s = np.sin(n * t) / n
    for f in columns:
        out = np.empty(N + 1)
        out[0] = (2.0 / math.pi) * np.sum((f[1:] + f[:-1]) * dt / 2.0)
        if N > 0:
            slope = np.diff(f) / dt
            terms = slope * ct + (f[1:] * s[:, 1:] - f[:-1] * s[:, :-1])
            out[1:] = (2.0 / math.pi) * np.sum(terms, axis=1)
        outs.append(out)
    return outs


def fourier_closed_form(series: NormalizedSeries, N: int) -> np.ndarray:
    """Cosine coefficients ``alpha_0 .. alpha_N`` of the zero-padded even extension."""
    if N < 0:
        raise ValueError("truncation radius must be non-negative")
    return _closed_form_many(series.tstar, [series.values], N)[0]


def fourier_quadrature(series: NormalizedSeries, N: int, order: int = 10) -> np.ndarray:
    """Reference coefficients by composite Gauss-Legendre integration.

    Panels break at every sample (the integrand has kinks there) and are
    refined so that ``N * width <= 1``; with 10 nodes per panel the
    truncation error is far below 1e-12.
    """
    if N < 0:
        raise ValueError("truncation radius must be non-negative")
    t, f = series.tstar, series.values
    x, w = np.polynomial.legendre.leggauss(order)
    h_max = 1.0 / max(N, 1)
    edges = [t[:1]]
    for a, b in zip(t[:-1], t[1:]):
        m = max(1, math.ceil((b - a) / h_max))
        edges.append(np.linspace(a, b, m + 1)[1:])
    edges = np.concatenate(edges)
    lo, hi = edges[:-1], edges[1:]
    half = (hi - lo) / 2.0
    nodes = (lo[:, None] + half[:, None] * (x + 1.0)).ravel()
    weights = (half[:, None] * w).ravel()
    fx = np.interp(nodes, t, f)
    n = np.arange(N + 1, dtype=float)[:, None]
    return (2.0 / math.pi) * (np.cos(n * nodes) @ (weights * fx))


def reconstruct(coefficients, tstar):
    """Evaluate ``alpha_0/2 + sum_n alpha_n cos(n t*)``."""
    c = np.asarray(coefficients, dtype=float)
    ts = np.asarray(tstar, dtype=float)
    n = np.arange(1, len(c))
    val = c[0] / 2.0 + np.cos(np.multiply.outer(ts, n)) @ c[1:]
    return float(val) if ts.ndim == 0 else val


def featurize(track: FlightTrack, N_h: int = DEFAULT_RADIUS, N_v: int = DEFAULT_RADIUS, T_M: float = 10800.0) -> SpectralFeature:
    """Altitude and ground-speed coefficient vectors of a (clean) track."""
    if max(N_h, N_v) > MAX_RADIUS:
        raise ValueError(f"truncation radius above {MAX_RADIUS}")
    tstar = normalize_time(track.t, T_M)
    NormalizedSeries(tstar, track.alt, T_M)
    if N_h == N_v:
        alpha, beta = _closed_form_many(tstar, [track.alt, track.gs], N_h)
    else:
        alpha = _closed_form_many(tstar, [track.alt], N_h)[0]
        beta = _closed_form_many(tstar, [track.gs], N_v)[0]
    return SpectralFeature(alpha, beta, track.duration, float(T_M))
