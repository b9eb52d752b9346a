"""C2 monotone interpolation of cumulative fuel and the derived fuel flow.

Each data interval ``I_j = [T_j, T_{j+1}]`` (length ``D``) is split into
three equal sub-segments, each a cubic Hermite piece.  Given the knot
values ``Q``, first derivatives ``Q'`` and second derivatives ``Q''``, the
four interior unknowns are fixed by matching ``Q''`` at both knots and
requiring C2 continuity at the two interior thirds.  Solving that linear
system gives

    a = Q'_j + (D/6) Q''_j            d = Q'_{j+1} - (D/6) Q''_{j+1}
    w = 3 P_j - (Q'_j + Q'_{j+1}) + (D/9) (Q''_{j+1} - Q''_j)
    b = (a + w) / 2                   c = (d + w) / 2
    Q_{j+1/3} = Q_j     + (D/9) (Q'_j     + 3a/2 + w/2)
    Q_{j+2/3} = Q_{j+1} - (D/9) (Q'_{j+1} + 3d/2 + w/2)

where ``b`` and ``c`` are the derivatives at the interior thirds.  The
middle piece runs from slope ``b`` to slope ``c``.

Knot derivatives come from the three-point quadratic through neighbouring
samples.  Monotonicity is enforced in two passes: first ``Q'`` is clamped
into ``[0, 3 min(P_{j-1}, P_j)]``; then any interval whose pieces still have
a negative derivative has the second derivatives at its knots zeroed, and
if that is not enough its first derivatives capped at ``1.5 min(P)``.  With
``Q'' = 0`` and ``Q'_j + Q'_{j+1} <= 3 P_j`` all three pieces are provably
monotone, so the loop terminates.  The knot data stay shared between
neighbouring intervals, so the curve is C2 everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSeries, NonMonotoneModelOutput, NonMonotonicConstruction, OutOfDomain

RELAX_D2 = 1
RELAX_D1 = 2

_GAUSS_X, _ = np.polynomial.legendre.leggauss(5)
_GAUSS_S = (_GAUSS_X + 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class FuelSeries:
    T: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        T = np.array(self.T, dtype=float)
        Q = np.array(self.Q, dtype=float)
        if T.ndim != 1 or T.shape != Q.shape:
            raise InvalidSeries("T and Q must be 1-D arrays of equal length")
        if len(T) < 3:
            raise InvalidSeries("at least 3 samples are required")
        if not (np.all(np.isfinite(T)) and np.all(np.isfinite(Q))):
            raise InvalidSeries("samples must be finite")
        if np.any(np.diff(T) <= 0) or np.any(np.diff(Q) <= 0):
            raise InvalidSeries("T and Q must both be strictly increasing")
        T.flags.writeable = False
        Q.flags.writeable = False
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "Q", Q)

    @property
    def K(self) -> int:
        return len(self.T) - 1


@dataclass(frozen=True, eq=False)
class KnotDerivatives:
    d1: np.ndarray
    d2: np.ndarray
    # per-knot flag: 0 untouched, otherwise which stage modified it
    clamped: np.ndarray = field(default=None)
    relaxed: np.ndarray = field(default=None)

    @property
    def limited(self) -> np.ndarray:
        return (self.clamped > 0) | (self.relaxed > 0)


@dataclass(frozen=True, eq=False)
class MonotoneCurve:
    """Three Hermite pieces per data interval.

    ``values[j]`` holds ``(Q_j, Q_{j+1/3}, Q_{j+2/3}, Q_{j+1})`` and
    ``slopes[j]`` the derivatives ``(Q'_j, b_j, c_j, Q'_{j+1})`` at the same
    four points.
    """

    T: np.ndarray
    values: np.ndarray
    slopes: np.ndarray
    knots: KnotDerivatives

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.T[0]), float(self.T[-1])

    def _locate(self, T):
        T = np.asarray(T, dtype=float)
        lo, hi = self.T[0], self.T[-1]
        if np.any(T < lo) or np.any(T > hi) or np.any(np.isnan(T)):
            raise OutOfDomain(f"evaluation point outside [{lo}, {hi}]")
        j = np.clip(np.searchsorted(self.T, T, side="right") - 1, 0, len(self.T) - 2)
        D = self.T[j + 1] - self.T[j]
        u = 3.0 * (T - self.T[j]) / D
        k = np.clip(np.floor(u).astype(int), 0, 2)
        s = u - k
        h = D / 3.0
        p0 = self.values[j, k]
        p1 = self.values[j, k + 1]
        m0 = h * self.slopes[j, k]
        m1 = h * self.slopes[j, k + 1]
        return T, s, h, p0, p1, m0, m1


def _scalar(x, like):
    return float(x) if np.ndim(like) == 0 else x


def interval_slopes(series: FuelSeries) -> np.ndarray:
    """Difference quotients ``P_j = (Q_{j+1} - Q_j) / (T_{j+1} - T_j)``."""
    return np.diff(series.Q) / np.diff(series.T)


def _raw_derivatives(T: np.ndarray, P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    dT = np.diff(T)
    K = len(dT)
    d1 = np.empty(K + 1)
    d2 = np.empty(K + 1)
    # interior: derivative of the quadratic through j-1, j, j+1
    w = dT[:-1] + dT[1:]
    d1[1:-1] = (dT[:-1] * P[1:] + dT[1:] * P[:-1]) / w
    d2[1:-1] = 2.0 * (P[1:] - P[:-1]) / w
    # endpoints: the same quadratic, differentiated at its outer node
    c0 = (P[1] - P[0]) / (dT[0] + dT[1])
    d1[0] = P[0] - c0 * dT[0]
    d2[0] = 2.0 * c0
    cK = (P[-1] - P[-2]) / (dT[-1] + dT[-2])
    d1[-1] = P[-1] + cK * dT[-1]
    d2[-1] = 2.0 * cK
    return d1, d2


def knot_derivatives(series: FuelSeries, P: np.ndarray | None = None) -> KnotDerivatives:
    """Second-order knot derivatives with the slope clamp applied.

    Knots whose first derivative leaves ``[0, 3 min(adjacent P)]`` are
    clamped, and their second derivative replaced by the one-sided
    difference of limited first derivatives towards the flatter neighbour.
    """
    T = series.T
    if P is None:
        P = interval_slopes(series)
    dT = np.diff(T)
    K = len(dT)
    d1, d2 = _raw_derivatives(T, P)

    left = np.r_[np.inf, P]
    right = np.r_[P, np.inf]
    bound = 3.0 * np.minimum(left, right)
    clamped = np.zeros(K + 1, dtype=int)
    low = d1 < 0.0
    high = d1 > bound
    d1 = np.where(low, 0.0, np.where(high, bound, d1))
    clamped[low | high] = 1

    for j in np.flatnonzero(clamped):
        forward = j == 0 or (j < K and right[j] <= left[j])
        if forward:
            d2[j] = (d1[j + 1] - d1[j]) / dT[j]
        else:
            d2[j] = (d1[j] - d1[j - 1]) / dT[j - 1]
    return KnotDerivatives(d1, d2, clamped, np.zeros(K + 1, dtype=int))


def _interval_parameters(T, Q, P, d1, d2):
    D = np.diff(T)
    a = d1[:-1] + D / 6.0 * d2[:-1]
    d = d1[1:] - D / 6.0 * d2[1:]
    w = 3.0 * P - (d1[:-1] + d1[1:]) + D / 9.0 * (d2[1:] - d2[:-1])
    b = (a + w) / 2.0
    c = (d + w) / 2.0
    q13 = Q[:-1] + D / 9.0 * (d1[:-1] + 1.5 * a + 0.5 * w)
    q23 = Q[1:] - D / 9.0 * (d1[1:] + 1.5 * d + 0.5 * w)
    values = np.column_stack([Q[:-1], q13, q23, Q[1:]])
    slopes = np.column_stack([d1[:-1], b, c, d1[1:]])
    return values, slopes


def _piece_min_derivative(values, slopes, T):
    """Minimum over [0, 1] of each piece's derivative (in T units), shape (K, 3)."""
    h = np.diff(T)[:, None] / 3.0
    dp = np.diff(values, axis=1)
    m0 = h * slopes[:, :-1]
    m1 = h * slopes[:, 1:]
    qa = -6.0 * dp + 3.0 * m0 + 3.0 * m1
    qb = 6.0 * dp - 4.0 * m0 - 2.0 * m1
    lo = np.minimum(m0, m1)
    with np.errstate(divide="ignore", invalid="ignore"):
        sv = -qb / (2.0 * qa)
        inside = (qa > 0) & (sv > 0) & (sv < 1)
        vertex = np.where(inside, m0 - qb**2 / (4.0 * qa), np.inf)
    return np.minimum(lo, vertex) / h


def build_curve(series: FuelSeries, knots: KnotDerivatives | None = None) -> MonotoneCurve:
    """Assemble the C2 monotone piecewise-Hermite curve through ``series``."""
    T, Q = series.T, series.Q
    P = interval_slopes(series)
    if knots is None:
        knots = knot_derivatives(series, P)
    d1 = knots.d1.copy()
    d2 = knots.d2.copy()
    relaxed = knots.relaxed.copy() if knots.relaxed is not None else np.zeros(len(T), dtype=int)
    left = np.r_[np.inf, P]
    right = np.r_[P, np.inf]
    cap = 1.5 * np.minimum(left, right)
    tol = 1e-13 * np.max(np.abs(P))

    for _ in range(2 * len(T) + 1):
        values, slopes = _interval_parameters(T, Q, P, d1, d2)
        bad = np.flatnonzero(np.min(_piece_min_derivative(values, slopes, T), axis=1) < -tol)
        if not len(bad):
            break
        for j in bad:
            for k in (j, j + 1):
                if relaxed[k] < RELAX_D2:
                    d2[k] = 0.0
                    relaxed[k] = RELAX_D2
                elif relaxed[k] < RELAX_D1:
                    d1[k] = min(d1[k], cap[k])
                    relaxed[k] = RELAX_D1
    else:
        raise NonMonotonicConstruction("monotonicity relaxation did not converge")

    knots = KnotDerivatives(d1, d2, knots.clamped, relaxed)
    curve = MonotoneCurve(T, values, slopes, knots)
    _verify_monotone(curve, tol)
    return curve


def _verify_monotone(curve: MonotoneCurve, tol: float) -> None:
    h = np.diff(curve.T)[:, None, None] / 3.0
    dp = np.diff(curve.values, axis=1)[:, :, None]
    m0 = h * curve.slopes[:, :-1, None]
    m1 = h * curve.slopes[:, 1:, None]
    s = _GAUSS_S
    deriv = (6.0 * dp * (s - s**2) + m0 * (1 - 4 * s + 3 * s**2) + m1 * (3 * s**2 - 2 * s)) / h
    if np.any(deriv < -tol):
        raise NonMonotonicConstruction("negative fuel flow at a Gauss point")


def eval_curve(curve: MonotoneCurve, T):
    """Cumulative fuel ``Q(T)``."""
    T_in = T
    _, s, h, p0, p1, m0, m1 = curve._locate(T)
    H0 = (1 - s) ** 2 * (1 + 2 * s)
    H1 = s**2 * (3 - 2 * s)
    G0 = s * (1 - s) ** 2
    G1 = -(s**2) * (1 - s)
    return _scalar(H0 * p0 + H1 * p1 + G0 * m0 + G1 * m1, T_in)


def eval_flow(curve: MonotoneCurve, T):
    """Fuel flow ``dQ/dT``, the exact derivative of :func:`eval_curve`."""
    T_in = T
    _, s, h, p0, p1, m0, m1 = curve._locate(T)
    dp = p1 - p0
    val = (6.0 * dp * (s - s**2) + m0 * (1 - 4 * s + 3 * s**2) + m1 * (3 * s**2 - 2 * s)) / h
    # Each piece is monotone by construction; near a zero-slope knot rounding
    # can still give values of order -1e-16, which are clipped.
    val = np.maximum(val, 0.0)
    return _scalar(val, T_in)


def eval_flow_rate(curve: MonotoneCurve, T, side: str = "right"):
    """Second derivative ``d2Q/dT2``; ``side`` picks the piece at a break point."""
    T_in = T
    T = np.asarray(T, dtype=float)
    if side == "left":
        # evaluate on the piece ending at T
        lo = curve.T[0]
        if np.any(T <= lo):
            raise OutOfDomain("no piece to the left of the curve start")
        j = np.clip(np.searchsorted(curve.T, T, side="left") - 1, 0, len(curve.T) - 2)
        D = curve.T[j + 1] - curve.T[j]
        u = 3.0 * (T - curve.T[j]) / D
        k = np.clip(np.ceil(u).astype(int) - 1, 0, 2)
        s = u - k
        h = D / 3.0
        p0, p1 = curve.values[j, k], curve.values[j, k + 1]
        m0, m1 = h * curve.slopes[j, k], h * curve.slopes[j, k + 1]
    else:
        _, s, h, p0, p1, m0, m1 = curve._locate(T)
    dp = p1 - p0
    val = (dp * (6 - 12 * s) + m0 * (6 * s - 4) + m1 * (6 * s - 2)) / h**2
    return _scalar(val, T_in)


# ---------------------------------------------------------------------------
# model-driven flow
# ---------------------------------------------------------------------------


def pool_adjacent_violators(y) -> np.ndarray:
    """Least-squares non-decreasing fit (unit weights)."""
    y = np.asarray(y, dtype=float)
    means: list[float] = []
    counts: list[int] = []
    for v in y:
        means.append(float(v))
        counts.append(1)
        while len(means) > 1 and means[-2] > means[-1]:
            n = counts[-2] + counts[-1]
            m = (means[-2] * counts[-2] + means[-1] * counts[-1]) / n
            means[-2:] = [m]
            counts[-2:] = [n]
    return np.repeat(means, counts)


def isotonic_repair(Q, eps: float = 1e-6) -> tuple[np.ndarray, int]:
    """Make ``Q`` strictly increasing with minimal change.

    Violators are pooled to their running mean, then a ramp of ``eps`` per
    step separates tied values.  Returns the repaired array and the number
    of entries that changed.
    """
    Q = np.asarray(Q, dtype=float)
    out = pool_adjacent_violators(Q)
    for i in range(1, len(out)):
        if out[i] < out[i - 1] + eps:
            out[i] = out[i - 1] + eps
    return out, int(np.count_nonzero(out != Q))


@dataclass(frozen=True, eq=False)
class InstantaneousFlow:
    series: FuelSeries
    curve: MonotoneCurve
    repaired: int
    grid: np.ndarray | None = None
    flow: np.ndarray | None = None


def cumulative_grid(duration: float, step: float) -> np.ndarray:
    """Knot times ``0, step, 2 step, ...`` closed by the track end.

    A last regular knot closer than ``step / 2`` to the end is dropped.
    """
    T = np.arange(0.0, duration, step)
    if duration - T[-1] < step / 2.0 and len(T) > 1:
        T = T[:-1]
    return np.r_[T, duration]


def instantaneous_from_model(model, track, step: float = 200.0, grid=None, max_repair_fraction: float = 0.2):
    """Fuel-flow curve of ``track`` from cumulative interval predictions.

    ``Q_j`` is the model's prediction over ``[0, T_j]`` with ``T_j = j * step``
    (the final knot is the track end, ``Q_0 = 0``).  Non-monotone predictions
    are repaired by pooling adjacent violators; more than
    ``max_repair_fraction`` of repaired knots is an error.
    """
    from .fuelnet import predict_intervals

    duration = track.duration
    if duration < 3 * step:
        raise ValueError(f"track span {duration:g} s is shorter than 3 x step ({step:g} s)")
    T = cumulative_grid(duration, step)
    t_start = float(track.t[0])
    Q = np.r_[0.0, predict_intervals(model, track, [(t_start, t_start + Tj) for Tj in T[1:]])]
    Q_fixed, repaired = isotonic_repair(Q)
    if repaired > max_repair_fraction * len(Q):
        raise NonMonotoneModelOutput(
            f"{repaired} of {len(Q)} cumulative predictions needed isotonic repair"
        )
    series = FuelSeries(T, Q_fixed)
    curve = build_curve(series)
    flow = None
    if grid is not None:
        grid = np.asarray(grid, dtype=float)
        flow = eval_flow(curve, grid)
    return InstantaneousFlow(series, curve, repaired, grid, flow)
