"""Error metrics, convergence-rate fits and grouped evaluation tables."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateFit, ShapeMismatch, ZeroReference, ZeroTruth


@dataclass(frozen=True)
class EvalReport:
    mape: float
    rel_l2: float
    n: int
    group: str = "all"

    def __post_init__(self):
        if self.mape < 0 or self.rel_l2 < 0:
            raise ValueError("metrics must be non-negative")


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape or a.size == 0:
        raise ShapeMismatch(f"need equal non-empty lengths, got {a.size} and {b.size}")
    return a, b


def mape(pred, truth) -> float:
    """Mean of ``|(pred - truth) / truth|``."""
    p, t = _pair(pred, truth)
    if np.any(t == 0):
        raise ZeroTruth(f"{int(np.count_nonzero(t == 0))} zero truth value(s)")
    return float(np.mean(np.abs((p - t) / t)))


def rel_l2(f, f_ref, grid) -> float:
    """``||f - f_ref|| / ||f_ref||`` in L2, integrals by the trapezoid rule on ``grid``."""
    f, f_ref = _pair(f, f_ref)
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.shape != f.shape:
        raise ShapeMismatch("grid length differs from the sampled curves")
    den = np.trapezoid(f_ref**2, grid)
    if not den > 0:
        raise ZeroReference("reference curve has zero L2 norm")
    return float(math.sqrt(np.trapezoid((f - f_ref) ** 2, grid) / den))


def convergence_slope(sizes, errors) -> float:
    """Least-squares slope of ``log(error)`` against ``log(size)``.

    The sign is kept: decaying errors give a negative slope, whose magnitude
    is what convergence tables usually call the rate.
    """
    x, y = _pair(sizes, errors)
    if len(x) < 3:
        raise ValueError("need at least 3 points for a convergence fit")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("sizes and errors must be positive")
    lx, ly = np.log(x), np.log(y)
    dx = lx - lx.mean()
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise DegenerateFit("all sizes are equal")
    return float(dx @ (ly - ly.mean()) / sxx)


def duration_buckets(durations, edges=None) -> list[str]:
    """Log-spaced duration bucket labels such as ``"200-400s"``."""
    d = np.asarray(durations, dtype=float)
    if edges is None:
        edges = [200.0 * 2**k for k in range(7)]
    edges = list(edges)
    out = []
    for x in d:
        k = int(np.searchsorted(edges, x, side="right"))
        if k == 0:
            out.append(f"<{edges[0]:g}s")
        elif k == len(edges):
            out.append(f">={edges[-1]:g}s")
        else:
            out.append(f"{edges[k - 1]:g}-{edges[k]:g}s")
    return out


def grouped_mape(pred, truth, keys: Sequence[str]) -> list[EvalReport]:
    """Per-key MAPE reports, ordered by first appearance of each key.

    Interval predictions have no curve to integrate, so ``rel_l2`` here is the
    discrete relative L2 ``||pred - truth|| / ||truth||``.
    """
    p, t = _pair(pred, truth)
    keys = list(keys)
    if len(keys) != len(p):
        raise ShapeMismatch("one group key per prediction required")
    order: dict[str, list[int]] = {}
    for i, k in enumerate(keys):
        order.setdefault(k, []).append(i)
    out = []
    for k, idx in order.items():
        pi, ti = p[idx], t[idx]
        l2 = float(np.linalg.norm(pi - ti) / np.linalg.norm(ti))
        out.append(EvalReport(mape(pi, ti), l2, len(idx), k))
    return out
