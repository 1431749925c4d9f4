"""p-th means and cluster costs on contiguous atom ranges.

For ``p > 1`` the p-th mean of a weighted point set is the unique root of

    sum_{x_i <= m} w_i (m - x_i)^(p-1)  =  sum_{x_i > m} w_i (x_i - m)^(p-1),

located by bisection; for ``p = 2`` it is the weighted mean in closed form and
for ``p = 1`` the midpoint of the weighted-median interval.  These scalar
routines are the reference semantics; the solver backends reproduce them with
faster evaluation schemes.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .measure import DiscreteMeasure

__all__ = [
    "AtomRange",
    "pth_mean",
    "median_interval",
    "cluster_cost",
    "optimal_cluster_cost",
]


class AtomRange(NamedTuple):
    """Inclusive index range ``[lo, hi]`` into a measure's atom list."""

    lo: int
    hi: int


def mean_tolerance(x_lo: float, x_hi: float) -> float:
    """Bisection width at which a p-th mean is considered located."""
    return 1e-12 * max(1.0, abs(x_lo), abs(x_hi))


def _check_range(m: DiscreteMeasure, rng) -> tuple[int, int]:
    lo, hi = int(rng[0]), int(rng[1])
    if not (0 <= lo <= hi < m.n):
        raise IndexError(f"atom range [{lo}, {hi}] out of bounds for n={m.n}")
    return lo, hi


def median_interval(m: DiscreteMeasure, rng) -> tuple[float, float]:
    """Endpoints ``(a*, b*)`` of the interval of minimizers of ``a -> sum w|x-a|``.

    Degenerate (``a* == b*``) unless the cumulative weight hits exactly half of
    the range's mass at an atom.
    """
    lo, hi = _check_range(m, rng)
    w = m.weights[lo:hi + 1]
    x = m.atoms[lo:hi + 1]
    cum = np.cumsum(w)
    half = cum[-1] / 2.0
    i = int(np.searchsorted(cum, half, side="left"))
    if cum[i] == half and i + 1 < x.size:
        return float(x[i]), float(x[i + 1])
    return float(x[i]), float(x[i])


def pth_mean(m: DiscreteMeasure, rng, p: float) -> float:
    """The p-th mean of the sub-measure on atoms ``rng.lo .. rng.hi``."""
    lo, hi = _check_range(m, rng)
    if p < 1 or not math.isfinite(p):
        raise ValueError("p must be a finite real >= 1")
    x = m.atoms[lo:hi + 1]
    w = m.weights[lo:hi + 1]
    if x.size == 1:
        return float(x[0])
    if p == 1:
        a, b = median_interval(m, (lo, hi))
        return (a + b) / 2.0
    if p == 2:
        return float(np.sum(w * x) / np.sum(w))
    return _bisect_mean(x, w, p)


def _bisect_mean(x: np.ndarray, w: np.ndarray, p: float) -> float:
    def grad_sign(mid: float) -> float:
        left = x <= mid
        lhs = np.sum(w[left] * (mid - x[left]) ** (p - 1.0))
        rhs = np.sum(w[~left] * (x[~left] - mid) ** (p - 1.0))
        return lhs - rhs

    # bracket between adjacent atoms first so the bisection interval is a
    # single gap; keeps the root resolvable under extreme value spreads
    lo_idx, hi_idx = 0, x.size - 1
    while hi_idx - lo_idx > 1:
        mid_idx = (lo_idx + hi_idx) // 2
        if grad_sign(float(x[mid_idx])) < 0:
            lo_idx = mid_idx
        else:
            hi_idx = mid_idx
    lo, hi = float(x[lo_idx]), float(x[hi_idx])
    tol = mean_tolerance(lo, hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo < tol:
            break
        if grad_sign(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def cluster_cost(m: DiscreteMeasure, rng, p: float, level: float) -> float:
    """``sum_{i in rng} w_i |x_i - level|^p``."""
    lo, hi = _check_range(m, rng)
    if p < 1:
        raise ValueError("p must be >= 1")
    x = m.atoms[lo:hi + 1]
    w = m.weights[lo:hi + 1]
    return float(np.sum(w * np.abs(x - level) ** p))


def optimal_cluster_cost(m: DiscreteMeasure, rng, p: float) -> tuple[float, float]:
    """Best constant approximation of the range: ``(p-th mean, its cost)``."""
    level = pth_mean(m, rng, p)
    return level, cluster_cost(m, rng, p, level)
