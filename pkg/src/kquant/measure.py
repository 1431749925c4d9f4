"""Weighted discrete measures on the real line and essential-range interval sets.

A :class:`DiscreteMeasure` represents the value distribution of a function as
sorted atoms with positive masses.  All solvers in this package operate on it.
The optional ``infinite_complement`` flag models the situation where, besides
the listed atoms, the function is zero on a region of infinite mass; the only
consequence for approximation is that one level of any candidate step function
is pinned to zero.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "DiscreteMeasure",
    "RangeSet",
    "from_samples",
    "pushforward",
    "discretize_quantile",
    "essential_range",
    "moment_p",
    "read_csv",
    "write_csv",
]


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype).copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class DiscreteMeasure:
    """Sorted weighted atoms ``x_1 < ... < x_n`` with masses ``w_i > 0``.

    Instances are immutable and safe to share across threads.
    """

    atoms: np.ndarray
    weights: np.ndarray
    infinite_complement: bool = False

    def __post_init__(self):
        object.__setattr__(self, "atoms", _frozen_array(self.atoms))
        object.__setattr__(self, "weights", _frozen_array(self.weights))
        x, w = self.atoms, self.weights
        if x.ndim != 1 or w.ndim != 1 or x.shape != w.shape:
            raise ValueError("atoms and weights must be 1-D arrays of equal length")
        if x.size == 0:
            raise ValueError("measure needs at least one atom")
        if not np.all(np.isfinite(x)):
            raise ValueError("atoms must be finite")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weights must be finite and strictly positive")
        if np.any(np.diff(x) <= 0):
            raise ValueError("atoms must be strictly increasing")

    @property
    def n(self) -> int:
        return int(self.atoms.size)

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def scaled_shifted(self, scale: float, shift: float) -> "DiscreteMeasure":
        """Pushforward under ``x -> scale * x + shift`` (``scale > 0``)."""
        if scale <= 0:
            raise ValueError("scale must be positive")
        return DiscreteMeasure(scale * self.atoms + shift, self.weights,
                               self.infinite_complement)

    def __eq__(self, other):
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return (self.infinite_complement == other.infinite_complement
                and np.array_equal(self.atoms, other.atoms)
                and np.array_equal(self.weights, other.weights))


@dataclass(frozen=True)
class RangeSet:
    """Finite union of disjoint closed intervals ``[l_j, u_j]`` in ascending order.

    Points are degenerate intervals.  Consecutive intervals are separated by a
    positive gap (``u_j < l_{j+1}``).
    """

    lows: np.ndarray
    highs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lows", _frozen_array(self.lows))
        object.__setattr__(self, "highs", _frozen_array(self.highs))
        lo, hi = self.lows, self.highs
        if lo.ndim != 1 or lo.shape != hi.shape or lo.size == 0:
            raise ValueError("RangeSet needs matching non-empty endpoint arrays")
        if np.any(hi < lo):
            raise ValueError("interval upper endpoints must dominate lower endpoints")
        if lo.size > 1 and np.any(lo[1:] <= hi[:-1]):
            raise ValueError("intervals must be disjoint with positive gaps")

    @classmethod
    def from_intervals(cls, intervals: Iterable[tuple]) -> "RangeSet":
        pairs = sorted((float(a), float(b)) for a, b in intervals)
        return cls(np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs]))

    @property
    def count(self) -> int:
        return int(self.lows.size)

    def intervals(self) -> list[tuple[float, float]]:
        return [(float(a), float(b)) for a, b in zip(self.lows, self.highs)]

    def span(self) -> tuple[float, float]:
        return float(self.lows[0]), float(self.highs[-1])

    def with_point(self, value: float) -> "RangeSet":
        """Return this set united with the single point ``value``."""
        if np.any((self.lows <= value) & (value <= self.highs)):
            return self
        lo = np.append(self.lows, value)
        hi = np.append(self.highs, value)
        order = np.argsort(lo)
        return RangeSet(lo[order], hi[order])


def from_samples(values: Sequence[float], weights: Sequence[float]) -> DiscreteMeasure:
    """Build a measure from raw samples, merging duplicate values by summing weight."""
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if v.ndim != 1 or w.ndim != 1 or v.shape != w.shape:
        raise ValueError("values and weights must be 1-D and of equal length")
    if v.size == 0:
        raise ValueError("empty input")
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite value in input")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("weights must be finite and strictly positive")
    atoms, inverse = np.unique(v, return_inverse=True)
    mass = np.zeros(atoms.size)
    np.add.at(mass, inverse, w)
    return DiscreteMeasure(atoms, mass)


def pushforward(xs: Sequence[float], fvals: Sequence[float],
                quadrature_weights: Sequence[float]) -> DiscreteMeasure:
    """Distribution of function values ``fvals`` sampled at ``xs``.

    ``xs`` only documents the sampling; the result depends on the values and the
    quadrature weights alone.  Discretization quality is the caller's concern.
    """
    xs = np.asarray(xs, dtype=float)
    fvals = np.asarray(fvals, dtype=float)
    if xs.shape != fvals.shape:
        raise ValueError("sample points and function values must align")
    return from_samples(fvals, quadrature_weights)


def discretize_quantile(quantile: Callable[[float], float], n: int) -> DiscreteMeasure:
    """Equal-weight midpoint-rule discretization of a distribution.

    Places ``n`` atoms at ``quantile((2i-1)/(2n))`` with weight ``1/n`` each,
    merging collisions.  ``quantile`` must be nondecreasing on (0, 1).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    qs = (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)
    vals = np.array([float(quantile(q)) for q in qs])
    if np.any(np.diff(vals) < 0):
        raise ValueError("quantile function is not nondecreasing on the sample grid")
    return from_samples(vals, np.full(n, 1.0 / n))


def essential_range(m: DiscreteMeasure, merge_tol: float = 0.0) -> RangeSet:
    """Essential range of ``m`` as closed intervals, fusing atoms closer than ``merge_tol``."""
    if merge_tol < 0:
        raise ValueError("merge_tol must be nonnegative")
    x = m.atoms
    gaps = np.diff(x)
    # new interval starts wherever the gap to the previous atom is >= merge_tol
    breaks = np.flatnonzero(gaps >= merge_tol) + 1 if merge_tol > 0 else np.arange(1, x.size)
    starts = np.concatenate([[0], breaks])
    ends = np.concatenate([breaks - 1, [x.size - 1]])
    return RangeSet(x[starts], x[ends])


def moment_p(m: DiscreteMeasure, p: float) -> float:
    """``sum_i w_i |x_i|^p`` (the p-th power of the L^p norm of the identity)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return float(np.sum(m.weights * np.abs(m.atoms) ** p))


def read_csv(path_or_file) -> DiscreteMeasure:
    """Read a ``value,weight`` CSV (header optional, weight column optional).

    Values are parsed as binary64.  A missing weight column defaults to 1.0.
    """
    if hasattr(path_or_file, "read"):
        return _read_csv_stream(path_or_file)
    with open(path_or_file, "r", encoding="utf-8", newline="") as fh:
        return _read_csv_stream(fh)


def _read_csv_stream(fh) -> DiscreteMeasure:
    values: list[float] = []
    weights: list[float] = []
    for lineno, row in enumerate(csv.reader(fh), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if lineno == 1 and row[0].strip().lower() == "value":
            continue
        try:
            values.append(float(row[0]))
            weights.append(float(row[1]) if len(row) > 1 and row[1].strip() else 1.0)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: cannot parse record {row!r}") from exc
    if not values:
        raise ValueError("no records in CSV input")
    return from_samples(values, weights)


def write_csv(m: DiscreteMeasure, path_or_file) -> None:
    """Write ``value,weight`` rows with round-trip-safe decimal formatting."""
    if hasattr(path_or_file, "write"):
        _write_csv_stream(m, path_or_file)
        return
    with open(path_or_file, "w", encoding="utf-8", newline="") as fh:
        _write_csv_stream(m, fh)


def _write_csv_stream(m: DiscreteMeasure, fh: io.TextIOBase) -> None:
    fh.write("value,weight\n")
    for x, w in zip(m.atoms, m.weights):
        fh.write(f"{format(x, '.17g')},{format(w, '.17g')}\n")
