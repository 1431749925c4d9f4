"""Solvers for best approximation by step functions taking at most k values.

For a discrete measure the optimal approximant uses value-interval cells, so
the search space reduces to contiguous runs of the sorted atoms:

* :func:`solve_dp` — exact dynamic programming (globally optimal), with tie
  enumeration; in infinite-complement mode one level is pinned to zero.
* :func:`solve_lloyd` — fixed-point iteration alternating midpoint boundaries
  and cell p-th means (may stop at a local optimum).
* :func:`solve_sweep` — propagates levels/boundaries from a candidate first
  boundary ``s`` and scans a grid of such candidates.
* :func:`solve_sup` — sup-norm solver: minimal radius covering of the
  essential range by at most k closed intervals.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from ._backend import dp_cost_table
from ._moments import PrefixMoments
from .measure import DiscreteMeasure, RangeSet
from . import pmean

__all__ = [
    "StepQuantizer",
    "SolveReport",
    "SupSolution",
    "InternalCheckWarning",
    "solve_dp",
    "solve_lloyd",
    "solve_sweep",
    "canonicalize",
    "distance",
    "solve_sup",
    "distance_curve",
]

# relative tolerance used to detect equal-cost partitions
TIE_RTOL = 1e-11
# tolerance scale for special-form verification
SPECIAL_FORM_RTOL = 1e-9

MAX_TIES = 8


class InternalCheckWarning(RuntimeWarning):
    """A structural property that should hold by theory failed numerically."""


def _tie_tol(value: float) -> float:
    return TIE_RTOL * (1.0 + abs(value))


@dataclass(frozen=True)
class StepQuantizer:
    """A step function: ``levels[i]`` applies on ``[boundaries[i-1], boundaries[i])``.

    The first and last cells extend to -inf and +inf.  ``zero_index`` marks the
    pinned zero level produced by infinite-complement solves.  ``special_form``
    records that boundaries are level midpoints and every level is the p-th mean
    of its cell (verified, not assumed).
    """

    levels: np.ndarray
    boundaries: np.ndarray
    zero_index: Optional[int] = None
    special_form: bool = False

    def __post_init__(self):
        lv = np.asarray(self.levels, dtype=float).copy()
        bd = np.asarray(self.boundaries, dtype=float).copy()
        lv.flags.writeable = False
        bd.flags.writeable = False
        object.__setattr__(self, "levels", lv)
        object.__setattr__(self, "boundaries", bd)
        if lv.size < 1:
            raise ValueError("quantizer needs at least one level")
        if np.any(np.diff(lv) <= 0):
            raise ValueError("levels must be strictly increasing")
        if bd.size != lv.size - 1:
            raise ValueError("need exactly one boundary between consecutive levels")
        if bd.size and (np.any(bd < lv[:-1]) or np.any(bd > lv[1:])):
            raise ValueError("boundaries must interleave the levels")
        if self.zero_index is not None and lv[self.zero_index] != 0.0:
            raise ValueError("zero_index must point at an exact zero level")

    @property
    def q(self) -> int:
        return int(self.levels.size)

    def cell_index(self, values) -> np.ndarray:
        """Index of the level applied at each value (cells are ``[r_i, r_{i+1})``)."""
        return np.searchsorted(self.boundaries, np.asarray(values, dtype=float),
                               side="right")

    def __call__(self, values):
        return self.levels[self.cell_index(values)]


@dataclass(frozen=True)
class SolveReport:
    """Solver outcome: quantizer, error, and diagnostics."""

    quantizer: StepQuantizer
    error: float
    error_pow: float
    p: float
    iterations: int
    converged: bool
    ties: tuple = ()
    degenerate: bool = False
    ambiguous_means: bool = False
    method: str = "dp"


class SupSolution(NamedTuple):
    levels: tuple
    radius: float


def _check_kp(k: int, p: float) -> None:
    if k < 1:
        raise ValueError("k must be >= 1")
    if p < 1 or not math.isfinite(p):
        raise ValueError("p must be a finite real >= 1 (use solve_sup for p = inf)")


def _splits_to_runs(splits: Sequence[int]) -> list[tuple[int, int]]:
    starts = [0] + list(splits[:-1])
    return [(s, e - 1) for s, e in zip(starts, splits)]


def _median_ambiguous(m: DiscreteMeasure, runs) -> bool:
    for s, e in runs:
        a, b = pmean.median_interval(m, (s, e))
        if b > a:
            return True
    return False


def _runs_to_quantizer(m: DiscreteMeasure, splits: Sequence[int], p: float) -> StepQuantizer:
    """Build the special-form quantizer of a contiguous run partition."""
    runs = _splits_to_runs(splits)
    lv = np.asarray([pmean.pth_mean(m, r, p) for r in runs])
    # run means are strictly increasing for distinct atoms; dedupe defensively
    if np.any(np.diff(lv) <= 0):
        lv = lv[np.concatenate([[True], np.diff(lv) > 0])]
    bd = 0.5 * (lv[:-1] + lv[1:])
    return _verify_special_form(m, StepQuantizer(lv, bd), p)


def _verify_special_form(m: DiscreteMeasure, qz: StepQuantizer, p: float) -> StepQuantizer:
    """Return ``qz`` with the special_form flag set by explicit verification."""
    lv, bd = qz.levels, qz.boundaries
    scale = max(1.0, float(np.abs(m.atoms).max()))
    tol = SPECIAL_FORM_RTOL * scale
    mid = 0.5 * (lv[:-1] + lv[1:])
    ok = bool(np.all(np.abs(bd - mid) <= tol))
    if ok:
        starts, ends = _cells_from_boundaries(m, bd)
        for i, (s, e) in enumerate(zip(starts, ends)):
            if qz.zero_index is not None and i == qz.zero_index:
                continue
            if s > e:
                ok = False
                break
            if abs(pmean.pth_mean(m, (s, e), p) - lv[i]) > tol:
                ok = False
                break
    return StepQuantizer(lv, bd, zero_index=qz.zero_index, special_form=ok)


def _cells_from_boundaries(m: DiscreteMeasure, bd: np.ndarray):
    pos = np.searchsorted(m.atoms, bd, side="left")
    starts = np.concatenate([[0], pos]).astype(int)
    ends = np.concatenate([pos, [m.n]]).astype(int) - 1
    return starts, ends


# ---------------------------------------------------------------------------
# exact dynamic programming
# ---------------------------------------------------------------------------


def solve_dp(m: DiscreteMeasure, k: int, p: float) -> SolveReport:
    """Globally optimal approximation by at most ``k`` levels in L^p.

    Finite mode: every level is the p-th mean of its cell.  Infinite-complement
    mode: exactly one level is pinned to 0 (the cell of the infinite-mass
    region), and the remaining at most ``k - 1`` levels are cell p-th means.
    Up to eight distinct equal-cost partitions are reported in ``ties``.
    """
    _check_kp(k, p)
    if m.infinite_complement:
        return _solve_dp_infinite(m, k, p)
    x, w = m.atoms, m.weights
    n = m.n
    keff = min(k, n)
    table = dp_cost_table(x, w, keff, p)
    totals = table[1:, n]
    qstar = 1 + int(np.argmin(totals))
    opt = float(totals[qstar - 1])
    partitions, overflow = _tied_partitions(m, p, qstar, opt, MAX_TIES)
    if not partitions:  # numerical safety net: fall back to argmin backtrack
        partitions = [_backtrack_single(m, p, table, qstar)]
    quantizers = [_runs_to_quantizer(m, s, p) for s in partitions]
    primary = quantizers[0]
    ties = tuple(quantizers) if len(quantizers) > 1 else ()
    opt = max(opt, 0.0)
    return SolveReport(
        quantizer=primary,
        error=opt ** (1.0 / p),
        error_pow=opt,
        p=p,
        iterations=0,
        converged=True,
        ties=ties,
        ambiguous_means=(p == 1.0 and _median_ambiguous(m, _splits_to_runs(partitions[0]))),
        method="dp",
    )


def _tied_partitions(m: DiscreteMeasure, p: float, q: int, target: float,
                     limit: int) -> tuple[list[list[int]], bool]:
    """All contiguous partitions into exactly ``q`` runs whose cost matches
    ``target`` (within tie tolerance).

    Exploration prefers balanced splits: at every step the cluster end closest
    to the proportional position is tried first, so the primary partition of a
    heavily tied problem (p = 1 plateaus) stays centered instead of drifting
    toward one side.  Deterministic for fixed inputs.
    """
    x, w = m.atoms, m.weights
    n = m.n
    rev = dp_cost_table(-x[::-1], w[::-1], q, p)
    suffix = rev[:, ::-1]  # suffix[t, i] = cost of atoms i..n-1 in exactly t runs
    pm = PrefixMoments(x, w, p)
    tol = _tie_tol(target)
    results: list[list[int]] = []
    overflow = False

    def rec(i: int, t_left: int, acc: float, splits: list[int]) -> None:
        nonlocal overflow
        if len(results) >= limit:
            overflow = True
            return
        if t_left == 0:
            if i == n:
                results.append(splits)
            return
        ja = np.arange(i, n - t_left + 1)
        run_costs = pm.costs_jv(i, ja)
        rest = suffix[t_left - 1, ja + 1]
        ok = np.flatnonzero(acc + run_costs + rest <= target + tol)
        balance_end = i + max(1, round((n - i) / t_left)) - 1
        order = np.argsort(np.abs(ja[ok] - balance_end), kind="stable")
        for idx in ok[order]:
            rec(int(ja[idx]) + 1, t_left - 1, acc + float(run_costs[idx]),
                splits + [int(ja[idx]) + 1])
            if len(results) >= limit:
                overflow = True
                return

    rec(0, q, 0.0, [])
    return results, overflow


def _backtrack_single(m: DiscreteMeasure, p: float, table: np.ndarray, q: int) -> list[int]:
    pm = PrefixMoments(m.atoms, m.weights, p)
    splits = [m.n]
    j = m.n
    for t in range(q, 1, -1):
        ia = np.arange(t - 1, j)
        vals = table[t - 1, ia] + pm.costs_iv(ia, j - 1)
        i = int(ia[np.argmin(vals)])
        splits.append(i)
        j = i
    return sorted(splits)


# ---------------------------------------------------------------------------
# infinite-complement mode
# ---------------------------------------------------------------------------


def _infinite_tables(m: DiscreteMeasure, kmax: int, p: float):
    """Prefix/suffix run-cost tables and the zero-level cost prefix."""
    x, w = m.atoms, m.weights
    n = m.n
    tmax = min(kmax - 1, n)
    inf_row = np.full(n + 1, np.inf)
    inf_row[0] = 0.0
    if tmax >= 1:
        L = dp_cost_table(x, w, tmax, p)
        rev = dp_cost_table(-x[::-1], w[::-1], tmax, p)
        R = rev[:, ::-1]  # R[t, i] = cost of atoms i..n-1 in exactly t runs
    else:
        L = inf_row.reshape(1, -1)
        R = inf_row[::-1].reshape(1, -1)
    # cumulative minima over the run-count axis ("at most T runs")
    rows = max(kmax, 1)
    BL = np.full((rows, n + 1), np.inf)
    BR = np.full((rows, n + 1), np.inf)
    BL[0] = L[0]
    BR[0] = R[0]
    for T in range(1, rows):
        BL[T] = np.minimum(BL[T - 1], L[T]) if T < L.shape[0] else BL[T - 1]
        BR[T] = np.minimum(BR[T - 1], R[T]) if T < R.shape[0] else BR[T - 1]
    S = np.concatenate([[0.0], np.cumsum(w * np.abs(x) ** p)])
    return L, R, BL, BR, S


def _infinite_opt(k: int, n: int, BL, BR, S) -> tuple[float, np.ndarray]:
    """Best cost over zero-run placements; also the per-(T, end) combo matrix."""
    combos = np.full((k, n + 1), np.inf)
    for T in range(k):
        A = BL[T] - S
        B = S + BR[k - 1 - T]
        combos[T] = np.minimum.accumulate(A) + B
    return float(combos.min()), combos


def _zero_run_score(x: np.ndarray, i: int, mm: int) -> float:
    n = x.size
    if i < mm:
        lb, rb = x[i], x[mm - 1]
    else:
        lb = x[i - 1] if i > 0 else -np.inf
        rb = x[i] if i < n else np.inf
    if lb <= 0.0 <= rb:
        return 0.0
    return min(abs(lb), abs(rb))


def _solve_dp_infinite(m: DiscreteMeasure, k: int, p: float) -> SolveReport:
    x, w = m.atoms, m.weights
    n = m.n
    L, R, BL, BR, S = _infinite_tables(m, k, p)
    opt, combos = _infinite_opt(k, n, BL, BR, S)
    tol = _tie_tol(opt)

    # collect optimal (T, zero-run start i, zero-run end mm) placements,
    # preferring zero runs whose value hull contains or abuts 0
    placements = []
    for T in range(k):
        A = BL[T] - S
        B = S + BR[k - 1 - T]
        for mm in np.flatnonzero(combos[T] <= opt + tol):
            mm = int(mm)
            for i in np.flatnonzero(A[: mm + 1] + B[mm] <= opt + tol):
                placements.append((_zero_run_score(x, int(i), mm), int(i), mm, T))
                if len(placements) > 4 * MAX_TIES:
                    break
            if len(placements) > 4 * MAX_TIES:
                break
    placements.sort()
    seen = set()
    quantizers = []
    for _, i, mm, T in placements:
        key = (i, mm, T)
        if key in seen:
            continue
        seen.add(key)
        left = _side_partition(L, m, p, i, T, prefix=True)
        right = _side_partition(R, m, p, mm, k - 1 - T, prefix=False)
        if left is None or right is None:
            continue
        quantizers.append(_infinite_quantizer(m, p, left, i, mm, right))
        if len(quantizers) >= MAX_TIES:
            break
    if not quantizers:
        raise RuntimeError("infinite-mode DP failed to reconstruct a partition")
    primary = quantizers[0]
    ties = tuple(quantizers) if len(quantizers) > 1 else ()
    opt = max(opt, 0.0)
    return SolveReport(
        quantizer=primary,
        error=opt ** (1.0 / p),
        error_pow=opt,
        p=p,
        iterations=0,
        converged=True,
        ties=ties,
        method="dp",
    )


def _infinite_quantizer(m: DiscreteMeasure, p: float, left: list[int], i: int,
                        mm: int, right: list[int]) -> StepQuantizer:
    runs = []
    prev = 0
    for e in left:
        runs.append((prev, e - 1))
        prev = e
    zero_slot = len(runs)
    prev = mm
    for e in right:
        runs.append((prev, e - 1))
        prev = e
    levels = [pmean.pth_mean(m, r, p) for r in runs]
    levels.insert(zero_slot, 0.0)
    lv = np.sort(np.asarray(levels, dtype=float), kind="stable")
    dup = np.concatenate([[False], np.diff(lv) <= 0])
    lv = lv[~dup]
    zidx = int(np.searchsorted(lv, 0.0, side="left"))
    if zidx == lv.size or lv[zidx] != 0.0:
        # a run mean collided with the pinned zero and won the dedupe; pin it
        zidx = max(min(zidx, lv.size - 1), 0)
        lv = lv.copy()
        lv[zidx] = 0.0
    bd = 0.5 * (lv[:-1] + lv[1:])
    qz = StepQuantizer(lv, bd, zero_index=zidx)
    return _verify_special_form(m, qz, p)


def _side_partition(table, m: DiscreteMeasure, p: float, limit: int,
                    T: int, prefix: bool) -> Optional[list[int]]:
    """Backtrack one optimal run partition of a prefix ``[0, limit)`` or suffix
    ``[limit, n)`` using at most ``T`` runs; returns ascending split ends."""
    n = m.n
    size = limit if prefix else n - limit
    if size == 0:
        return []
    if T < 1:
        return None
    pm = PrefixMoments(m.atoms, m.weights, p)
    # smallest run count achieving the best value
    tmax = min(T, table.shape[0] - 1)
    col = np.array([table[t, limit] for t in range(tmax + 1)])
    t = int(np.argmin(col))
    target = float(col[t])
    if not math.isfinite(target):
        return None
    tol = _tie_tol(target)
    splits = []
    if prefix:
        j = limit
        while t > 0:
            ia = np.arange(t - 1, j)
            vals = table[t - 1, ia] + pm.costs_iv(ia, j - 1)
            good = np.flatnonzero(vals <= table[t, j] + tol)
            i = int(ia[good[0]]) if good.size else int(ia[np.argmin(vals)])
            splits.append(j)
            j = i
            t -= 1
        return sorted(splits)
    # suffix: table rows are R[t, i] = cost of atoms i..n-1 in t runs
    i = limit
    while t > 0:
        ja = np.arange(i, n - t + 1)
        vals = pm.costs_jv(i, ja) + table[t - 1, ja + 1]
        good = np.flatnonzero(vals <= table[t, i] + tol)
        j = int(ja[good[0]]) if good.size else int(ja[np.argmin(vals)])
        splits.append(j + 1)
        i = j + 1
        t -= 1
    return splits


# ---------------------------------------------------------------------------
# Lloyd fixed-point iteration
# ---------------------------------------------------------------------------


def solve_lloyd(m: DiscreteMeasure, k: int, p: float,
                init_levels: Optional[Sequence[float]] = None,
                tol: float = 1e-10, max_iter: int = 500) -> SolveReport:
    """Alternating optimization: boundaries to level midpoints, levels to cell
    p-th means.  Each half-step is an exact coordinate minimization, so the
    objective never increases; the fixed point may still be a local optimum.
    Empty cells are deleted (no reseeding) and flagged as degenerate.
    """
    _check_kp(k, p)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if m.infinite_complement:
        raise ValueError("solve_lloyd supports finite-mode measures only; use solve_dp")
    x, w = m.atoms, m.weights
    if init_levels is None:
        levels = _quantile_levels(m, k)
    else:
        levels = np.asarray(init_levels, dtype=float)
        if levels.ndim != 1 or levels.size < 1 or np.any(np.diff(levels) <= 0):
            raise ValueError("init_levels must be strictly increasing")
    degenerate = False
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        bd = 0.5 * (levels[:-1] + levels[1:])
        starts, ends = _cells_from_boundaries(m, bd)
        occupied = starts <= ends
        if not np.all(occupied):
            levels = levels[occupied]
            degenerate = True
            continue
        new = np.array([pmean.pth_mean(m, (s, e), p)
                        for s, e in zip(starts, ends)])
        delta = float(np.max(np.abs(new - levels)))
        levels = new
        if delta < tol:
            converged = True
            break
    bd = 0.5 * (levels[:-1] + levels[1:])
    qz = _verify_special_form(m, StepQuantizer(levels, bd), p)
    err = distance(m, qz, p)
    starts, ends = _cells_from_boundaries(m, qz.boundaries)
    runs = list(zip(starts, ends))
    return SolveReport(
        quantizer=qz,
        error=err,
        error_pow=err ** p,
        p=p,
        iterations=iterations,
        converged=converged,
        degenerate=degenerate,
        ambiguous_means=(p == 1.0 and _median_ambiguous(m, runs)),
        method="lloyd",
    )


def _quantile_levels(m: DiscreteMeasure, k: int) -> np.ndarray:
    cum = np.cumsum(m.weights)
    targets = (2.0 * np.arange(1, k + 1) - 1.0) / (2.0 * k) * cum[-1]
    idx = np.searchsorted(cum, targets, side="left")
    return np.unique(m.atoms[np.clip(idx, 0, m.n - 1)])


# ---------------------------------------------------------------------------
# boundary-propagation sweep
# ---------------------------------------------------------------------------


def solve_sweep(m: DiscreteMeasure, k: int, p: float,
                s_grid: Sequence[float]) -> SolveReport:
    """Scan candidate first boundaries ``s``.

    For each ``s``: the first cell is the atoms below ``s`` with its p-th mean
    ``a_1``; then repeatedly the next level is reflected through the boundary
    (``a_{i+1} = 2 r_{i+1} - a_i``) and the next boundary is located by
    monotone search so the cell's p-th mean matches the propagated level.  A
    candidate is inadmissible when the propagated level exceeds every
    achievable cell mean.  The best admissible candidate is reported (levels
    re-fitted to cell means); if none is admissible, falls back to the exact
    solver with ``k - 1`` levels.
    """
    _check_kp(k, p)
    if k < 2:
        raise ValueError("solve_sweep requires k >= 2")
    if m.infinite_complement:
        raise ValueError("solve_sweep supports finite-mode measures only; use solve_dp")
    s_values = np.asarray(s_grid, dtype=float)
    if s_values.size == 0:
        raise ValueError("s_grid must not be empty")
    x, w = m.atoms, m.weights
    if np.any(s_values <= x[0]) or np.any(s_values >= x[-1]):
        raise ValueError("s_grid values must lie strictly inside the atom range")
    pm = PrefixMoments(x, w, p)
    best_r = np.inf
    best_splits = None
    admissible = 0
    for s in s_values:
        out = _sweep_candidate(pm, x, w, k, p, float(s))
        if out is None:
            continue
        admissible += 1
        r_value, splits = out
        if r_value < best_r:
            best_r = r_value
            best_splits = splits
    if best_splits is None:
        fallback = solve_dp(m, k - 1, p)
        return SolveReport(
            quantizer=fallback.quantizer,
            error=fallback.error,
            error_pow=fallback.error_pow,
            p=p,
            iterations=0,
            converged=False,
            degenerate=True,
            method="sweep",
        )
    qz = _runs_to_quantizer(m, best_splits, p)
    err = distance(m, qz, p)
    return SolveReport(
        quantizer=qz,
        error=err,
        error_pow=err ** p,
        p=p,
        iterations=admissible,
        converged=True,
        ambiguous_means=(p == 1.0 and _median_ambiguous(m, _splits_to_runs(best_splits))),
        method="sweep",
    )


def _sweep_candidate(pm: PrefixMoments, x, w, k, p, s):
    n = x.size
    i1 = int(np.searchsorted(x, s, side="left"))
    if i1 == 0 or i1 > n - (k - 1):
        return None
    level = pm.mean(0, i1 - 1)
    acc = pm.cost(0, i1 - 1)
    boundary = s
    start = i1
    splits = [i1]
    for c in range(2, k):
        target = 2.0 * boundary - level
        hi_limit = n - (k - c) - 1
        t = _mean_search(pm, start, hi_limit, target)
        if t is None:
            return None
        acc += float(np.sum(w[start:t + 1] * np.abs(x[start:t + 1] - target) ** p))
        boundary = 0.5 * (x[t] + x[t + 1])
        level = target
        start = t + 1
        splits.append(start)
    acc += pm.cost(start, n - 1)
    splits.append(n)
    return acc, splits


def _mean_search(pm: PrefixMoments, start: int, hi_limit: int, target: float):
    """Smallest-gap cell end ``t`` with ``mean(start..t)`` closest to ``target``;
    None when the target exceeds every achievable mean (inadmissible)."""
    if hi_limit < start:
        return None
    if pm.mean(start, hi_limit) < target:
        return None
    lo, hi = start, hi_limit
    while lo < hi:
        mid = (lo + hi) // 2
        if pm.mean(start, mid) >= target:
            hi = mid
        else:
            lo = mid + 1
    if lo > start:
        below = abs(pm.mean(start, lo - 1) - target)
        above = abs(pm.mean(start, lo) - target)
        if below <= above:
            return lo - 1
    return lo


# ---------------------------------------------------------------------------
# canonical form, distance, curves
# ---------------------------------------------------------------------------


def canonicalize(m: DiscreteMeasure, qz: StepQuantizer, p: float,
                 max_passes: int = 100) -> StepQuantizer:
    """Rewrite a quantizer into special form without increasing its cost.

    Repeatedly reassigns cells by nearest level (midpoint boundaries), drops
    empty cells, and refits levels as cell p-th means, until the assignment is
    stable.  Both half-steps are exact coordinate minimizations, so the
    objective is nonincreasing.  A pinned zero level (infinite mode) is kept.
    """
    _check_kp(1, p)
    levels = np.unique(qz.levels)
    pinned = qz.zero_index is not None
    if pinned and not np.any(levels == 0.0):
        levels = np.sort(np.append(levels, 0.0))
    prev_cells = None
    for _ in range(max_passes):
        bd = 0.5 * (levels[:-1] + levels[1:])
        starts, ends = _cells_from_boundaries(m, bd)
        zi = int(np.searchsorted(levels, 0.0)) if pinned else -1
        occupied = starts <= ends
        if pinned:
            occupied[zi] = True  # the zero cell persists even when empty
        if not np.all(occupied):
            levels = levels[occupied]
            prev_cells = None
            continue
        cells = (tuple(starts), tuple(ends))
        if cells == prev_cells:
            break
        prev_cells = cells
        new = np.empty(levels.size)
        for i, (s, e) in enumerate(zip(starts, ends)):
            if pinned and i == zi:
                new[i] = 0.0
            elif s > e:
                new[i] = levels[i]
            else:
                new[i] = pmean.pth_mean(m, (s, e), p)
        order = np.argsort(new, kind="stable")
        new = new[order]
        dup = np.concatenate([[False], np.diff(new) <= 0])
        if np.any(dup):
            new = new[~dup]
            prev_cells = None
        levels = new
    bd = 0.5 * (levels[:-1] + levels[1:])
    zidx = int(np.searchsorted(levels, 0.0)) if pinned else None
    return _verify_special_form(m, StepQuantizer(levels, bd, zero_index=zidx), p)


def distance(m: DiscreteMeasure, qz: StepQuantizer, p: float) -> float:
    """L^p distance between the measure's identity function and the quantizer."""
    _check_kp(1, p)
    if m.infinite_complement:
        zero_cell = int(np.searchsorted(qz.boundaries, 0.0, side="right"))
        if qz.levels[zero_cell] != 0.0:
            return math.inf  # infinite-mass region forces a zero level
    vals = qz(m.atoms)
    cost = float(np.sum(m.weights * np.abs(m.atoms - vals) ** p))
    return cost ** (1.0 / p)


def distance_curve(m: DiscreteMeasure, p: float, k_max: int) -> list[float]:
    """``D_{p,k}`` for ``k = 1..k_max`` (exact DP), with monotonicity checks."""
    _check_kp(k_max, p)
    n = m.n
    if m.infinite_complement:
        L, R, BL, BR, S = _infinite_tables(m, k_max, p)
        errors = []
        for k in range(1, k_max + 1):
            rows = k
            opt, _ = _infinite_opt(k, n, BL[:rows], BR[:rows], S)
            errors.append(max(opt, 0.0) ** (1.0 / p))
    else:
        keff = min(k_max, n)
        table = dp_cost_table(m.atoms, m.weights, keff, p)
        best = np.minimum.accumulate(table[1:, n])
        errors = [max(float(best[min(k, keff) - 1]), 0.0) ** (1.0 / p)
                  for k in range(1, k_max + 1)]
    _check_strict_decrease(errors)
    return errors


def _check_strict_decrease(errors: Sequence[float]) -> None:
    scale = max(errors[0], 1e-300)
    for a, b in zip(errors, errors[1:]):
        if b > a + 1e-11 * scale:
            warnings.warn("distance curve is not nonincreasing",
                          InternalCheckWarning, stacklevel=3)
        elif b > 1e-12 * scale and b > a - 1e-13 * scale:
            warnings.warn("distance curve stalled before reaching zero",
                          InternalCheckWarning, stacklevel=3)


# ---------------------------------------------------------------------------
# sup-norm (p = infinity)
# ---------------------------------------------------------------------------


def solve_sup(r: RangeSet, k: int) -> SupSolution:
    """Minimal radius such that at most ``k`` closed intervals cover ``r``.

    Exact: the optimal radius is of the form ``(u_j - l_i) / (2m)`` for some
    pair of interval endpoints and some chain length ``m <= k``; a continuous
    bisection brackets the threshold and the radius is snapped to the smallest
    feasible candidate.  Returned levels are the greedy cover's centers.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    lows, highs = r.lows, r.highs
    feasible0, centers0 = _greedy_cover(lows, highs, 0.0, k)
    if feasible0:
        return SupSolution(tuple(centers0), 0.0)
    lo = 0.0
    hi = 0.5 * (highs[-1] - lows[0])
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _greedy_cover(lows, highs, mid, k)[0]:
            hi = mid
        else:
            lo = mid
    slack = 4.0 * np.finfo(float).eps * max(1.0, abs(hi))
    radius = _snap_radius(lows, highs, k, lo - slack)
    for _ in range(8):  # walk past fp-adjacent infeasible candidates
        if radius is None or radius > hi + slack:
            radius = hi
            break
        if _greedy_cover(lows, highs, radius, k)[0]:
            break
        radius = _snap_radius(lows, highs, k, radius + slack)
    else:
        radius = hi
    feasible, centers = _greedy_cover(lows, highs, radius, k)
    return SupSolution(tuple(centers), float(radius))


def _greedy_cover(lows, highs, alpha, k):
    """Left-to-right cover with intervals of radius ``alpha``; caps at k+1."""
    centers = []
    j = 0
    J = lows.size
    cover_end = -math.inf
    if alpha == 0.0:
        if np.all(highs == lows) and J <= k:
            return True, [float(v) for v in lows]
        return False, []
    while j < J:
        if highs[j] <= cover_end:
            j += 1
            continue
        if len(centers) >= k:
            return False, centers
        start = lows[j] if lows[j] > cover_end else cover_end
        centers.append(float(start + alpha))
        cover_end = start + 2.0 * alpha
        while j < J and highs[j] <= cover_end:
            j += 1
    return True, centers


def _snap_radius(lows, highs, k, threshold):
    """Smallest candidate radius ``(u_j - l_i)/(2m) >= threshold``."""
    best = None
    for mcount in range(1, k + 1):
        limit = highs - 2.0 * mcount * threshold
        idx = np.searchsorted(lows, limit, side="right") - 1
        idx = np.minimum(idx, np.arange(lows.size))
        valid = idx >= 0
        if not np.any(valid):
            continue
        cand = (highs[valid] - lows[idx[valid]]) / (2.0 * mcount)
        cand = cand[cand >= threshold]
        if cand.size:
            cmin = float(cand.min())
            if best is None or cmin < best:
                best = cmin
    return best
