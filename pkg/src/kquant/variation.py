"""p-variation of weighted point sets and best-partition variation.

The p-variation of a group of atoms is the normalized pairwise spread

    var_p(group)^p = (1/W) * sum_{i,j in group} w_i w_j |x_i - x_j|^p,

and the k-th total variation minimizes the sum of group variations over
partitions into at most k groups.  The DP solver restricts to contiguous
(value-interval) partitions; the exhaustive solver searches all set partitions
and exists to audit that restriction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .measure import DiscreteMeasure
from .quantizer import solve_dp

__all__ = [
    "VariationResult",
    "AuditRecord",
    "var_p",
    "total_variation_k",
    "total_variation_bruteforce",
    "audit_inequalities",
]

BRUTE_FORCE_MAX_ATOMS = 12


@dataclass(frozen=True)
class VariationResult:
    value: float
    value_pow: float
    partition: tuple
    method: str


def _check_finite_mode(m: DiscreteMeasure) -> None:
    if m.infinite_complement:
        raise ValueError("variation functionals are defined for finite-mode measures")


def var_p(m: DiscreteMeasure, group: Iterable[int], p: float) -> float:
    """p-variation of the sub-measure on the given atom indices (0 if empty)."""
    if p < 1 or not math.isfinite(p):
        raise ValueError("p must be a finite real >= 1")
    idx = np.asarray(sorted(set(int(i) for i in group)), dtype=int)
    if idx.size == 0:
        return 0.0
    if np.any(idx < 0) or np.any(idx >= m.n):
        raise IndexError("atom index out of bounds")
    return _group_pow(m.atoms[idx], m.weights[idx], p) ** (1.0 / p)


def _group_pow(x: np.ndarray, w: np.ndarray, p: float) -> float:
    """``var_p(group)^p`` for explicit atom/weight vectors."""
    W = float(w.sum())
    if x.size <= 1:
        return 0.0
    if p == 2.0:
        s1 = float(np.sum(w * x))
        s2 = float(np.sum(w * x * x))
        return max(2.0 * (s2 - s1 * s1 / W), 0.0)
    diffs = np.abs(x[:, None] - x[None, :]) ** p
    return float((w[:, None] * w[None, :] * diffs).sum() / W)


def _run_pow_table(x: np.ndarray, w: np.ndarray, p: float) -> np.ndarray:
    """``C[i, j] = var_p(atoms i..j)^p`` for all contiguous runs, O(n^2)."""
    n = x.size
    W = np.concatenate([[0.0], np.cumsum(w)])
    S = np.zeros((n, n))  # unnormalized pair sums
    for j in range(1, n):
        tail = w[:j] * (x[j] - x[:j]) ** p
        T = np.cumsum(tail[::-1])[::-1]  # T[i] = sum_{a=i..j-1} w_a (x_j - x_a)^p
        S[:j, j] = S[:j, j - 1] + 2.0 * w[j] * T
    with np.errstate(invalid="ignore", divide="ignore"):
        C = S / (W[None, 1:n + 1] - W[:n, None])
    return np.maximum(np.nan_to_num(C, nan=0.0), 0.0)


def total_variation_k(m: DiscreteMeasure, k: int, p: float) -> VariationResult:
    """Minimal total p-variation over contiguous partitions into <= k runs."""
    _check_finite_mode(m)
    if k < 1:
        raise ValueError("k must be >= 1")
    if p < 1 or not math.isfinite(p):
        raise ValueError("p must be a finite real >= 1")
    x, w = m.atoms, m.weights
    n = m.n
    keff = min(k, n)
    C = _run_pow_table(x, w, p)
    dp = np.full((keff + 1, n + 1), np.inf)
    back = np.zeros((keff + 1, n + 1), dtype=int)
    dp[0, 0] = 0.0
    for t in range(1, keff + 1):
        for j in range(t, n + 1):
            cand = dp[t - 1, t - 1:j] + C[t - 1:j, j - 1]
            r = int(np.argmin(cand))
            dp[t, j] = cand[r]
            back[t, j] = t - 1 + r
    t_best = 1 + int(np.argmin(dp[1:, n]))
    value_pow = max(float(dp[t_best, n]), 0.0)
    groups = []
    j = n
    t = t_best
    while t > 0:
        i = int(back[t, j])
        groups.append(tuple(range(i, j)))
        j = i
        t -= 1
    groups.reverse()
    return VariationResult(value_pow ** (1.0 / p), value_pow, tuple(groups), "dp")


def total_variation_bruteforce(m: DiscreteMeasure, k: int, p: float) -> VariationResult:
    """Exhaustive minimum over ALL set partitions into <= k non-empty groups.

    Exponential; restricted to small measures.  Used to audit the contiguity
    restriction of :func:`total_variation_k`.
    """
    _check_finite_mode(m)
    if k < 1:
        raise ValueError("k must be >= 1")
    n = m.n
    if n > BRUTE_FORCE_MAX_ATOMS:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_MAX_ATOMS} atoms")
    x, w = m.atoms, m.weights
    full = (1 << n) - 1
    pair = (w[:, None] * w[None, :]) * np.abs(x[:, None] - x[None, :]) ** p
    # subset pair sums and masses, built by peeling the lowest bit
    spow = np.zeros(full + 1)
    smass = np.zeros(full + 1)
    cost = np.zeros(full + 1)
    for mask in range(1, full + 1):
        b = (mask & -mask).bit_length() - 1
        rest = mask & (mask - 1)
        cross = 0.0
        rr = rest
        while rr:
            a = (rr & -rr).bit_length() - 1
            cross += pair[b, a]
            rr &= rr - 1
        spow[mask] = spow[rest] + 2.0 * cross
        smass[mask] = smass[rest] + w[b]
        cost[mask] = spow[mask] / smass[mask]
    keff = min(k, n)
    INF = math.inf
    dp = [np.full(full + 1, INF) for _ in range(keff + 1)]
    choice = [np.zeros(full + 1, dtype=np.int64) for _ in range(keff + 1)]
    dp[0][0] = 0.0
    for t in range(1, keff + 1):
        dpt = dp[t]
        dpp = dp[t - 1]
        cht = choice[t]
        dpt[0] = 0.0
        for mask in range(1, full + 1):
            low = mask & -mask
            best = INF
            bsub = 0
            sub = mask
            while sub:
                if sub & low:
                    v = dpp[mask ^ sub] + cost[sub]
                    if v < best:
                        best = v
                        bsub = sub
                sub = (sub - 1) & mask
            if best < dpt[mask]:
                dpt[mask] = best
                cht[mask] = bsub
    t_best = 1 + int(np.argmin([dp[t][full] for t in range(1, keff + 1)]))
    value_pow = max(float(dp[t_best][full]), 0.0)
    groups = []
    mask = full
    t = t_best
    while t > 0 and mask:
        sub = int(choice[t][mask])
        groups.append(tuple(i for i in range(n) if sub >> i & 1))
        mask ^= sub
        t -= 1
    groups.sort()
    return VariationResult(value_pow ** (1.0 / p), value_pow, tuple(groups), "brute_force")


@dataclass(frozen=True)
class AuditRecord:
    """Two-sided comparison of distance and total variation at level k."""

    k: int
    p: float
    d_k: float
    d_next: float
    var_k: float
    lower_ok: bool    # d_k <= var_k
    upper_ok: bool    # var_k <= 2 d_k
    next_ok: bool     # d_{k+1} <= var_k

    @property
    def passed(self) -> bool:
        return self.lower_ok and self.upper_ok and self.next_ok


AUDIT_TOL = 1e-9


def audit_inequalities(m: DiscreteMeasure, k: int, p: float) -> AuditRecord:
    """Check ``D_{p,k} <= Var_{p,k} <= 2 D_{p,k}`` and ``D_{p,k+1} <= Var_{p,k}``."""
    _check_finite_mode(m)
    d_k = solve_dp(m, k, p).error
    d_next = solve_dp(m, k + 1, p).error
    var_k = total_variation_k(m, k, p).value
    return AuditRecord(
        k=k,
        p=p,
        d_k=d_k,
        d_next=d_next,
        var_k=var_k,
        lower_ok=d_k <= var_k + AUDIT_TOL,
        upper_ok=var_k <= 2.0 * d_k + AUDIT_TOL,
        next_ok=d_next <= var_k + AUDIT_TOL,
    )
