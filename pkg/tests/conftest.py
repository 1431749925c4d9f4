"""Shared test oracles: independent brute-force implementations used to freeze
expected values.  These deliberately avoid the production code paths (no
prefix sums, no divide-and-conquer, no production root-finding)."""

from __future__ import annotations

import math

import numpy as np
import pytest


def golden_section_min(f, lo, hi, tol=1e-12, iters=300):
    """Scalar minimizer of a unimodal function by golden-section search."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = float(lo), float(hi)
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if b - a < tol * max(1.0, abs(a), abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def subset_costs(x, w, p):
    """Optimal constant-approximation cost of every non-empty atom subset,
    by vectorized golden-section search (independent of the package)."""
    n = x.size
    full = (1 << n) - 1
    masks = np.arange(1, full + 1)
    member = ((masks[:, None] >> np.arange(n)) & 1).astype(float)
    lo = np.where(member > 0, x[None, :], np.inf).min(axis=1)
    hi = np.where(member > 0, x[None, :], -np.inf).max(axis=1)

    def level_costs(t):
        return np.sum(member * w[None, :] * np.abs(x[None, :] - t[:, None]) ** p,
                      axis=1)

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo.copy(), hi.copy()
    for _ in range(140):
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        fc, fd = level_costs(c), level_costs(d)
        take_left = fc < fd
        b = np.where(take_left, d, b)
        a = np.where(take_left, a, c)
    out = np.empty(full + 1)
    out[0] = 0.0
    out[1:] = level_costs(0.5 * (a + b))
    return out


def exhaustive_best_cost(x, w, k, p):
    """Minimal total cost over ALL partitions of the atoms into <= k non-empty
    groups, each priced at its best constant (set-partition DP over bitmasks)."""
    n = x.size
    full = (1 << n) - 1
    cost = subset_costs(x, w, p)
    INF = math.inf
    prev = [INF] * (full + 1)
    prev[0] = 0.0
    best = INF
    for _ in range(min(k, n)):
        cur = [INF] * (full + 1)
        cur[0] = 0.0
        for mask in range(1, full + 1):
            low = mask & -mask
            sub = mask
            b = INF
            while sub:
                if sub & low:
                    v = prev[mask ^ sub] + cost[sub]
                    if v < b:
                        b = v
                sub = (sub - 1) & mask
            cur[mask] = b
        best = min(best, cur[full])
        prev = cur
    return best


def sup_radius_oracle(lows, highs, k):
    """Minimal covering radius by exhaustive candidate enumeration plus an
    independent greedy feasibility check."""
    lows = np.asarray(lows, dtype=float)
    highs = np.asarray(highs, dtype=float)
    J = lows.size

    def feasible(alpha):
        used = 0
        end = -math.inf
        j = 0
        while j < J:
            if highs[j] <= end:
                j += 1
                continue
            if used == k:
                return False
            start = max(lows[j], end)
            if alpha == 0.0 and highs[j] > start:
                return False
            end = start + 2 * alpha
            used += 1
            while j < J and highs[j] <= end:
                j += 1
        return True

    cands = {0.0}
    for m in range(1, k + 1):
        for i in range(J):
            for j in range(i, J):
                cands.add((highs[j] - lows[i]) / (2.0 * m))
    # fp greedy can miss exact equality at an algebraic candidate by one ulp;
    # test feasibility with a relative hair of slack
    return min(c for c in sorted(cands) if feasible(c * (1 + 1e-12) + 1e-300))


def random_measure(rng, n_max=12, scale=3.0, n_min=1):
    """Random strictly-sorted measure with positive weights."""
    n = int(rng.integers(n_min, n_max + 1))
    x = np.unique(np.round(rng.normal(0.0, scale, n), 9))
    while x.size == 0:
        x = np.unique(np.round(rng.normal(0.0, scale, n), 9))
    w = rng.uniform(0.1, 2.0, x.size)
    return x, w


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
