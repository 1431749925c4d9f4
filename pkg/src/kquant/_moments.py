"""Prefix-moment tables for fast interval cluster costs and levels.

Internal engine shared by the pure-Python DP backend, tie enumeration, and the
sweep solver.  Coordinates are centered at the data midrange so that binomial
expansions for integer ``p`` stay affine-equivariant and cancellation-safe at
the data's own scale.

Cost conventions match :mod:`kquant.pmean`: for ``p = 1`` costs are evaluated
at an atom of the weighted-median interval (any median point gives the same
cost), while reported levels use the midpoint convention.
"""

from __future__ import annotations

import math

import numpy as np

_BISECT_ITERS = 64

# beyond these ratios, prefix-sum differences lose the small contributions
WEIGHT_RATIO_LIMIT = 1e12
SPREAD_RATIO_LIMIT = 1e15


def extreme_dynamic_range(x: np.ndarray, w: np.ndarray) -> bool:
    if float(w.max()) > WEIGHT_RATIO_LIMIT * float(w.min()):
        return True
    if x.size > 1:
        span = float(x[-1] - x[0])
        min_gap = float(np.diff(x).min())
        if min_gap > 0 and span > SPREAD_RATIO_LIMIT * min_gap:
            return True
    return False


class PrefixMoments:
    """O(1)-per-interval costs for p in {1, 2}, O(log) for integer p, direct otherwise."""

    def __init__(self, x: np.ndarray, w: np.ndarray, p: float):
        if p < 1 or not math.isfinite(p):
            raise ValueError("p must be a finite real >= 1")
        self.x = np.asarray(x, dtype=float)
        self.w = np.asarray(w, dtype=float)
        self.p = float(p)
        self.n = self.x.size
        self.center = 0.5 * (self.x[0] + self.x[-1])
        self.xc = self.x - self.center
        if extreme_dynamic_range(self.x, self.w):
            # prefix differencing would drown the small weights; evaluate
            # every cluster cost directly from its slice instead
            self.kind = "gen"
            degree = 0
        elif p == 1.0:
            self.kind = "one"
            degree = 1
        elif p == 2.0:
            self.kind = "two"
            degree = 2
        elif p == int(p) and p <= 8:
            self.kind = "int"
            degree = int(p)
        else:
            self.kind = "gen"
            degree = 0
        self.tables = None
        if degree:
            tables = np.empty((degree + 1, self.n + 1))
            term = np.ones(self.n)
            for t in range(degree + 1):
                tables[t, 0] = 0.0
                np.cumsum(self.w * term, out=tables[t, 1:])
                if t < degree:
                    term = term * self.xc
            self.tables = tables
        if self.kind == "int":
            q = int(p)
            self.binom_grad = np.array([math.comb(q - 1, t) for t in range(q)])
            self.binom_cost = np.array([math.comb(q, t) for t in range(q + 1)])

    # -- scalar interface ---------------------------------------------------

    def cost(self, i: int, j: int) -> float:
        """Optimal cluster cost of atoms ``i..j`` inclusive."""
        return float(self.costs_iv(np.array([i]), j)[0])

    def mean(self, i: int, j: int) -> float:
        """Level of the optimal constant on atoms ``i..j`` (p=1: median midpoint)."""
        if i == j:
            return float(self.x[i])
        if self.kind == "two":
            T = self.tables
            return self.center + (T[1, j + 1] - T[1, i]) / (T[0, j + 1] - T[0, i])
        if self.kind == "one":
            s, exact = self._median_index(i, j)
            if exact and s + 1 <= j:
                return 0.5 * (self.x[s] + self.x[s + 1])
            return float(self.x[s])
        return self._gen_mean(i, j)

    def _grad_scalar(self, i, j, m):
        left = self.x[i:j + 1] <= m
        xs = self.x[i:j + 1]
        ws = self.w[i:j + 1]
        pm1 = self.p - 1.0
        return (np.sum(ws[left] * (m - xs[left]) ** pm1)
                - np.sum(ws[~left] * (xs[~left] - m) ** pm1))

    def _median_index(self, i, j):
        T0 = self.tables[0]
        target = 0.5 * (T0[i] + T0[j + 1])
        l = int(np.searchsorted(T0, target, side="left"))
        s = min(max(l - 1, i), j)
        return s, T0[s + 1] == target

    # -- vector interface ---------------------------------------------------

    def costs_iv(self, ia: np.ndarray, j: int) -> np.ndarray:
        """Costs of clusters ``ia[l]..j`` for an ascending index vector ``ia``."""
        return self._costs(ia, np.asarray(j))

    def costs_jv(self, i: int, ja: np.ndarray) -> np.ndarray:
        """Costs of clusters ``i..ja[l]``."""
        return self._costs(np.asarray(i), ja)

    def _costs(self, ia, ja):
        if self.kind == "two":
            T = self.tables
            W = T[0, ja + 1] - T[0, ia]
            S1 = T[1, ja + 1] - T[1, ia]
            S2 = T[2, ja + 1] - T[2, ia]
            out = np.maximum(S2 - S1 * S1 / W, 0.0)
            return np.where(ia == ja, 0.0, out)  # exact zero for singletons
        if self.kind == "one":
            out = self._costs_median(ia, ja)
            return np.where(ia == ja, 0.0, out)
        if self.kind == "int":
            shape = np.broadcast_shapes(ia.shape, ja.shape)
            out = self._costs_int(np.broadcast_to(ia, shape).ravel(),
                                  np.broadcast_to(ja, shape).ravel())
            return out.reshape(shape)
        return self._costs_gen(ia, ja)

    def _costs_median(self, ia, ja):
        T0, T1 = self.tables[0], self.tables[1]
        target = 0.5 * (T0[ia] + T0[ja + 1])
        l = np.searchsorted(T0, target, side="left")
        s = np.clip(l - 1, ia, ja)
        ms = self.xc[s]
        left = ms * (T0[s + 1] - T0[ia]) - (T1[s + 1] - T1[ia])
        right = (T1[ja + 1] - T1[s + 1]) - ms * (T0[ja + 1] - T0[s + 1])
        return np.maximum(left + right, 0.0)

    def _costs_int(self, ia, ja):
        q = int(self.p)
        lo = self.xc[ia].astype(float).copy()
        hi = self.xc[ja].astype(float).copy()
        tol = 1e-12 * np.maximum(1.0, np.maximum(np.abs(self.x[ia]), np.abs(self.x[ja])))
        for _ in range(_BISECT_ITERS):
            if np.all(hi - lo < tol):
                break
            mid = 0.5 * (lo + hi)
            neg = self._grad_int(ia, ja, mid) < 0
            lo = np.where(neg, mid, lo)
            hi = np.where(neg, hi, mid)
        m = 0.5 * (lo + hi)
        split = np.searchsorted(self.xc, m, side="right")
        split = np.clip(split, ia, ja + 1)
        T = self.tables
        left = np.zeros_like(m)
        right = np.zeros_like(m)
        for t in range(q + 1):
            coef = self.binom_cost[t]
            st = T[t, split] - T[t, ia]
            left += coef * ((-1.0) ** t) * m ** (q - t) * st
            st2 = T[t, ja + 1] - T[t, split]
            right += coef * ((-m) ** (q - t)) * st2
        single = ia == ja
        out = np.maximum(left + right, 0.0)
        out[single] = 0.0
        return out

    def _grad_int(self, ia, ja, m):
        q = int(self.p)
        split = np.searchsorted(self.xc, m, side="right")
        split = np.clip(split, ia, ja + 1)
        T = self.tables
        lhs = np.zeros_like(m)
        rhs = np.zeros_like(m)
        for t in range(q):
            coef = self.binom_grad[t]
            lhs += coef * ((-1.0) ** t) * m ** (q - 1 - t) * (T[t, split] - T[t, ia])
            rhs += coef * ((-m) ** (q - 1 - t)) * (T[t, ja + 1] - T[t, split])
        return lhs - rhs

    def _costs_gen(self, ia, ja):
        ia_b, ja_b = np.broadcast_arrays(ia, ja)
        out = np.empty(ia_b.shape, dtype=float)
        flat_i, flat_j, flat_o = ia_b.ravel(), ja_b.ravel(), out.ravel()
        for l in range(flat_i.size):
            i, j = int(flat_i[l]), int(flat_j[l])
            if i == j:
                flat_o[l] = 0.0
                continue
            m = self._gen_mean(i, j)
            xs = self.x[i:j + 1]
            ws = self.w[i:j + 1]
            flat_o[l] = max(float(np.sum(ws * np.abs(xs - m) ** self.p)), 0.0)
        return out

    def _gen_mean(self, i, j):
        # stable under extreme value spreads: p = 1 and p = 2 have exact
        # slice-local forms; otherwise bracket the root between adjacent atoms
        # before bisecting, so the working interval is a single gap
        x, w = self.x, self.w
        if self.p == 1.0:
            cw = np.cumsum(w[i:j + 1])
            s = int(np.searchsorted(cw, 0.5 * cw[-1], side="left"))
            return float(x[i + s])
        if self.p == 2.0:
            ws = w[i:j + 1]
            return float(np.sum(ws * x[i:j + 1]) / np.sum(ws))
        lo_idx, hi_idx = i, j
        while hi_idx - lo_idx > 1:
            mid_idx = (lo_idx + hi_idx) // 2
            if self._grad_scalar(i, j, float(x[mid_idx])) < 0:
                lo_idx = mid_idx
            else:
                hi_idx = mid_idx
        lo, hi = float(x[lo_idx]), float(x[hi_idx])
        tol = 1e-12 * max(1.0, abs(lo), abs(hi))
        for _ in range(_BISECT_ITERS):
            if hi - lo < tol:
                break
            mid = 0.5 * (lo + hi)
            if self._grad_scalar(i, j, mid) < 0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)
