"""Pure-Python (NumPy) backend for the contiguous-clustering dynamic program.

``dp_cost_table(x, w, kmax, p)`` returns the table ``cost[t][j]`` = minimal
total cluster cost of the first ``j`` atoms split into exactly ``t`` contiguous
non-empty clusters, each cluster priced at its optimal constant level.

The per-layer minimization uses divide-and-conquer over the row index, valid
because interval cluster costs satisfy the concave quadrangle inequality for
every p >= 1 (the optimal level of a cluster lies inside its value hull, and
|x - a|^p grows monotonically away from a), which makes the argmin split
nondecreasing along each layer.
"""

from __future__ import annotations

import numpy as np

from ._moments import PrefixMoments

BACKEND_NAME = "python"


def dp_cost_table(x: np.ndarray, w: np.ndarray, kmax: int, p: float) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    n = x.size
    if kmax < 1 or kmax > n:
        raise ValueError("kmax must be in [1, n]")
    pm = PrefixMoments(x, w, p)
    cost = np.full((kmax + 1, n + 1), np.inf)
    cost[0, 0] = 0.0
    for t in range(1, kmax + 1):
        prev = cost[t - 1]
        cur = cost[t]
        # D&C over j in [t, n]; candidate predecessor states i in [t-1, j-1]
        stack = [(t, n, t - 1, n - 1)]
        while stack:
            jlo, jhi, ilo, ihi = stack.pop()
            if jlo > jhi:
                continue
            jm = (jlo + jhi) // 2
            ia = np.arange(ilo, min(jm - 1, ihi) + 1)
            vals = prev[ia] + pm.costs_iv(ia, jm - 1)
            r = int(np.argmin(vals))
            cur[jm] = vals[r]
            arg = ilo + r
            stack.append((jlo, jm - 1, ilo, arg))
            stack.append((jm + 1, jhi, arg, ihi))
    return cost
