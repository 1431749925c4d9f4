# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled backend for the contiguous-clustering dynamic program.

Same contract as kquant._core_py.dp_cost_table; see that module for the
algorithmic notes (divide-and-conquer over monotone argmin splits).
"""

from libc.math cimport pow, fabs

from math import comb

import numpy as np

BACKEND_NAME = "cython"

_STACK_CAP = 256


cdef inline Py_ssize_t _lower_bound(const double[::1] a, Py_ssize_t lo,
                                    Py_ssize_t hi, double v) noexcept nogil:
    # first index l in [lo, hi) with a[l] >= v; hi if none
    cdef Py_ssize_t mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] >= v:
            hi = mid
        else:
            lo = mid + 1
    return lo


cdef inline Py_ssize_t _upper_bound(const double[::1] a, Py_ssize_t lo,
                                    Py_ssize_t hi, double v) noexcept nogil:
    # first index l in [lo, hi) with a[l] > v; hi if none
    cdef Py_ssize_t mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] > v:
            hi = mid
        else:
            lo = mid + 1
    return lo


cdef inline double _ipow(double base, int e) noexcept nogil:
    # exponentiation by squaring for the small integer exponents used here
    cdef double out = 1.0
    while e > 0:
        if e & 1:
            out *= base
        base *= base
        e >>= 1
    return out


cdef inline double _tol_for(double a, double b) noexcept nogil:
    cdef double s = fabs(a)
    if fabs(b) > s:
        s = fabs(b)
    if s < 1.0:
        s = 1.0
    return 1e-12 * s


cdef bint _extreme_range(const double[::1] x, const double[::1] w) noexcept:
    # mirrors kquant._moments.extreme_dynamic_range
    cdef Py_ssize_t n = x.shape[0], l
    cdef double wmin = w[0], wmax = w[0], gap, min_gap
    for l in range(1, n):
        if w[l] < wmin:
            wmin = w[l]
        if w[l] > wmax:
            wmax = w[l]
    if wmax > 1e12 * wmin:
        return True
    if n > 1:
        min_gap = x[1] - x[0]
        for l in range(2, n):
            gap = x[l] - x[l - 1]
            if gap < min_gap:
                min_gap = gap
        if min_gap > 0 and x[n - 1] - x[0] > 1e15 * min_gap:
            return True
    return False


cdef class _Engine:
    cdef const double[::1] x, w
    cdef double[::1] xc
    cdef double[:, ::1] T
    cdef double[::1] bgrad, bcost
    cdef Py_ssize_t n
    cdef int kind          # 1: p==1, 2: p==2, 3: small integer p, 4: generic
    cdef int q
    cdef double p, center

    def __init__(self, const double[::1] x, const double[::1] w, double p):
        cdef Py_ssize_t n = x.shape[0]
        cdef Py_ssize_t l
        cdef int deg, t, rep
        cdef double acc, term
        cdef double[::1] xcv
        cdef double[:, ::1] Tv
        self.x = x
        self.w = w
        self.p = p
        self.n = n
        self.center = 0.5 * (x[0] + x[n - 1])
        xcv = np.empty(n)
        for l in range(n):
            xcv[l] = x[l] - self.center
        self.xc = xcv
        if _extreme_range(x, w):
            # prefix differencing would drown the small weights; fall back to
            # direct per-cluster evaluation
            self.kind = 4
            deg = 0
        elif p == 1.0:
            self.kind = 1
            deg = 1
        elif p == 2.0:
            self.kind = 2
            deg = 2
        elif p == <double>(<int>p) and p <= 8.0:
            self.kind = 3
            deg = <int>p
        else:
            self.kind = 4
            deg = 0
        self.q = deg
        if self.kind != 4:
            Tv = np.empty((deg + 1, n + 1))
            for t in range(deg + 1):
                Tv[t, 0] = 0.0
                acc = 0.0
                for l in range(n):
                    term = w[l]
                    for rep in range(t):
                        term *= xcv[l]
                    acc += term
                    Tv[t, l + 1] = acc
            self.T = Tv
        if self.kind == 3:
            self.bgrad = np.array([float(comb(deg - 1, t)) for t in range(deg)])
            self.bcost = np.array([float(comb(deg, t)) for t in range(deg + 1)])

    cdef double icost(self, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
        # optimal cluster cost of atoms i..j inclusive
        if i >= j:
            return 0.0
        if self.kind == 2:
            return self._cost_p2(i, j)
        if self.kind == 1:
            return self._cost_p1(i, j)
        if self.kind == 3:
            return self._cost_int(i, j)
        return self._cost_gen(i, j)

    cdef inline double _cost_p2(self, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
        cdef double W = self.T[0, j + 1] - self.T[0, i]
        cdef double S1 = self.T[1, j + 1] - self.T[1, i]
        cdef double S2 = self.T[2, j + 1] - self.T[2, i]
        cdef double c = S2 - S1 * S1 / W
        return c if c > 0.0 else 0.0

    cdef inline double _cost_p1(self, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
        cdef double target = 0.5 * (self.T[0, i] + self.T[0, j + 1])
        cdef Py_ssize_t l = _lower_bound(self.T[0], i + 1, j + 2, target)
        cdef Py_ssize_t s = l - 1
        cdef double ms, c
        if s < i:
            s = i
        elif s > j:
            s = j
        ms = self.xc[s]
        c = (ms * (self.T[0, s + 1] - self.T[0, i])
             - (self.T[1, s + 1] - self.T[1, i])
             + (self.T[1, j + 1] - self.T[1, s + 1])
             - ms * (self.T[0, j + 1] - self.T[0, s + 1]))
        return c if c > 0.0 else 0.0

    cdef inline double _grad_int(self, Py_ssize_t i, Py_ssize_t j, double m,
                                 Py_ssize_t split) noexcept nogil:
        cdef double lhs = 0.0, rhs = 0.0, sgn = 1.0
        cdef int t
        for t in range(self.q):
            lhs += self.bgrad[t] * sgn * _ipow(m, self.q - 1 - t) * (self.T[t, split] - self.T[t, i])
            rhs += self.bgrad[t] * _ipow(-m, self.q - 1 - t) * (self.T[t, j + 1] - self.T[t, split])
            sgn = -sgn
        return lhs - rhs

    cdef double _cost_int(self, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
        cdef double lo = self.xc[i], hi = self.xc[j], mid, m, left, right, sgn, c
        cdef double tol = _tol_for(self.x[i], self.x[j])
        cdef Py_ssize_t split, wlo = i + 1, whi = j + 1
        cdef int it, t
        for it in range(64):
            if hi - lo < tol:
                break
            mid = 0.5 * (lo + hi)
            split = _upper_bound(self.xc, wlo, whi, mid)
            if self._grad_int(i, j, mid, split) < 0.0:
                lo = mid
                wlo = split
            else:
                hi = mid
                whi = split
        m = 0.5 * (lo + hi)
        split = _upper_bound(self.xc, i, j + 1, m)
        left = 0.0
        right = 0.0
        sgn = 1.0
        for t in range(self.q + 1):
            left += self.bcost[t] * sgn * _ipow(m, self.q - t) * (self.T[t, split] - self.T[t, i])
            right += self.bcost[t] * _ipow(-m, self.q - t) * (self.T[t, j + 1] - self.T[t, split])
            sgn = -sgn
        c = left + right
        return c if c > 0.0 else 0.0

    cdef inline double _grad_gen(self, Py_ssize_t i, Py_ssize_t j, double m) noexcept nogil:
        cdef double lhs = 0.0, rhs = 0.0, pm1 = self.p - 1.0
        cdef Py_ssize_t l
        for l in range(i, j + 1):
            if self.x[l] <= m:
                lhs += self.w[l] * pow(m - self.x[l], pm1)
            else:
                rhs += self.w[l] * pow(self.x[l] - m, pm1)
        return lhs - rhs

    cdef double _mean_gen(self, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
        # stable under extreme value spreads: p = 1 and p = 2 have exact
        # slice-local forms; otherwise bracket the root between adjacent atoms
        # before bisecting, so the working interval is a single gap
        cdef double half, acc, lo, hi, mid, tol
        cdef Py_ssize_t l, lo_idx, hi_idx, mid_idx
        cdef int it
        if self.p == 1.0:
            half = 0.0
            for l in range(i, j + 1):
                half += self.w[l]
            half *= 0.5
            acc = 0.0
            for l in range(i, j + 1):
                acc += self.w[l]
                if acc >= half:
                    return self.x[l]
            return self.x[j]
        if self.p == 2.0:
            half = 0.0
            acc = 0.0
            for l in range(i, j + 1):
                half += self.w[l]
                acc += self.w[l] * self.x[l]
            return acc / half
        lo_idx = i
        hi_idx = j
        while hi_idx - lo_idx > 1:
            mid_idx = (lo_idx + hi_idx) >> 1
            if self._grad_gen(i, j, self.x[mid_idx]) < 0.0:
                lo_idx = mid_idx
            else:
                hi_idx = mid_idx
        lo = self.x[lo_idx]
        hi = self.x[hi_idx]
        tol = _tol_for(lo, hi)
        for it in range(64):
            if hi - lo < tol:
                break
            mid = 0.5 * (lo + hi)
            if self._grad_gen(i, j, mid) < 0.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    cdef double _cost_gen(self, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
        cdef double m = self._mean_gen(i, j), c = 0.0
        cdef Py_ssize_t l
        for l in range(i, j + 1):
            c += self.w[l] * pow(fabs(self.x[l] - m), self.p)
        return c if c > 0.0 else 0.0


def dp_cost_table(x, w, kmax, p):
    xa = np.ascontiguousarray(x, dtype=np.float64)
    wa = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = xa.shape[0]
    cdef Py_ssize_t kk = kmax
    cdef double pp = p
    if kk < 1 or kk > n:
        raise ValueError("kmax must be in [1, n]")
    cdef _Engine eng = _Engine(xa, wa, pp)
    out = np.full((kk + 1, n + 1), np.inf)
    cdef double[:, ::1] cost = out
    cost[0, 0] = 0.0

    cdef Py_ssize_t[:, ::1] stack = np.empty((_STACK_CAP, 4), dtype=np.intp)
    cdef Py_ssize_t sp, t, jlo, jhi, ilo, ihi, jm, i, arg, iend
    cdef double best, v

    for t in range(1, kk + 1):
        stack[0, 0] = t; stack[0, 1] = n; stack[0, 2] = t - 1; stack[0, 3] = n - 1
        sp = 1
        while sp > 0:
            sp -= 1
            jlo = stack[sp, 0]; jhi = stack[sp, 1]
            ilo = stack[sp, 2]; ihi = stack[sp, 3]
            if jlo > jhi:
                continue
            jm = (jlo + jhi) >> 1
            iend = jm - 1 if jm - 1 < ihi else ihi
            best = cost[t - 1, ilo] + eng.icost(ilo, jm - 1)
            arg = ilo
            for i in range(ilo + 1, iend + 1):
                v = cost[t - 1, i] + eng.icost(i, jm - 1)
                if v < best:
                    best = v
                    arg = i
            cost[t, jm] = best
            if sp + 2 > _STACK_CAP:
                raise RuntimeError("divide-and-conquer stack overflow")
            stack[sp, 0] = jlo; stack[sp, 1] = jm - 1
            stack[sp, 2] = ilo; stack[sp, 3] = arg
            sp += 1
            stack[sp, 0] = jm + 1; stack[sp, 1] = jhi
            stack[sp, 2] = arg; stack[sp, 3] = ihi
            sp += 1
    return out
