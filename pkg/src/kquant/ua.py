"""Uniform-approximability diagnostics for finite function families.

A family is uniformly approximable when one common level budget k serves every
member to accuracy eps; ``family_N`` computes the least such k for the given
(finite) family, ``family_decay`` produces the decay curves that certify it,
and ``adversarial_ball_family`` builds the normalized spike family showing the
unit ball of L^p is not uniformly approximable (its relative approximation
error admits an explicit lower bound).

Verdicts for finite families are certificates about their members, not proofs
about infinite classes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .measure import DiscreteMeasure, RangeSet, essential_range
from .quantizer import distance_curve, solve_sup
from .variation import total_variation_k

__all__ = [
    "FunctionFamily",
    "FamilyDiagnostics",
    "SandwichRecord",
    "covering_number",
    "min_levels",
    "family_N",
    "family_decay",
    "adversarial_ball_family",
    "linf_ball_bound_audit",
]


@dataclass(frozen=True)
class FunctionFamily:
    """Labelled measures sharing the same mode flag."""

    members: tuple
    description: str = ""

    def __post_init__(self):
        members = tuple((str(label), m) for label, m in self.members)
        object.__setattr__(self, "members", members)
        if not members:
            raise ValueError("family must have at least one member")
        modes = {m.infinite_complement for _, m in members}
        if len(modes) != 1:
            raise ValueError("family members must share the infinite_complement flag")

    @property
    def infinite_complement(self) -> bool:
        return self.members[0][1].infinite_complement

    def measures(self):
        return [m for _, m in self.members]


@dataclass(frozen=True)
class SandwichRecord:
    """Variation-based bracketing of the family level requirement at one eps."""

    eps: float
    n_eps: int
    r_eps: Optional[int]       # least k with sup Var_{p,k} <= eps
    r_2eps: Optional[int]
    lower_ok: bool             # r_2eps <= n_eps
    upper_ok: bool             # n_eps <= r_eps + 1
    resolved: bool             # both thresholds reached within k_max


@dataclass(frozen=True)
class FamilyDiagnostics:
    p: float
    k_values: tuple
    sup_distance: tuple
    sup_variation: tuple        # empty for p = inf
    n_table: dict
    covering_table: dict        # p = inf only
    sandwich: tuple = ()


def covering_number(r: RangeSet, eps: float) -> int:
    """Minimal count of closed intervals of radius ``eps`` covering ``r``.

    Exact left-to-right greedy: each interval is placed at the leftmost point
    not yet covered.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    count = 0
    cover_end = -math.inf
    for lo, hi in zip(r.lows, r.highs):
        if hi <= cover_end:
            continue
        start = lo if lo > cover_end else cover_end
        while True:
            count += 1
            cover_end = start + 2.0 * eps
            if hi <= cover_end:
                break
            start = cover_end
    return count


def _range_for(m: DiscreteMeasure) -> RangeSet:
    rs = essential_range(m, 0.0)
    if m.infinite_complement:
        rs = rs.with_point(0.0)  # the infinite-mass region takes the value 0
    return rs


def min_levels(m: DiscreteMeasure, p: float, eps: float) -> int:
    """Least k whose best k-level approximation is within ``eps`` of the function.

    Searches k by doubling and reading the exact distance curve; ``p`` may be
    ``math.inf``, in which case the sup-norm covering solver is used.  The
    search always terminates: the error reaches zero once every atom has its
    own level (plus the pinned zero level in infinite-complement mode), so no
    positive error floor exists in this discrete model.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if p == math.inf:
        rs = _range_for(m)
        k = 1
        while solve_sup(rs, k).radius > eps:
            if k >= rs.count:
                break
            k = min(2 * k, rs.count)
        lo, hi = 1, k
        while lo < hi:
            mid = (lo + hi) // 2
            if solve_sup(rs, mid).radius <= eps:
                hi = mid
            else:
                lo = mid + 1
        return lo
    if p < 1 or not math.isfinite(p):
        raise ValueError("p must be >= 1 (or math.inf)")
    # zero error is reached at k = n (finite) or k = n + 1 (one extra zero level)
    k_cap = m.n + (1 if m.infinite_complement else 0)
    k = 1
    while True:
        curve = np.asarray(distance_curve(m, p, k))
        if curve[-1] <= eps or k >= k_cap:
            break
        k = min(2 * k, k_cap)
    hits = np.flatnonzero(curve <= eps)
    return int(hits[0]) + 1 if hits.size else k


def family_N(fam: FunctionFamily, p: float, eps: float) -> int:
    """The common level budget: max of ``min_levels`` over the members."""
    return max(min_levels(m, p, eps) for m in fam.measures())


def family_decay(fam: FunctionFamily, p: float, k_max: int,
                 eps_values: Sequence[float] = ()) -> FamilyDiagnostics:
    """Per-family decay curves, level tables, and variation sandwich checks.

    Curves run over ``k = 1..k_max``: the worst-member distance, and (for
    finite p on finite-mode families) the worst-member total variation.  For
    each requested eps the sandwich ``r_{2eps} <= N_{p,eps} <= r_eps + 1``
    relating variation thresholds and the level requirement is evaluated.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    ks = tuple(range(1, k_max + 1))
    measures = fam.measures()
    if p == math.inf:
        sup_dist = tuple(
            max(solve_sup(_range_for(m), k).radius for m in measures) for k in ks
        )
        sup_var: tuple = ()
    else:
        curves = np.array([distance_curve(m, p, k_max) for m in measures])
        sup_dist = tuple(float(v) for v in curves.max(axis=0))
        if fam.infinite_complement:
            sup_var = ()
        else:
            var_curves = np.array(
                [[total_variation_k(m, k, p).value for k in ks] for m in measures]
            )
            sup_var = tuple(float(v) for v in var_curves.max(axis=0))
    n_table = {float(eps): family_N(fam, p, eps) for eps in eps_values}
    covering_table = {}
    if p == math.inf:
        covering_table = {
            float(eps): max(covering_number(_range_for(m), eps) for m in measures)
            for eps in eps_values
        }
    sandwich = ()
    if p != math.inf and sup_var:
        sandwich = tuple(
            _sandwich_record(float(eps), n_table[float(eps)], sup_var)
            for eps in eps_values
        )
    return FamilyDiagnostics(
        p=p,
        k_values=ks,
        sup_distance=sup_dist,
        sup_variation=sup_var,
        n_table=n_table,
        covering_table=covering_table,
        sandwich=sandwich,
    )


def _threshold_index(curve: Sequence[float], eps: float) -> Optional[int]:
    for k, v in enumerate(curve, start=1):
        if v <= eps:
            return k
    return None


def _sandwich_record(eps: float, n_eps: int, sup_var: Sequence[float]) -> SandwichRecord:
    r_eps = _threshold_index(sup_var, eps)
    r_2eps = _threshold_index(sup_var, 2.0 * eps)
    resolved = r_eps is not None and r_2eps is not None
    lower_ok = (r_2eps is None) or (r_2eps <= n_eps)
    upper_ok = (r_eps is None) or (n_eps <= r_eps + 1)
    return SandwichRecord(eps, n_eps, r_eps, r_2eps, lower_ok, upper_ok, resolved)


def adversarial_ball_family(r: int, N: int, k: int, p: float) -> tuple[DiscreteMeasure, float]:
    """Normalized spike function showing the L^p unit ball is not uniformly
    approximable, with its guaranteed relative-error lower bound.

    Atoms sit at ``r^(2j/p)`` with masses ``r^(-2j)`` for ``j = 1..N`` (each
    spike contributes exactly 1 to the p-th power norm).  Any approximation by
    at most ``k`` levels leaves relative p-th-power error at least
    ``(1 - r^(-1/p))^p * (N - 2 - 2k) / N``.
    """
    if r < 2 or int(r) != r:
        raise ValueError("r must be an integer >= 2")
    if k < 1:
        raise ValueError("k must be >= 1")
    if N <= 2 + 2 * k:
        raise ValueError("N must exceed 2 + 2k")
    if p < 1 or not math.isfinite(p):
        raise ValueError("p must be a finite real >= 1")
    j = np.arange(1, N + 1, dtype=float)
    atoms = float(r) ** (2.0 * j / p)
    weights = float(r) ** (-2.0 * j)
    theta = 1.0 - float(r) ** (-1.0 / p)
    bound = theta ** p * (N - 2 - 2 * k) / N
    return DiscreteMeasure(atoms, weights), float(bound)


def linf_ball_bound_audit(eps: float) -> int:
    """Level budget ``floor(2/eps) + 1`` sufficient for the sup-norm unit ball.

    Verifies that the covering number of [-1, 1] at radius ``eps`` does not
    exceed the bound before returning it.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    bound = int(math.floor(2.0 / eps)) + 1
    ball = RangeSet(np.array([-1.0]), np.array([1.0]))
    cover = covering_number(ball, eps)
    if cover > bound:
        raise RuntimeError(
            f"covering number {cover} exceeded the unit-ball bound {bound}")
    return bound
