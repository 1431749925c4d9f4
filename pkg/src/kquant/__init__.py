"""kquant: best k-level step-function approximation in L^p for weighted samples.

Core objects: :class:`~kquant.measure.DiscreteMeasure` (sorted weighted atoms,
the value distribution of a function) and :class:`~kquant.quantizer.StepQuantizer`
(the approximating step function).  Solvers cover exact dynamic programming,
Lloyd-style fixed points, a boundary-propagation sweep, and the sup-norm
covering problem; companion modules compute p-variation functionals and
uniform-approximability diagnostics for families.
"""

from ._backend import backend_name
from .measure import (
    DiscreteMeasure,
    RangeSet,
    discretize_quantile,
    essential_range,
    from_samples,
    moment_p,
    pushforward,
    read_csv,
    write_csv,
)
from .pmean import AtomRange, cluster_cost, median_interval, optimal_cluster_cost, pth_mean
from .quantizer import (
    SolveReport,
    StepQuantizer,
    SupSolution,
    canonicalize,
    distance,
    distance_curve,
    solve_dp,
    solve_lloyd,
    solve_sup,
    solve_sweep,
)
from .ua import (
    FamilyDiagnostics,
    FunctionFamily,
    adversarial_ball_family,
    covering_number,
    family_N,
    family_decay,
    linf_ball_bound_audit,
    min_levels,
)
from .variation import (
    AuditRecord,
    VariationResult,
    audit_inequalities,
    total_variation_bruteforce,
    total_variation_k,
    var_p,
)

__version__ = "0.1.0"

__all__ = [
    "AtomRange",
    "AuditRecord",
    "DiscreteMeasure",
    "FamilyDiagnostics",
    "FunctionFamily",
    "RangeSet",
    "SolveReport",
    "StepQuantizer",
    "SupSolution",
    "VariationResult",
    "adversarial_ball_family",
    "audit_inequalities",
    "backend_name",
    "canonicalize",
    "cluster_cost",
    "covering_number",
    "discretize_quantile",
    "distance",
    "distance_curve",
    "essential_range",
    "family_N",
    "family_decay",
    "from_samples",
    "linf_ball_bound_audit",
    "median_interval",
    "min_levels",
    "moment_p",
    "optimal_cluster_cost",
    "pth_mean",
    "pushforward",
    "read_csv",
    "solve_dp",
    "solve_lloyd",
    "solve_sup",
    "solve_sweep",
    "total_variation_bruteforce",
    "total_variation_k",
    "var_p",
    "write_csv",
]
