"""Exact finite metric structures: diversities, finite-state processes, L1 diversities."""
from .diversity import (
    DiversityError,
    FiniteDiversity,
    amalgamate_one_point,
    extend_over_base,
    from_table,
    join,
    quotient,
    restrict,
    validate,
)
from .foundation import (
    EnumeratedTuple,
    FiniteMetric,
    SizeLimitError,
    StructureError,
    d_infty,
    dK_lower_bound,
)
from .fraisse import ExtensionTarget, NoisyOracle, build_rich_structure, extension_chain
from .l1cut import (
    CutWeights,
    NotL1,
    amalgamate_l1,
    cut_diversity,
    decompose,
    evaluate_cuts,
    is_l1_metric,
    nap_counterexample,
    pentagonal_check,
)
from .stochastic import (
    FiniteProcess,
    amalgamate,
    join_independent,
    marginal,
    optimal_coupling,
    total_variation,
)

__all__ = [
    "CutWeights", "DiversityError", "EnumeratedTuple", "ExtensionTarget", "FiniteDiversity",
    "FiniteMetric", "FiniteProcess", "NoisyOracle", "NotL1", "SizeLimitError", "StructureError",
    "amalgamate", "amalgamate_l1", "amalgamate_one_point", "build_rich_structure",
    "cut_diversity", "d_infty", "dK_lower_bound", "decompose", "evaluate_cuts",
    "extend_over_base", "extension_chain", "from_table", "is_l1_metric", "join",
    "join_independent", "marginal", "nap_counterexample", "optimal_coupling",
    "pentagonal_check", "quotient", "restrict", "total_variation", "validate",
]
