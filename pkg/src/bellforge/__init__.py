"""Exact tooling for turning Bell functionals into maximum-gap nonlocal games.

Everything numerical that feeds a claim is exact rational arithmetic: the
gap-optimisation LP, the local bounds, the certificates.  Floating point only
enters where the quantities themselves are transcendental (quantum values,
tail exponents, dimension estimates).
"""

from __future__ import annotations

__version__ = "0.1.0"

from .catalog import (
    ParallelGameSpec,
    chsh,
    cglmp,
    cglmp_deterministic,
    i3322_game,
    magic_square,
    parallel_compose,
    poisson_binomial_tail,
)
from .core import (
    Behaviour,
    BellFunctional,
    DeterministicStrategy,
    RationalTensor,
    Scenario,
    as_fraction,
    behaviour_from_strategies,
    dump_json,
    evaluate,
    format_rational,
    from_correlators,
    functional_from_json,
    functional_to_json,
    load_json,
    parse_rational,
    scale,
    translate,
)
from .dimbounds import (
    K_R3_LOWER,
    K_R3_UPPER,
    GapMeasure,
    XiReport,
    XorBound,
    harmonic,
    lhv_fidelity,
    lv_upper,
    xi_lower_kv,
    xi_lower_parallel,
    xi_of_game,
    xi_report,
    xi_upper,
    xi_upper_relaxed,
    xor_bounds,
)
from .errors import (
    BellforgeError,
    BudgetExceeded,
    DegenerateFunctional,
    DegenerateScale,
    InternalError,
    InvalidMargin,
    InvalidTensor,
    ScenarioMismatch,
    Unsupported,
    VacuousBound,
)
from .exactlp import LpSolution, solve_standard_form
from .games import (
    GameClassification,
    NonlocalGame,
    bound_map,
    classify,
    extract_mu_v,
    game_from_json,
    game_from_tensor,
    game_to_json,
    lift_to_deterministic,
    to_game,
)
from .gaplp import (
    BoundsReport,
    DualCertificate,
    GapReport,
    bounds_from_report,
    nonsignalling_bound,
    optimize_gap,
    verify_certificate,
)
from .localbound import (
    HAVE_COMPILED_KERNEL,
    LocalBoundResult,
    default_threads,
    local_bound_exact,
    local_bound_naive,
    seesaw_lower_bound,
)
from .nsspace import (
    Decomposition,
    EquivalenceWitness,
    NsBasis,
    build_basis,
    check_equivalence,
    decompose,
    translation_tensor,
)
from .shotstats import (
    GameSummary,
    KvBounds,
    KvPlan,
    ShotPlan,
    chernoff_quantum,
    expected_pvalue,
    kl_divergence,
    kv_bounds,
    kv_plan,
    plan_single_shot,
    pvalue_bound,
    pvalue_lhv,
    rao_bound,
)

__all__ = [name for name in dir() if not name.startswith("_") and name != "annotations"]
