"""Coupled fixed points of mixed monotone maps on componentwise-ordered vectors."""

from .contraction import (
    CheckReport,
    ConditionKind,
    ConditionSpec,
    CoupledMap,
    TupleSampler,
    Verdict,
    Witness,
    certify,
    check_mixed_monotone,
    evaluate_condition,
)
from .control import (
    ClassReport,
    ControlFunction,
    FunctionClass,
    SampleGrid,
    parse_control,
    psi_from_theta,
    validate_phi,
    validate_psi,
    validate_theta,
)
from .fredholm import (
    AssumptionReport,
    FredholmProblem,
    LowerUpperPair,
    check_assumptions,
    discretize,
    solve_integral_equation,
    verify_lower_upper,
)
from .order import (
    Metric,
    OrderedVector,
    Ordering,
    PairPoint,
    bounds_pair,
    compare,
    d2,
    distance,
    product_compare,
)
from .solver import (
    CoupledFixedPoint,
    InitialCondition,
    IterationTrace,
    SolverConfig,
    StopReason,
    apply_T,
    classify_initial,
    diagonal_check,
    solve,
    uniqueness_probe,
)

__version__ = "0.1.0"
