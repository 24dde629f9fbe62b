"""Picard iteration for coupled fixed points.

The iteration runs on pairs: ``Z[n+1] = T(Z[n])`` with
``T(x, y) = (F(x, y), F(y, x))``. Starting from a pair with
``x0 <= F(x0, y0)`` and ``y0 >= F(y0, x0)`` (or the reversed inequalities)
the chain is monotone in the product order, and under the contractive
condition the step sizes ``delta[n] = d2(Z[n], Z[n-1])`` are non-increasing.
Both facts are tracked on every run.
"""

from __future__ import annotations

import csv
import enum
import io
import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .contraction import CoupledMap
from .order import (
    Metric,
    OrderedVector,
    PairPoint,
    as_pair,
    as_vector,
    bounds_pair,
    comparable,
    d2,
    distance,
    leq,
    pair_leq,
    raw_distance,
)

log = logging.getLogger(__name__)

DELTA_SLACK = 1e-12
DIVERGENCE_LIMIT = 1e12


class InitialCondition(enum.Enum):
    MIC = "mic"  # x0 <= F(x0,y0), y0 >= F(y0,x0)
    MARE = "mare"  # x0 >= F(x0,y0), y0 <= F(y0,x0)
    NEITHER = "neither"


class StopReason(enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    INVARIANT_VIOLATION = "invariant_violation"


class SolverError(RuntimeError):
    pass


class InvalidStartError(SolverError):
    """Neither initial-pair hypothesis holds at the given start."""


class NonFiniteIterateError(SolverError):
    def __init__(self, message: str, point: Optional[PairPoint] = None):
        super().__init__(message)
        self.point = point


class DivergenceError(SolverError):
    def __init__(self, message: str, trace: "IterationTrace"):
        super().__init__(message)
        self.trace = trace


class NonConvergenceError(SolverError):
    def __init__(self, message: str, trace: "IterationTrace"):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-10
    max_iterations: int = 10_000
    strict_monotone: bool = False
    metric: Metric = Metric.SUP_NORM
    order_slack: float = 0.0
    # x = y test for converged points; None means 100 * tolerance
    diagonal_tolerance: Optional[float] = None

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    @property
    def diagonal_tol(self) -> float:
        if self.diagonal_tolerance is not None:
            return self.diagonal_tolerance
        return 100.0 * self.tolerance


@dataclass
class IterationTrace:
    points: list[PairPoint]
    deltas: list[float]
    initial_condition: InitialCondition
    chain_flags: list[bool] = field(default_factory=list)
    delta_flags: list[bool] = field(default_factory=list)
    stop_reason: StopReason = StopReason.MAX_ITERATIONS
    metric: Metric = Metric.SUP_NORM

    @property
    def iterations(self) -> int:
        return len(self.deltas)

    @property
    def monotone_chain_ok(self) -> bool:
        return all(self.chain_flags)

    @property
    def delta_nonincreasing_ok(self) -> bool:
        return all(self.delta_flags)

    def to_csv(self) -> str:
        """One row per iterate: n, x components, y components, delta_n, chain_ok."""
        dim = self.points[0].dim
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", *(f"x{i}" for i in range(dim)), *(f"y{i}" for i in range(dim)), "delta_n", "chain_ok"])
        for n, Z in enumerate(self.points):
            delta = repr(self.deltas[n - 1]) if n else ""
            chain = str(self.chain_flags[n - 1]).lower() if n else ""
            w.writerow([n, *map(repr, Z.first.tolist()), *map(repr, Z.second.tolist()), delta, chain])
        return buf.getvalue()


@dataclass(frozen=True)
class CoupledFixedPoint:
    point: PairPoint
    residual: float
    diagonal: bool

    @property
    def x(self) -> OrderedVector:
        return self.point.first

    @property
    def y(self) -> OrderedVector:
        return self.point.second


def _raw_T(F: CoupledMap, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    fx = F.raw(x, y)
    fy = F.raw(y, x)
    if not (np.all(np.isfinite(fx)) and np.all(np.isfinite(fy))):
        raise NonFiniteIterateError(
            f"T produced a non-finite value at x={x.tolist()}, y={y.tolist()}"
        )
    return fx, fy


def apply_T(F: CoupledMap, Y) -> PairPoint:
    """T(x, y) = (F(x, y), F(y, x))."""
    Y = as_pair(Y)
    if Y.dim != F.dimension:
        raise ValueError(f"pair has dimension {Y.dim}, map expects {F.dimension}")
    fx, fy = _raw_T(F, Y.first.values, Y.second.values)
    return PairPoint(OrderedVector(fx), OrderedVector(fy))


def classify_initial(F: CoupledMap, x0, y0, slack: float = 0.0) -> InitialCondition:
    x0, y0 = as_vector(x0), as_vector(y0)
    T0 = apply_T(F, PairPoint(x0, y0))
    if leq(x0, T0.first, slack) and leq(T0.second, y0, slack):
        return InitialCondition.MIC
    if leq(T0.first, x0, slack) and leq(y0, T0.second, slack):
        return InitialCondition.MARE
    return InitialCondition.NEITHER


def solve(F: CoupledMap, x0, y0, cfg: SolverConfig = SolverConfig()) -> tuple[CoupledFixedPoint, IterationTrace]:
    """Run the Picard iteration from ``(x0, y0)`` to a coupled fixed point.

    Converged means both the last step and the residual ``d2(T(Z), Z)`` are
    within ``cfg.tolerance``. Raises :class:`InvalidStartError` if the start
    satisfies neither initial-pair hypothesis, :class:`NonConvergenceError`
    (with the trace attached) when the iteration stops without converging.
    """
    x0, y0 = as_vector(x0), as_vector(y0)
    kind = classify_initial(F, x0, y0, cfg.order_slack)
    if kind is InitialCondition.NEITHER:
        raise InvalidStartError(
            "hypothesis (4)/(5) unsatisfied: need x0 <= F(x0,y0), y0 >= F(y0,x0) or the reverse"
        )

    m = cfg.metric
    Z = PairPoint(x0, y0)
    trace = IterationTrace([Z], [], kind, metric=m)
    x, y = x0.values, y0.values
    nx, ny = _raw_T(F, x, y)

    for _ in range(cfg.max_iterations):
        Znew = PairPoint(OrderedVector(nx), OrderedVector(ny))
        delta = 0.5 * (raw_distance(m, nx, x) + raw_distance(m, ny, y))
        if kind is InitialCondition.MIC:
            chain_ok = pair_leq(Z, Znew, cfg.order_slack)
        else:
            chain_ok = pair_leq(Znew, Z, cfg.order_slack)
        delta_ok = not trace.deltas or delta <= trace.deltas[-1] + DELTA_SLACK
        trace.points.append(Znew)
        trace.deltas.append(delta)
        trace.chain_flags.append(chain_ok)
        trace.delta_flags.append(delta_ok)

        if delta > DIVERGENCE_LIMIT:
            trace.stop_reason = StopReason.INVARIANT_VIOLATION
            raise DivergenceError(f"step size {delta:g} exceeds {DIVERGENCE_LIMIT:g}", trace)
        if not (chain_ok and delta_ok):
            log.debug("invariant tripped at n=%d: chain_ok=%s delta_ok=%s", trace.iterations, chain_ok, delta_ok)
            if cfg.strict_monotone:
                trace.stop_reason = StopReason.INVARIANT_VIOLATION
                raise NonConvergenceError(f"invariant violated at iteration {trace.iterations}", trace)

        Z, x, y = Znew, nx, ny
        nx, ny = _raw_T(F, x, y)
        if delta <= cfg.tolerance:
            residual = 0.5 * (raw_distance(m, nx, x) + raw_distance(m, ny, y))
            if residual <= cfg.tolerance:
                trace.stop_reason = StopReason.CONVERGED
                diag = distance(m, Z.first, Z.second) <= cfg.diagonal_tol
                return CoupledFixedPoint(Z, residual, diag), trace

    trace.stop_reason = StopReason.MAX_ITERATIONS
    raise NonConvergenceError(f"no convergence within {cfg.max_iterations} iterations", trace)


@dataclass(frozen=True)
class DiagonalCheck:
    ok: bool
    applicable: bool
    separation: float
    message: str = ""

    def __bool__(self):
        return self.ok


def diagonal_check(fp: CoupledFixedPoint, trace: IterationTrace, cfg: SolverConfig = SolverConfig()) -> DiagonalCheck:
    """Comparable starting components must give a limit with x = y.

    Vacuously true when ``x0`` and ``y0`` are incomparable. A failure means
    the uniqueness hypotheses do not hold for the map being iterated.
    """
    Z0 = trace.points[0]
    sep = distance(cfg.metric, fp.x, fp.y)
    if not comparable(Z0.first, Z0.second, cfg.order_slack):
        return DiagonalCheck(True, False, sep, "x0, y0 incomparable; nothing to check")
    if sep <= cfg.diagonal_tol:
        return DiagonalCheck(True, True, sep)
    msg = f"comparable start but d(x, y) = {sep:g} > {cfg.diagonal_tol:g}: contractive hypothesis fails upstream"
    log.warning(msg)
    return DiagonalCheck(False, True, sep, msg)


@dataclass(frozen=True)
class PairProbe:
    i: int
    j: int
    bound: PairPoint
    distance_i: float
    distance_j: float
    agree: bool


@dataclass
class UniquenessReport:
    status: str  # "trivial", "corroborated", "coexisting"
    fixed_points: list[CoupledFixedPoint]
    pairs: list[PairProbe] = field(default_factory=list)

    @property
    def corroborated(self) -> bool:
        return self.status in ("trivial", "corroborated")


def _auxiliary_limit(F: CoupledMap, start: PairPoint, cfg: SolverConfig) -> PairPoint:
    # u[n+1] = F(u[n], v[n]), v[n+1] = F(v[n], u[n]); no start-hypothesis needed
    m = cfg.metric
    u, v = start.first.values, start.second.values
    for _ in range(cfg.max_iterations):
        nu, nv = _raw_T(F, u, v)
        step = 0.5 * (raw_distance(m, nu, u) + raw_distance(m, nv, v))
        u, v = nu, nv
        if step <= cfg.tolerance or step > DIVERGENCE_LIMIT:
            break
    return PairPoint(OrderedVector(u), OrderedVector(v))


def uniqueness_probe(
    F: CoupledMap,
    fixed_points: Sequence[CoupledFixedPoint],
    cfg: SolverConfig = SolverConfig(),
    starts: Sequence[tuple] = (),
    match_tol: Optional[float] = None,
) -> UniquenessReport:
    """Corroborate (or refute) uniqueness of the coupled fixed point.

    Every extra start in ``starts`` is solved first. For each pair of fixed
    points an element above both (``bounds_pair``) is iterated with T; if its
    limit lies within ``match_tol`` (default ``1000 * cfg.tolerance``) of
    both fixed points, the pair agrees.
    """
    fps = list(fixed_points)
    for x0, y0 in starts:
        fps.append(solve(F, x0, y0, cfg)[0])
    tol = 1000.0 * cfg.tolerance if match_tol is None else match_tol
    if len(fps) < 2:
        return UniquenessReport("trivial", fps)

    report = UniquenessReport("corroborated", fps)
    for i, j in combinations(range(len(fps)), 2):
        P, Q = fps[i].point, fps[j].point
        bound = bounds_pair(P, Q)
        limit = _auxiliary_limit(F, bound, cfg)
        di, dj = d2(cfg.metric, limit, P), d2(cfg.metric, limit, Q)
        agree = di <= tol and dj <= tol
        report.pairs.append(PairProbe(i, j, bound, di, dj, agree))
        if not agree:
            report.status = "coexisting"
    return report
