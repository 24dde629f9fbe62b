"""Nonlinear Fredholm equations solved as coupled fixed-point problems.

The equation

    x(t) = int_a^b (K1(t,s) + K2(t,s)) (f(s, x(s)) + g(s, x(s))) ds + h(t)

is discretized on a uniform grid with composite trapezoid weights, and the
induced mixed monotone map

    F(x,y)(t) = int K1(t,s) [f(s,x(s)) + g(s,y(s))] ds
              + int K2(t,s) [f(s,y(s)) + g(s,x(s))] ds + h(t)

is iterated from a coupled lower-upper solution (alpha, beta).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .contraction import CoupledMap
from .control import ControlFunction, validate_theta
from .order import OrderedVector, as_vector, leq
from .solver import (
    CoupledFixedPoint,
    IterationTrace,
    SolverConfig,
    SolverError,
    diagonal_check,
    solve,
)

ORDER_TOL = 1e-12
NORM_TOL = 1e-12


class AssumptionError(SolverError):
    """The hypotheses required for a unique solution are not met."""

    def __init__(self, message: str, report: "AssumptionReport"):
        super().__init__(message)
        self.report = report


class LowerUpperError(SolverError):
    def __init__(self, message: str, witnesses: list):
        super().__init__(message)
        self.witnesses = witnesses


class DiagonalityError(SolverError):
    pass


@dataclass(frozen=True)
class FredholmProblem:
    """Data of the integral equation.

    Kernels are called as ``K(t, s)`` and nonlinearities as ``f(s, x)`` with
    numpy arrays; scalar-only callables are vectorized automatically.
    """

    a: float
    b: float
    k1: Callable
    k2: Callable
    f: Callable
    g: Callable
    h: Callable
    lam: float
    mu: float
    theta: ControlFunction
    grid_size: int = 101

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"need a < b, got [{self.a}, {self.b}]")
        if not (self.lam > 0 and self.mu > 0):
            raise ValueError("lambda and mu must be positive")
        if self.grid_size < 2:
            raise ValueError("grid_size must be >= 2")


def _call(fn: Callable, *args: np.ndarray) -> np.ndarray:
    shape = np.broadcast_shapes(*(np.shape(a) for a in args))
    try:
        out = np.asarray(fn(*args), dtype=float)
        return np.array(np.broadcast_to(out, shape), dtype=float)
    except (TypeError, ValueError):
        return np.vectorize(lambda *xs: float(fn(*xs)), otypes=[float])(*args)


def trapezoid_weights(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform nodes on [a, b] and composite trapezoid weights."""
    if n < 2:
        raise ValueError("need at least 2 nodes")
    nodes = np.linspace(a, b, n)
    w = np.full(n, (b - a) / (n - 1))
    w[0] = w[-1] = w[0] / 2
    return nodes, w


@dataclass(frozen=True)
class Discretization:
    grid: np.ndarray
    weights: np.ndarray
    F: CoupledMap
    k1: np.ndarray  # K1(t_i, s_j)
    k2: np.ndarray
    h: np.ndarray

    def rhs(self, x: np.ndarray) -> np.ndarray:
        """Quadrature right-hand side of the equation at ``x``, i.e. F(x, x)."""
        return self.F.raw(x, x)


def _nonfinite_at(mat: np.ndarray, grid: np.ndarray, what: str) -> None:
    bad = np.argwhere(~np.isfinite(mat))
    if bad.size:
        idx = tuple(bad[0])
        coords = ", ".join(f"{grid[i]:g}" for i in idx)
        raise ValueError(f"{what} is not finite at node ({coords})")


def discretize(p: FredholmProblem) -> Discretization:
    grid, w = trapezoid_weights(p.a, p.b, p.grid_size)
    T, S = np.meshgrid(grid, grid, indexing="ij")
    k1 = _call(p.k1, T, S)
    k2 = _call(p.k2, T, S)
    hv = _call(p.h, grid)
    _nonfinite_at(k1, grid, "K1")
    _nonfinite_at(k2, grid, "K2")
    _nonfinite_at(hv, grid, "h")
    zero = np.zeros_like(grid)
    _nonfinite_at(_call(p.f, grid, zero), grid, "f(s, 0)")
    _nonfinite_at(_call(p.g, grid, zero), grid, "g(s, 0)")

    A1 = k1 * w[None, :]
    A2 = k2 * w[None, :]
    f, g = p.f, p.g

    def F(x, y):
        fx, fy = _call(f, grid, x), _call(f, grid, y)
        gx, gy = _call(g, grid, x), _call(g, grid, y)
        return A1 @ (fx + gy) + A2 @ (fy + gx) + hv

    return Discretization(grid, w, CoupledMap(F, p.grid_size, "fredholm"), k1, k2, hv)


@dataclass(frozen=True)
class AssumptionViolation:
    condition: str
    where: str
    observed: float
    expected: str


@dataclass
class AssumptionReport:
    k1_nonneg: bool
    k2_nonpos: bool
    f_lipschitz_ok: bool
    g_lipschitz_ok: bool
    norm_bound: float
    luong_bound: float
    theta_ok: bool = True
    violations: list[AssumptionViolation] = field(default_factory=list)

    @property
    def norm_ok(self) -> bool:
        return self.norm_bound <= 1.0 + NORM_TOL

    @property
    def passed(self) -> bool:
        return all(
            (self.k1_nonneg, self.k2_nonpos, self.f_lipschitz_ok, self.g_lipschitz_ok, self.norm_ok, self.theta_ok)
        )

    def summary(self) -> str:
        lines = [
            f"(i)   K1 >= 0: {self.k1_nonneg}, K2 <= 0: {self.k2_nonpos}",
            f"(ii)  f bound: {self.f_lipschitz_ok}, g bound: {self.g_lipschitz_ok}, theta in class: {self.theta_ok}",
            f"(iii) (lambda+mu) sup int [K1-K2] ds = {self.norm_bound!r} "
            f"({'<= 1' if self.norm_ok else '> 1'}); 2 max(lambda,mu) sup int = {self.luong_bound!r}",
        ]
        return "\n".join(lines)


@dataclass(frozen=True)
class ValueSampler:
    """Sampled (t, x >= y) triples for the growth conditions on f and g."""

    radius: float = 10.0
    samples: int = 2000
    min_gap: float = 1e-6
    seed: int = 42


MAX_WITNESSES = 20


def check_assumptions(
    p: FredholmProblem,
    sampler: ValueSampler = ValueSampler(),
    disc: Optional[Discretization] = None,
) -> AssumptionReport:
    disc = disc or discretize(p)
    grid = disc.grid
    violations: list[AssumptionViolation] = []

    def sign_check(mat, ok_mask, name, expected):
        bad = np.argwhere(~ok_mask)
        for i, j in bad[:MAX_WITNESSES]:
            violations.append(
                AssumptionViolation(name, f"t={grid[i]:g}, s={grid[j]:g}", float(mat[i, j]), expected)
            )
        return bad.size == 0

    k1_ok = sign_check(disc.k1, disc.k1 >= 0, "K1 >= 0", ">= 0")
    k2_ok = sign_check(disc.k2, disc.k2 <= 0, "K2 <= 0", "<= 0")

    rng = np.random.default_rng(sampler.seed)
    n = sampler.samples
    nodes = grid[rng.integers(0, grid.size, size=n)]
    y = rng.uniform(-sampler.radius, sampler.radius, size=n)
    gaps = np.geomspace(sampler.min_gap, sampler.radius, n)
    rng.shuffle(gaps)
    x = y + gaps
    th = np.array([p.theta(r) for r in gaps])
    df = _call(p.f, nodes, x) - _call(p.f, nodes, y)
    dg = _call(p.g, nodes, x) - _call(p.g, nodes, y)

    def bound_check(ok_mask, diff, name, expected_fmt, bound):
        bad = np.flatnonzero(~ok_mask)
        for i in bad[:MAX_WITNESSES]:
            violations.append(
                AssumptionViolation(
                    name,
                    f"t={nodes[i]:g}, x={x[i]!r}, y={y[i]!r}",
                    float(diff[i]),
                    expected_fmt.format(float(bound[i])),
                )
            )
        return bad.size == 0

    f_bound = p.lam * th
    g_bound = p.mu * th
    f_ok = bound_check(
        (df >= -ORDER_TOL) & (df <= f_bound + ORDER_TOL), df, "0 <= f(t,x)-f(t,y) <= lambda theta(x-y)", "in [0, {}]", f_bound
    )
    g_ok = bound_check(
        (dg <= ORDER_TOL) & (dg >= -g_bound - ORDER_TOL), dg, "-mu theta(x-y) <= g(t,x)-g(t,y) <= 0", "in [-{}, 0]", g_bound
    )

    theta_report = validate_theta(p.theta)
    for v in theta_report.violations[:MAX_WITNESSES]:
        violations.append(AssumptionViolation("theta in class", f"r={v.input!r}", v.observed, v.expected))

    # compensated sums keep e.g. a constant kernel's row integral exact
    diff = disc.k1 - disc.k2
    sup_int = max(math.fsum(row * disc.weights) for row in diff)
    report = AssumptionReport(
        k1_nonneg=k1_ok,
        k2_nonpos=k2_ok,
        f_lipschitz_ok=f_ok,
        g_lipschitz_ok=g_ok,
        norm_bound=(p.lam + p.mu) * sup_int,
        luong_bound=2.0 * max(p.lam, p.mu) * sup_int,
        theta_ok=theta_report.passed,
        violations=violations,
    )
    if not report.norm_ok:
        violations.append(
            AssumptionViolation("(lambda+mu) sup int [K1-K2] ds <= 1", "sup over grid nodes", report.norm_bound, "<= 1")
        )
    return report


@dataclass(frozen=True)
class LowerUpperPair:
    alpha: OrderedVector
    beta: OrderedVector

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_vector(self.alpha))
        object.__setattr__(self, "beta", as_vector(self.beta))

    @classmethod
    def constant(cls, alpha: float, beta: float, n: int) -> LowerUpperPair:
        return cls(OrderedVector(np.full(n, float(alpha))), OrderedVector(np.full(n, float(beta))))

    @property
    def ordered(self) -> bool:
        return leq(self.alpha, self.beta)


@dataclass(frozen=True)
class LowerUpperWitness:
    node: int
    t: float
    side: str  # "alpha" or "beta"
    value: float
    bound: float


def verify_lower_upper(
    p: FredholmProblem, pair: LowerUpperPair, disc: Optional[Discretization] = None
) -> tuple[bool, list[LowerUpperWitness]]:
    """Check alpha <= F(alpha, beta) and beta >= F(beta, alpha) at every node."""
    disc = disc or discretize(p)
    if pair.alpha.dim != p.grid_size or pair.beta.dim != p.grid_size:
        raise ValueError(f"lower-upper pair must have {p.grid_size} nodes")
    a, b = pair.alpha.values, pair.beta.values
    Fab = disc.F.raw(a, b)
    Fba = disc.F.raw(b, a)
    witnesses = []
    for i in np.flatnonzero(a > Fab + ORDER_TOL):
        witnesses.append(LowerUpperWitness(int(i), float(disc.grid[i]), "alpha", float(a[i]), float(Fab[i])))
    for i in np.flatnonzero(b < Fba - ORDER_TOL):
        witnesses.append(LowerUpperWitness(int(i), float(disc.grid[i]), "beta", float(b[i]), float(Fba[i])))
    return not witnesses, witnesses


class FredholmSolution(NamedTuple):
    solution: OrderedVector
    report: AssumptionReport
    fixed_point: CoupledFixedPoint
    trace: IterationTrace
    residual: float
    grid: np.ndarray


def solve_integral_equation(
    p: FredholmProblem,
    pair: LowerUpperPair,
    cfg: SolverConfig = SolverConfig(),
    sampler: ValueSampler = ValueSampler(),
) -> FredholmSolution:
    """Solve the discretized equation, refusing when its hypotheses fail.

    Raises :class:`AssumptionError` or :class:`LowerUpperError` before any
    iteration if the hypotheses are unmet; iteration failures propagate from
    :func:`coupledfp.solver.solve`.
    """
    disc = discretize(p)
    report = check_assumptions(p, sampler, disc)
    if not report.passed:
        failed = sorted({v.condition for v in report.violations})
        raise AssumptionError("hypotheses unmet: " + "; ".join(failed), report)
    ok, witnesses = verify_lower_upper(p, pair, disc)
    if not ok:
        raise LowerUpperError(f"(alpha, beta) is not a coupled lower-upper solution at {len(witnesses)} node(s)", witnesses)

    fp, trace = solve(disc.F, pair.alpha, pair.beta, cfg)
    if pair.ordered:
        check = diagonal_check(fp, trace, cfg)
        if not check.ok:
            raise DiagonalityError(check.message)
    x = fp.x.values
    residual = float(np.max(np.abs(x - disc.rhs(x))))
    return FredholmSolution(fp.x, report, fp, trace, residual, disc.grid)


def solution_csv(grid: np.ndarray, x) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "x"])
    for t, v in zip(np.asarray(grid).tolist(), as_vector(x).tolist()):
        w.writerow([repr(t), repr(v)])
    return buf.getvalue()

