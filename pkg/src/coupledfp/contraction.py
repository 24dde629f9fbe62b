"""Sampled certification and falsification of contractive conditions.

Four conditions on a coupled map F are supported, each quantified over the
tuples ``(x, y, u, v)`` with ``x >= u`` and ``y <= v``:

* ``BHASKAR``      d(F(x,y),F(u,v)) <= k/2 [d(x,u) + d(y,v)]
* ``LUONG``        phi(d(F(x,y),F(u,v))) <= phi(s)/2 - psi(s),  s = d(x,u) + d(y,v)
* ``BERINDE``      phi(D/2) <= phi(s/2) - psi(s/2),  D = d(F(x,y),F(u,v)) + d(F(y,x),F(v,u))
* ``BERINDE_COR``  D <= s - 2 psi(s/2)

A passing check is evidence from ``budget`` samples, never a proof.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .control import ControlFunction, identity
from .order import DimensionError, Metric, OrderedVector, as_vector, raw_distance

VIOLATION_TOL = 1e-12


class IncomparableTupleError(ValueError):
    """The tuple does not satisfy x >= u and y <= v."""


@dataclass(frozen=True)
class CoupledMap:
    """A map F: X x X -> X on vectors of a fixed dimension.

    ``evaluator`` receives two float arrays of length ``dimension`` and
    returns an array-like of the same length.
    """

    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    dimension: int = 1
    label: str = ""

    def raw(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        out = np.atleast_1d(np.asarray(self.evaluator(x, y), dtype=float))
        if out.shape != (self.dimension,):
            raise DimensionError(
                f"{self.label or 'map'} returned shape {out.shape}, expected ({self.dimension},)"
            )
        return out

    def __call__(self, x, y) -> OrderedVector:
        x, y = as_vector(x), as_vector(y)
        if x.dim != self.dimension or y.dim != self.dimension:
            raise DimensionError(f"{self.label or 'map'} expects dimension {self.dimension}")
        return OrderedVector(self.raw(x.values, y.values))


class ConditionKind(enum.Enum):
    BHASKAR = "bhaskar"
    LUONG = "luong"
    BERINDE = "berinde"
    BERINDE_COR = "berinde-cor"


@dataclass(frozen=True)
class ConditionSpec:
    kind: ConditionKind
    k: Optional[float] = None
    phi: Optional[ControlFunction] = None
    psi: Optional[ControlFunction] = None
    metric: Metric = Metric.SUP_NORM

    def __post_init__(self):
        if self.kind is ConditionKind.BHASKAR:
            if self.k is None or not 0.0 <= self.k < 1.0:
                raise ValueError(f"Bhaskar condition needs 0 <= k < 1, got {self.k!r}")
        elif self.psi is None:
            raise ValueError(f"{self.kind.value} condition needs psi")
        if self.kind in (ConditionKind.LUONG, ConditionKind.BERINDE) and self.phi is None:
            object.__setattr__(self, "phi", identity())

    @classmethod
    def bhaskar(cls, k: float, metric: Metric = Metric.SUP_NORM) -> ConditionSpec:
        return cls(ConditionKind.BHASKAR, k=k, metric=metric)

    @classmethod
    def luong(cls, phi, psi, metric: Metric = Metric.SUP_NORM) -> ConditionSpec:
        return cls(ConditionKind.LUONG, phi=phi, psi=psi, metric=metric)

    @classmethod
    def berinde(cls, phi, psi, metric: Metric = Metric.SUP_NORM) -> ConditionSpec:
        return cls(ConditionKind.BERINDE, phi=phi, psi=psi, metric=metric)

    @classmethod
    def berinde_cor(cls, psi, metric: Metric = Metric.SUP_NORM) -> ConditionSpec:
        return cls(ConditionKind.BERINDE_COR, psi=psi, metric=metric)

    def describe(self) -> str:
        if self.kind is ConditionKind.BHASKAR:
            return f"bhaskar(k={self.k:g})"
        parts = []
        if self.phi is not None and self.kind in (ConditionKind.LUONG, ConditionKind.BERINDE):
            parts.append(f"phi={self.phi.label or 'custom'}")
        parts.append(f"psi={self.psi.label or 'custom'}")
        return f"{self.kind.value}({', '.join(parts)})"


class Verdict(enum.Enum):
    CERTIFIED = "certified"
    FALSIFIED = "falsified"


@dataclass(frozen=True)
class Witness:
    """A tuple with x >= u, y <= v at which the checked inequality lhs <= rhs fails."""

    x: list[float]
    y: list[float]
    u: list[float]
    v: list[float]
    lhs: float
    rhs: float
    index: int


@dataclass
class CheckReport:
    label: str
    verdict: Verdict
    tuples_tested: int
    seed: int
    witness: Optional[Witness] = None
    condition: Optional[ConditionSpec] = None

    @property
    def certified(self) -> bool:
        return self.verdict is Verdict.CERTIFIED

    def witness_record(self) -> dict:
        """Plain-data record of the witness, suitable for JSON export."""
        rec = {
            "condition": self.label,
            "verdict": self.verdict.value,
            "tuples_tested": self.tuples_tested,
            "seed": self.seed,
        }
        if self.witness is not None:
            w = self.witness
            rec.update(x=w.x, y=w.y, u=w.u, v=w.v, lhs=w.lhs, rhs=w.rhs, index=w.index)
        return rec

    def to_json(self) -> str:
        return json.dumps(self.witness_record(), sort_keys=True)


# -- evaluation ----------------------------------------------------------------

def _raw_condition(spec: ConditionSpec, F: CoupledMap, x, y, u, v) -> tuple[float, float]:
    m = spec.metric
    s = raw_distance(m, x, u) + raw_distance(m, y, v)
    d_xy = raw_distance(m, F.raw(x, y), F.raw(u, v))
    kind = spec.kind
    if kind is ConditionKind.BHASKAR:
        return d_xy, spec.k / 2.0 * s
    if kind is ConditionKind.LUONG:
        return spec.phi(d_xy), 0.5 * spec.phi(s) - spec.psi(s)
    d_yx = raw_distance(m, F.raw(y, x), F.raw(v, u))
    if kind is ConditionKind.BERINDE:
        return spec.phi((d_xy + d_yx) / 2.0), spec.phi(s / 2.0) - spec.psi(s / 2.0)
    return d_xy + d_yx, s - 2.0 * spec.psi(s / 2.0)


def evaluate_condition(spec: ConditionSpec, F: CoupledMap, x, y, u, v) -> tuple[float, float]:
    """Return ``(lhs, rhs)`` of the selected inequality at one tuple.

    The condition holds at the tuple iff ``lhs <= rhs``. Raises
    :class:`IncomparableTupleError` unless ``x >= u`` and ``y <= v``.
    """
    x, y, u, v = (as_vector(t) for t in (x, y, u, v))
    for t in (x, y, u, v):
        if t.dim != F.dimension:
            raise DimensionError(f"tuple entry has dimension {t.dim}, map expects {F.dimension}")
    if not (np.all(x.values >= u.values) and np.all(y.values <= v.values)):
        raise IncomparableTupleError("condition tuples need x >= u and y <= v componentwise")
    return _raw_condition(spec, F, x.values, y.values, u.values, v.values)


def is_violation(lhs: float, rhs: float) -> bool:
    if math.isnan(lhs) or math.isnan(rhs):
        return True
    return lhs > rhs + VIOLATION_TOL


# -- sampling ------------------------------------------------------------------

class TupleKind(enum.Enum):
    UNIFORM = "uniform"
    X_EQUALS_U = "x=u"
    Y_EQUALS_V = "y=v"
    NEAR_DIAGONAL = "near-diagonal"


# Position in a cycle of 8 decides the tuple kind: 25% boundary, 25% near-diagonal.
_CYCLE = (
    TupleKind.X_EQUALS_U,
    TupleKind.UNIFORM,
    TupleKind.NEAR_DIAGONAL,
    TupleKind.UNIFORM,
    TupleKind.Y_EQUALS_V,
    TupleKind.UNIFORM,
    TupleKind.NEAR_DIAGONAL,
    TupleKind.UNIFORM,
)


def tuple_kind(index: int) -> TupleKind:
    return _CYCLE[index % len(_CYCLE)]


@dataclass(frozen=True)
class TupleSampler:
    """Seeded generator of comparable tuples (x >= u, y <= v) in [-radius, radius]^n.

    Tuples are produced in chunks from a single generator, so the stream
    depends only on ``seed`` and ``dimension``.
    """

    dimension: int
    radius: float = 10.0
    chunk: int = 1024
    low: Optional[float] = None
    high: Optional[float] = None

    def bounds(self) -> tuple[float, float]:
        lo = -self.radius if self.low is None else self.low
        hi = self.radius if self.high is None else self.high
        return lo, hi

    def stream(self, budget: int, seed: int):
        rng = np.random.default_rng(seed)
        lo, hi = self.bounds()
        n = self.dimension
        start = 0
        while start < budget:
            m = min(self.chunk, budget - start)
            raw = rng.uniform(lo, hi, size=(m, 4, n))
            gaps = 10.0 ** rng.uniform(-9, -1, size=(m, 2, 1)) * rng.uniform(0, 1, size=(m, 2, n))
            for j in range(m):
                idx = start + j
                a, b, c, d = raw[j]
                x, u = np.maximum(a, b), np.minimum(a, b)
                y, v = np.minimum(c, d), np.maximum(c, d)
                kind = tuple_kind(idx)
                if kind is TupleKind.X_EQUALS_U:
                    u = x.copy()
                elif kind is TupleKind.Y_EQUALS_V:
                    v = y.copy()
                elif kind is TupleKind.NEAR_DIAGONAL:
                    u = np.maximum(x - gaps[j, 0] * (hi - lo), lo)
                    v = np.minimum(y + gaps[j, 1] * (hi - lo), hi)
                yield idx, x, y, u, v
            start += m


def certify(
    spec: ConditionSpec,
    F: CoupledMap,
    budget: int = 10_000,
    seed: int = 42,
    sampler: Optional[TupleSampler] = None,
) -> CheckReport:
    """Search ``budget`` sampled comparable tuples for a violation of ``spec``.

    Stops at the first violating tuple (lowest index) and reports it as the
    witness; otherwise the map is reported certified on the sample.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    sampler = sampler or TupleSampler(F.dimension)
    if sampler.dimension != F.dimension:
        raise DimensionError("sampler and map dimensions differ")
    tested = 0
    for idx, x, y, u, v in sampler.stream(budget, seed):
        tested += 1
        try:
            lhs, rhs = _raw_condition(spec, F, x, y, u, v)
        except (ArithmeticError, ValueError) as exc:
            if isinstance(exc, DimensionError):
                raise
            lhs, rhs = math.nan, math.nan
        if is_violation(lhs, rhs):
            w = Witness(x.tolist(), y.tolist(), u.tolist(), v.tolist(), float(lhs), float(rhs), idx)
            return CheckReport(spec.describe(), Verdict.FALSIFIED, tested, seed, w, spec)
    return CheckReport(spec.describe(), Verdict.CERTIFIED, tested, seed, None, spec)


def replay(report: CheckReport, F: CoupledMap) -> tuple[float, float]:
    """Re-evaluate a falsification witness against ``F``."""
    if report.witness is None or report.condition is None:
        raise ValueError("report carries no replayable witness")
    w = report.witness
    return evaluate_condition(report.condition, F, w.x, w.y, w.u, w.v)


# -- mixed monotone property ----------------------------------------------------

def _monotone_gap(F: CoupledMap, x, y, u, v) -> float:
    """Largest entry of F(u,v) - F(x,y); positive means F(u,v) <= F(x,y) fails."""
    hi = F.raw(x, y)
    lo = F.raw(u, v)
    gap = lo - hi
    if not (np.all(np.isfinite(hi)) and np.all(np.isfinite(lo))):
        return math.nan
    return float(np.max(gap))


def check_mixed_monotone(
    F: CoupledMap,
    sampler: Optional[TupleSampler] = None,
    budget: int = 10_000,
    seed: int = 42,
) -> CheckReport:
    """Sample F for the mixed monotone property.

    Each sample moves one argument: even indices test x1 <= x2 implies
    F(x1,y) <= F(x2,y), odd indices test y1 <= y2 implies F(x,y1) >= F(x,y2).
    Both are phrased on a tuple (x, y, u, v) with x >= u, y <= v as
    ``lhs = max(F(u,v) - F(x,y)) <= 0 = rhs``.
    """
    sampler = sampler or TupleSampler(F.dimension)
    tested = 0
    for idx, x, y, u, v in sampler.stream(budget, seed):
        tested += 1
        if idx % 2 == 0:
            v = y  # vary the first argument only
        else:
            u = x  # vary the second argument only
        try:
            gap = _monotone_gap(F, x, y, u, v)
        except (ArithmeticError, ValueError) as exc:
            if isinstance(exc, DimensionError):
                raise
            gap = math.nan
        if is_violation(gap, 0.0):
            w = Witness(x.tolist(), y.tolist(), u.tolist(), v.tolist(), gap, 0.0, idx)
            return CheckReport("mixed-monotone", Verdict.FALSIFIED, tested, seed, w)
    return CheckReport("mixed-monotone", Verdict.CERTIFIED, tested, seed)


# -- built-in maps --------------------------------------------------------------

def example_map() -> CoupledMap:
    """F(x, y) = (x - 2y) / 4 on the real line."""
    return CoupledMap(lambda x, y: (x - 2.0 * y) / 4.0, 1, "example1")


def linear_map(a: float, b: float, dimension: int = 1) -> CoupledMap:
    """F(x, y) = a x - b y, applied componentwise."""
    return CoupledMap(lambda x, y: a * x - b * y, dimension, f"linear:{a:g},{b:g}")


def constant_map(c: float, dimension: int = 1) -> CoupledMap:
    return CoupledMap(lambda x, y: np.full(dimension, c), dimension, f"constant:{c:g}")


def first_argument_map(dimension: int = 1) -> CoupledMap:
    """F(x, y) = x; every pair is a coupled fixed point."""
    return CoupledMap(lambda x, y: np.array(x, dtype=float), dimension, "first")


def parse_map(spec: str, dimension: int = 1) -> CoupledMap:
    name, _, arg = spec.strip().partition(":")
    name = name.lower()
    try:
        params = [float(p) for p in arg.split(",")] if arg else []
    except ValueError:
        raise ValueError(f"{spec!r}: map parameters must be numbers") from None
    if name == "example1" and not params:
        if dimension != 1:
            raise ValueError("example1 is a scalar map")
        return example_map()
    if name == "linear" and len(params) == 2:
        return linear_map(params[0], params[1], dimension)
    if name == "constant" and len(params) == 1:
        return constant_map(params[0], dimension)
    if name == "first" and not params:
        return first_argument_map(dimension)
    if name in ("example1", "linear", "constant", "first"):
        raise ValueError(f"{spec!r}: wrong number of parameters for map {name!r}")
    raise KeyError(f"unknown map {spec!r}")


MAP_NAMES = ("example1", "linear:a,b", "constant:c", "first")
