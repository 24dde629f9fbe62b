"""Componentwise-ordered real vectors, the product order on pairs, and metrics."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np


class DimensionError(ValueError):
    """Raised when two vectors (or pairs) of different dimension are combined."""


class Ordering(enum.Enum):
    EQUAL = "equal"
    LESS_OR_EQUAL = "less_or_equal"
    GREATER_OR_EQUAL = "greater_or_equal"
    INCOMPARABLE = "incomparable"


class Metric(enum.Enum):
    SUP_NORM = "sup"
    EUCLIDEAN = "euclidean"
    ABSOLUTE_SCALAR = "abs"


@dataclass(frozen=True, eq=False)
class OrderedVector:
    """A finite real vector; read-only once built, NaN/inf rejected."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float, copy=True).reshape(-1)
        if arr.size == 0:
            raise ValueError("OrderedVector needs at least one entry")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"OrderedVector entries must be finite, got {arr.tolist()}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def dim(self) -> int:
        return self.values.size

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, OrderedVector):
            return NotImplemented
        return self.dim == other.dim and bool(np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash(self.values.tobytes())

    def __repr__(self):
        return f"OrderedVector({self.values.tolist()})"

    def tolist(self) -> list[float]:
        return self.values.tolist()


VectorLike = Union[OrderedVector, np.ndarray, Iterable[float], float, int]


def as_vector(v: VectorLike) -> OrderedVector:
    if isinstance(v, OrderedVector):
        return v
    return OrderedVector(np.atleast_1d(np.asarray(v, dtype=float)))


@dataclass(frozen=True)
class PairPoint:
    """An element (first, second) of X x X."""

    first: OrderedVector
    second: OrderedVector

    def __post_init__(self):
        object.__setattr__(self, "first", as_vector(self.first))
        object.__setattr__(self, "second", as_vector(self.second))
        if self.first.dim != self.second.dim:
            raise DimensionError(
                f"pair components differ in dimension: {self.first.dim} vs {self.second.dim}"
            )

    @property
    def dim(self) -> int:
        return self.first.dim

    def swapped(self) -> PairPoint:
        return PairPoint(self.second, self.first)


def as_pair(p) -> PairPoint:
    if isinstance(p, PairPoint):
        return p
    first, second = p
    return PairPoint(as_vector(first), as_vector(second))


def _check_dims(a: OrderedVector, b: OrderedVector) -> None:
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")


def compare(a: VectorLike, b: VectorLike, slack: float = 0.0) -> Ordering:
    """Componentwise comparison of ``a`` against ``b``.

    ``slack`` loosens both ``<=`` tests by an absolute amount; with the
    default of zero the comparison is exact.
    """
    a, b = as_vector(a), as_vector(b)
    _check_dims(a, b)
    diff = a.values - b.values
    le = bool(np.all(diff <= slack))
    ge = bool(np.all(diff >= -slack))
    if le and ge:
        return Ordering.EQUAL
    if le:
        return Ordering.LESS_OR_EQUAL
    if ge:
        return Ordering.GREATER_OR_EQUAL
    return Ordering.INCOMPARABLE


def leq(a: VectorLike, b: VectorLike, slack: float = 0.0) -> bool:
    return compare(a, b, slack) in (Ordering.LESS_OR_EQUAL, Ordering.EQUAL)


def comparable(a: VectorLike, b: VectorLike, slack: float = 0.0) -> bool:
    return compare(a, b, slack) is not Ordering.INCOMPARABLE


def product_compare(Y, V, slack: float = 0.0) -> Ordering:
    """Compare ``Y`` against ``V`` in the product order on X x X.

    ``V <= Y`` iff ``Y.first >= V.first`` and ``Y.second <= V.second``. The
    result reads as "Y is <ordering> V", so ``GREATER_OR_EQUAL`` means
    ``V <= Y``.
    """
    Y, V = as_pair(Y), as_pair(V)
    _check_dims(Y.first, V.first)
    first = compare(Y.first, V.first, slack)
    # second slot is order-reversed
    second = compare(V.second, Y.second, slack)
    if first is Ordering.EQUAL and second is Ordering.EQUAL:
        return Ordering.EQUAL
    ge = {Ordering.GREATER_OR_EQUAL, Ordering.EQUAL}
    le = {Ordering.LESS_OR_EQUAL, Ordering.EQUAL}
    if first in ge and second in ge:
        return Ordering.GREATER_OR_EQUAL
    if first in le and second in le:
        return Ordering.LESS_OR_EQUAL
    return Ordering.INCOMPARABLE


def pair_leq(V, Y, slack: float = 0.0) -> bool:
    """True iff ``V <= Y`` in the product order."""
    return product_compare(Y, V, slack) in (Ordering.GREATER_OR_EQUAL, Ordering.EQUAL)


def bounds_pair(Y, V) -> PairPoint:
    """An element of X x X that is above both ``Y`` and ``V`` in the product order."""
    Y, V = as_pair(Y), as_pair(V)
    _check_dims(Y.first, V.first)
    return PairPoint(
        OrderedVector(np.maximum(Y.first.values, V.first.values)),
        OrderedVector(np.minimum(Y.second.values, V.second.values)),
    )


def distance(metric: Metric, a: VectorLike, b: VectorLike) -> float:
    a, b = as_vector(a), as_vector(b)
    _check_dims(a, b)
    return raw_distance(metric, a.values, b.values)


def raw_distance(metric: Metric, a: np.ndarray, b: np.ndarray) -> float:
    """``distance`` on bare arrays of equal length; no validation."""
    diff = a - b
    if metric is Metric.SUP_NORM:
        return float(np.max(np.abs(diff)))
    if metric is Metric.EUCLIDEAN:
        return float(np.sqrt(np.dot(diff, diff)))
    if metric is Metric.ABSOLUTE_SCALAR:
        if diff.size != 1:
            raise DimensionError(f"absolute-value metric needs scalars, got dimension {diff.size}")
        return float(abs(diff[0]))
    raise ValueError(f"unknown metric {metric!r}")


def d2(metric: Metric, Y, V) -> float:
    """Half the sum of the componentwise distances between two pairs."""
    Y, V = as_pair(Y), as_pair(V)
    return 0.5 * (distance(metric, Y.first, V.first) + distance(metric, Y.second, V.second))
