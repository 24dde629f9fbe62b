"""Control functions for the altering-distance classes Phi, Psi and Theta.

Class membership can only be checked on samples: every ``validate_*``
function evaluates the candidate on a grid and records each failed
property as a :class:`Violation` instead of raising.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class FunctionClass(enum.Enum):
    PHI = "phi"
    PSI = "psi"
    THETA = "theta"


@dataclass(frozen=True)
class ControlFunction:
    evaluator: Callable[[float], float]
    declared_class: FunctionClass
    label: str = ""

    def __call__(self, t: float) -> float:
        return float(self.evaluator(t))


@dataclass(frozen=True)
class Violation:
    input: float
    observed: float
    expected: str


@dataclass
class ClassReport:
    class_checked: FunctionClass
    violations: list[Violation] = field(default_factory=list)
    samples_used: int = 0

    @property
    def passed(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class SampleGrid:
    """Log-spaced sample points in ``[t_min, t_max]``."""

    t_min: float = 1e-9
    t_max: float = 1e3
    points: int = 256

    def __post_init__(self):
        if not 0 < self.t_min < self.t_max:
            raise ValueError("need 0 < t_min < t_max")
        if self.points < 100:
            raise ValueError("sample grid needs at least 100 points")

    def samples(self) -> np.ndarray:
        return np.geomspace(self.t_min, self.t_max, self.points)


DEFAULT_GRID = SampleGrid()

# neighborhoods for the limit conditions on psi
LIMIT_POINTS = 32
LIMIT_FLOOR = 1e-9
ZERO_LIMIT_TOL = 1e-6
REFINE_STEPS = 24


def _evaluate(fn: ControlFunction, ts: np.ndarray, report: ClassReport) -> np.ndarray:
    values = np.empty_like(ts)
    for i, t in enumerate(ts):
        try:
            v = fn(t)
        except (ArithmeticError, ValueError) as exc:
            v = math.nan
            report.violations.append(Violation(float(t), v, f"evaluation failed: {exc}"))
            values[i] = v
            continue
        values[i] = v
        if not math.isfinite(v):
            report.violations.append(Violation(float(t), v, "finite value"))
        elif v < 0:
            report.violations.append(Violation(float(t), v, ">= 0"))
    report.samples_used += len(ts)
    return values


def _check_nondecreasing(ts, values, report: ClassReport) -> None:
    for i in range(len(ts) - 1):
        if values[i + 1] < values[i]:
            report.violations.append(
                Violation(float(ts[i + 1]), float(values[i + 1]), f"non-decreasing (>= {float(values[i])!r})")
            )


def _check_continuity(fn: ControlFunction, ts, values, report: ClassReport, modulus: float) -> None:
    # Each interval is bisected toward its larger half-jump before the jump
    # bound is applied: a step keeps its size while the bound shrinks with h.
    h = np.diff(ts)
    slopes = np.abs(np.diff(values)) / h
    n = len(h)
    for i in range(n):
        local = max(slopes[j] for j in (i - 1, i, i + 1) if 0 <= j < n)
        lo, hi, vlo, vhi = ts[i], ts[i + 1], values[i], values[i + 1]
        if vlo == vhi:
            continue
        for _ in range(REFINE_STEPS):
            mid = 0.5 * (lo + hi)
            vm = fn(mid)
            if not math.isfinite(vm):
                break
            if abs(vm - vlo) >= abs(vhi - vm):
                hi, vhi = mid, vm
            else:
                lo, vlo = mid, vm
        jump = abs(vhi - vlo)
        if jump > modulus * (hi - lo) * (local + 1.0):
            report.violations.append(Violation(float(hi), float(vhi), f"continuous (jump {jump!r} near t={lo!r})"))


def validate_phi(phi: ControlFunction, grid: SampleGrid = DEFAULT_GRID, modulus: float = 10.0) -> ClassReport:
    """Check phi is non-decreasing, (heuristically) continuous, and phi(t) < t for t > 0."""
    report = ClassReport(FunctionClass.PHI)
    ts = grid.samples()
    values = _evaluate(phi, ts, report)
    if report.violations:
        return report
    _check_nondecreasing(ts, values, report)
    for t, v in zip(ts.tolist(), values.tolist()):
        if not v < t:
            report.violations.append(Violation(t, v, f"< {t!r}"))
    _check_continuity(phi, ts, values, report, modulus)
    return report


def validate_psi(psi: ControlFunction, grid: SampleGrid = DEFAULT_GRID) -> ClassReport:
    """Check psi > 0 away from zero (including near sampled r) and psi(t) -> 0 as t -> 0+."""
    report = ClassReport(FunctionClass.PSI)
    ts = grid.samples()
    values = _evaluate(psi, ts, report)
    for t, v in zip(ts, values):
        if math.isfinite(v) and not v > 0:
            report.violations.append(Violation(float(t), float(v), "> 0"))

    # limit at r > 0 stays positive: probe r(1 +- 2^-j) down to radius LIMIT_FLOOR
    rs = ts[np.linspace(0, len(ts) - 1, LIMIT_POINTS).astype(int)]
    for r in rs:
        radius = r / 2
        probes = []
        while radius >= LIMIT_FLOOR:
            probes.extend((r - radius, r + radius))
            radius /= 2
        if not probes:
            continue
        near = _evaluate(psi, np.array(probes), report)
        lowest = float(np.min(near))
        if math.isfinite(lowest) and not lowest > 0:
            report.violations.append(Violation(float(r), lowest, "limit at r > 0 positive"))

    # limit at 0+
    zs = grid.t_min * 2.0 ** -np.arange(0, 8)
    tail = _evaluate(psi, zs, report)
    if not abs(tail[-1]) <= ZERO_LIMIT_TOL:
        report.violations.append(Violation(float(zs[-1]), float(tail[-1]), f"-> 0 (|.| <= {ZERO_LIMIT_TOL})"))
    return report


def psi_from_theta(theta: ControlFunction) -> ControlFunction:
    """The psi paired with ``theta`` through theta(r) = r/2 - psi(r/2), i.e. s - theta(2s)."""
    return ControlFunction(
        lambda s: s - theta(2.0 * s),
        FunctionClass.PSI,
        f"psi[{theta.label}]" if theta.label else "psi_from_theta",
    )


def theta_from_psi(psi: ControlFunction) -> ControlFunction:
    return ControlFunction(
        lambda r: r / 2.0 - psi(r / 2.0),
        FunctionClass.THETA,
        f"theta[{psi.label}]" if psi.label else "theta_from_psi",
    )


def validate_theta(theta: ControlFunction, grid: SampleGrid = DEFAULT_GRID) -> ClassReport:
    report = ClassReport(FunctionClass.THETA)
    ts = grid.samples()
    values = _evaluate(theta, ts, report)
    if not report.violations:
        _check_nondecreasing(ts, values, report)
    psi_report = validate_psi(psi_from_theta(theta), grid)
    report.violations.extend(psi_report.violations)
    report.samples_used += psi_report.samples_used
    return report


def validate(fn: ControlFunction, grid: SampleGrid = DEFAULT_GRID) -> ClassReport:
    """Dispatch on the declared class."""
    return {
        FunctionClass.PHI: validate_phi,
        FunctionClass.PSI: validate_psi,
        FunctionClass.THETA: validate_theta,
    }[fn.declared_class](fn, grid)


# -- built-ins ---------------------------------------------------------------

def identity() -> ControlFunction:
    return ControlFunction(lambda t: t, FunctionClass.PHI, "identity")


def linear(k: float, declared_class: FunctionClass = FunctionClass.PSI) -> ControlFunction:
    return ControlFunction(lambda t: k * t, declared_class, f"linear:{k:g}")


def theta1(k: float) -> ControlFunction:
    return ControlFunction(lambda r: k * r, FunctionClass.THETA, f"theta1:{k:g}")


def theta2() -> ControlFunction:
    return ControlFunction(lambda r: r * r / (2.0 * (r + 1.0)), FunctionClass.THETA, "theta2")


def theta3() -> ControlFunction:
    return ControlFunction(lambda r: r / 2.0 - math.log1p(r) / 2.0, FunctionClass.THETA, "theta3")


def psi_bhaskar(k: float) -> ControlFunction:
    """psi(t) = (1-k)/2 * t: turns the (phi=id, psi) condition into the constant-k one."""
    return ControlFunction(lambda t: (1.0 - k) / 2.0 * t, FunctionClass.PSI, f"psi-linear:{k:g}")


def psi_remark(k: float) -> ControlFunction:
    """psi(t) = (1 - k/2) * t, the scaling quoted for the summed (phi=id) condition."""
    return ControlFunction(lambda t: (1.0 - k / 2.0) * t, FunctionClass.PSI, f"psi-remark:{k:g}")


def parse_control(spec: str, declared_class: FunctionClass | None = None) -> ControlFunction:
    """Build a control function from a name such as ``"linear:0.25"`` or ``"theta2"``.

    Raises ``KeyError`` for unknown names and ``ValueError`` for bad parameters.
    """
    name, _, arg = spec.strip().partition(":")
    name = name.lower()

    def param() -> float:
        if not arg:
            raise ValueError(f"{spec!r}: built-in {name!r} needs a parameter, e.g. {name}:0.5")
        try:
            return float(arg)
        except ValueError:
            raise ValueError(f"{spec!r}: parameter {arg!r} is not a number") from None

    def no_param():
        if arg:
            raise ValueError(f"{spec!r}: built-in {name!r} takes no parameter")

    if name == "identity":
        no_param()
        fn = identity()
    elif name == "linear":
        fn = linear(param())
    elif name == "theta1":
        fn = theta1(param())
    elif name == "theta2":
        no_param()
        fn = theta2()
    elif name == "theta3":
        no_param()
        fn = theta3()
    elif name == "psi-linear":
        fn = psi_bhaskar(param())
    elif name == "psi-remark":
        fn = psi_remark(param())
    elif name == "zero":
        no_param()
        fn = linear(0.0)
        fn = ControlFunction(fn.evaluator, fn.declared_class, "zero")
    else:
        raise KeyError(f"unknown control function {spec!r}")
    if declared_class is not None and declared_class is not fn.declared_class:
        fn = ControlFunction(fn.evaluator, declared_class, fn.label)
    return fn


BUILTIN_NAMES = ("identity", "linear:k", "theta1:k", "theta2", "theta3", "psi-linear:k", "psi-remark:k", "zero")
