"""JSON config files for the CLI: Fredholm problems and condition checks.

Kernels, nonlinearities and the forcing term are chosen from named
built-ins so that a config never carries executable code.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .contraction import ConditionKind, ConditionSpec, CoupledMap, parse_map
from .control import FunctionClass, parse_control
from .fredholm import FredholmProblem, LowerUpperPair
from .order import Metric
from .solver import SolverConfig


class ConfigError(ValueError):
    """A config file is unreadable or names something unknown."""


def _msg(exc: Exception) -> str:
    return exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


def _poly(coeffs: list[float]):
    c = np.asarray(coeffs, dtype=float)
    return lambda z: np.polynomial.polynomial.polyval(z, c)


class ConstantKernel(_Model):
    type: Literal["constant"]
    value: float

    def build(self):
        v = self.value
        return lambda t, s: np.full(np.broadcast_shapes(np.shape(t), np.shape(s)), v)


class SeparableKernel(_Model):
    """K(t, s) = scale * P(t) * Q(s) with P, Q given by ascending coefficients."""

    type: Literal["separable"]
    scale: float = 1.0
    t_coeffs: list[float] = [1.0]
    s_coeffs: list[float] = [1.0]

    def build(self):
        P, Q, c = _poly(self.t_coeffs), _poly(self.s_coeffs), self.scale
        return lambda t, s: c * P(t) * Q(s)


Kernel = Annotated[Union[ConstantKernel, SeparableKernel], Field(discriminator="type")]


class LinearNonlinearity(_Model):
    type: Literal["linear"]
    coef: float

    def build(self):
        c = self.coef
        return lambda s, x: c * np.asarray(x, dtype=float)


class PolynomialNonlinearity(_Model):
    """f(s, x) = sum_k coeffs[k] x^k."""

    type: Literal["polynomial"]
    coeffs: list[float]

    def build(self):
        P = _poly(self.coeffs)
        return lambda s, x: P(np.asarray(x, dtype=float)) + 0.0 * np.asarray(s, dtype=float)


Nonlinearity = Annotated[Union[LinearNonlinearity, PolynomialNonlinearity], Field(discriminator="type")]


class ConstantForcing(_Model):
    type: Literal["constant"]
    value: float

    def build(self):
        v = self.value
        return lambda t: np.full(np.shape(t), v)


class PolynomialForcing(_Model):
    """h(t) = sum_k coeffs[k] t^k."""

    type: Literal["polynomial"]
    coeffs: list[float]

    def build(self):
        P = _poly(self.coeffs)
        return lambda t: P(np.asarray(t, dtype=float))


Forcing = Annotated[Union[ConstantForcing, PolynomialForcing], Field(discriminator="type")]


class Interval(_Model):
    a: float
    b: float

    @model_validator(mode="after")
    def _ordered(self):
        if not self.a < self.b:
            raise ValueError("interval needs a < b")
        return self


class Kernels(_Model):
    k1: Kernel
    k2: Kernel


class Nonlinearities(_Model):
    f: Nonlinearity
    g: Nonlinearity


class Constants(_Model):
    lambda_: float = Field(alias="lambda", gt=0)
    mu: float = Field(gt=0)


class LowerUpper(_Model):
    alpha: Union[float, list[float]]
    beta: Union[float, list[float]]


class SolverSection(_Model):
    tolerance: float = Field(1e-10, gt=0)
    max_iterations: int = Field(10_000, ge=1)
    strict_monotone: bool = False


class FredholmConfig(_Model):
    interval: Interval
    grid_size: int = Field(101, ge=2)
    kernels: Kernels
    nonlinearities: Nonlinearities
    forcing: Forcing
    constants: Constants
    theta: str = "theta1:0.25"
    lower_upper: LowerUpper
    solver: SolverSection = SolverSection()

    def problem(self, grid_size: Optional[int] = None) -> FredholmProblem:
        try:
            theta = parse_control(self.theta, FunctionClass.THETA)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"theta: {_msg(exc)}") from None
        return FredholmProblem(
            a=self.interval.a,
            b=self.interval.b,
            k1=self.kernels.k1.build(),
            k2=self.kernels.k2.build(),
            f=self.nonlinearities.f.build(),
            g=self.nonlinearities.g.build(),
            h=self.forcing.build(),
            lam=self.constants.lambda_,
            mu=self.constants.mu,
            theta=theta,
            grid_size=grid_size or self.grid_size,
        )

    def lower_upper_pair(self, n: int) -> LowerUpperPair:
        def side(name, value):
            if isinstance(value, list):
                if len(value) != n:
                    raise ConfigError(f"lower_upper.{name}: expected {n} node values, got {len(value)}")
                return np.asarray(value, dtype=float)
            return np.full(n, float(value))

        return LowerUpperPair(side("alpha", self.lower_upper.alpha), side("beta", self.lower_upper.beta))

    def solver_config(self, tolerance: Optional[float] = None, max_iterations: Optional[int] = None) -> SolverConfig:
        return SolverConfig(
            tolerance=tolerance or self.solver.tolerance,
            max_iterations=max_iterations or self.solver.max_iterations,
            strict_monotone=self.solver.strict_monotone,
        )


class ConditionConfig(_Model):
    """Config for ``certify`` / ``falsify``."""

    map: str = "example1"
    dimension: int = Field(1, ge=1)
    condition: Literal["bhaskar", "luong", "berinde", "berinde-cor"] = "berinde"
    k: Optional[float] = None
    phi: str = "identity"
    psi: Optional[str] = None
    metric: Literal["sup", "euclidean", "abs"] = "sup"
    radius: float = Field(10.0, gt=0)

    def coupled_map(self) -> CoupledMap:
        try:
            return parse_map(self.map, self.dimension)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"map: {_msg(exc)}") from None

    def spec(self) -> ConditionSpec:
        kind = ConditionKind(self.condition)
        metric = Metric(self.metric)
        if kind is ConditionKind.BHASKAR:
            if self.k is None:
                raise ConfigError("k: the bhaskar condition needs a constant k")
            try:
                return ConditionSpec.bhaskar(self.k, metric)
            except ValueError as exc:
                raise ConfigError(f"k: {exc}") from None
        if self.psi is None:
            raise ConfigError(f"psi: the {kind.value} condition needs psi")
        try:
            phi = parse_control(self.phi, FunctionClass.PHI)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"phi: {_msg(exc)}") from None
        try:
            psi = parse_control(self.psi, FunctionClass.PSI)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"psi: {_msg(exc)}") from None
        return ConditionSpec(kind, phi=phi, psi=psi, metric=metric)


def _read(path: Union[str, Path]) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: {path} is not valid JSON ({exc.msg} at line {exc.lineno})") from None


def _validate(model, data: dict):
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        loc = ".".join(str(p) for p in err["loc"]) or "config"
        raise ConfigError(f"{loc}: {err['msg']}") from None


def load_fredholm_config(path: Union[str, Path]) -> FredholmConfig:
    return _validate(FredholmConfig, _read(path))


def load_condition_config(path: Union[str, Path], **overrides) -> ConditionConfig:
    data = _read(path) if path else {}
    data.update({k: v for k, v in overrides.items() if v is not None})
    return _validate(ConditionConfig, data)
