"""Full-dimension LCMV processing: weights, output power and SCNR loss."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .numerics import solve_or_pinv
from .sampling import SampleCncm
from .scene import SpaceTimeSteering

InverseOperator = Callable[[np.ndarray], np.ndarray]
Target = Union[SpaceTimeSteering, np.ndarray]

GAIN_TOL = 1e-10


class Method(enum.Enum):
    """Processing algorithms, in reporting order."""

    OPTIMAL = "optimal"
    FD = "fd"
    RD = "rd"
    RMT_FD = "rmt_fd"
    RMT_RD = "rmt_rd"

    @property
    def order(self) -> int:
        return list(Method).index(self)


class DegenerateInverseError(ArithmeticError):
    """``a^H R^-1 a`` was not positive, so the inverse estimate is unusable."""


@dataclass(frozen=True)
class StapWeights:
    w: np.ndarray = field(repr=False)
    target: np.ndarray = field(repr=False)
    method: Method

    @property
    def gain(self) -> complex:
        """``w^H a``; unity for every LCMV solution."""
        return complex(np.vdot(self.w, self.target))

    def to_full(self, T: np.ndarray, full_target: Target) -> "StapWeights":
        """Lift reduced-space weights back to the full space as ``T w``."""
        return StapWeights(T @ self.w, _vector(full_target), self.method)


@dataclass(frozen=True)
class PowerReport:
    output_power: float
    scnr_loss: float

    @property
    def scnr_loss_db(self) -> float:
        return 10.0 * np.log10(self.scnr_loss)

    @property
    def output_power_db(self) -> float:
        return 10.0 * np.log10(self.output_power)


def _vector(target: Target) -> np.ndarray:
    if isinstance(target, SpaceTimeSteering):
        return target.vector
    return np.asarray(target, dtype=np.complex128)


def matrix_inverse(m: np.ndarray) -> InverseOperator:
    """Inverse (or pseudo-inverse, if singular) of a Hermitian matrix as an operator."""
    return lambda b: solve_or_pinv(m, b)


def lcmv_weights(inv_apply: InverseOperator, target: Target,
                 method: Method = Method.OPTIMAL) -> StapWeights:
    """Minimum-variance weights with unit gain on ``target``.

    ``w = Ri a / (a^H Ri a)`` where ``Ri`` is whatever inverse-covariance
    estimate ``inv_apply`` represents.
    """
    a = _vector(target)
    x = inv_apply(a)
    den = np.vdot(a, x)
    if not np.isfinite(den) or den.real <= 0:
        raise DegenerateInverseError(f"a^H Ri a = {den} is not positive")
    weights = StapWeights(x / den, a, method)
    if abs(weights.gain - 1.0) > GAIN_TOL:
        raise DegenerateInverseError(f"unit-gain constraint violated: w^H a = {weights.gain}")
    return weights


def optimal_weights(R: np.ndarray, target: Target) -> StapWeights:
    return lcmv_weights(matrix_inverse(R), target, Method.OPTIMAL)


def optimal_power(R: np.ndarray, target: Target) -> float:
    """Minimum output power ``1 / (a^H R^-1 a)``."""
    a = _vector(target)
    return 1.0 / float(np.real(np.vdot(a, np.linalg.solve(R, a))))


def output_power(weights: StapWeights, R_true: np.ndarray) -> float:
    """Clutter-plus-noise power ``w^H R w`` at the filter output."""
    w = weights.w
    return float(np.real(np.vdot(w, R_true @ w)))


def scnr_loss(weights: StapWeights, R_true: np.ndarray, noise_power: float,
              dim: int | None = None) -> float:
    """Output SCNR relative to the clutter-free matched filter (linear, <= 1)."""
    dim = weights.w.shape[0] if dim is None else dim
    gain = abs(weights.gain) ** 2
    return noise_power / dim * gain / output_power(weights, R_true)


def power_report(weights: StapWeights, R_true: np.ndarray, noise_power: float,
                 dim: int | None = None) -> PowerReport:
    p = output_power(weights, R_true)
    dim = weights.w.shape[0] if dim is None else dim
    return PowerReport(p, noise_power / dim * abs(weights.gain) ** 2 / p)


def fd_stap(sample: SampleCncm, target: Target) -> StapWeights:
    """Sample-matrix-inversion weights; pseudo-inverse when ``L < NK``."""
    return lcmv_weights(matrix_inverse(sample.matrix), target, Method.FD)
