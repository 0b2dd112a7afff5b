"""Spiked-covariance eigenvalue correction of the inverse CNCM.

The sample CNCM (normalized by the noise power) is eigendecomposed; the top
``Q`` eigenvalues are mapped back to population spike strengths, the target's
energy in each true clutter direction is estimated, and the inverse-CNCM
eigenvalues along the sample eigenvectors are set to the values that
minimize the asymptotic output power. All other directions keep the noise
level ``1 / noise_power``.

Symbols: ``mu`` is a noise-normalized sample eigenvalue, ``rho`` a spike
strength (population eigenvalue minus one), ``k`` the target energy
``|a^H v|^2`` along a population eigenvector, ``c`` the dimension-to-sample
ratio and ``h`` the correction added to the unit inverse eigenvalue.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import EigenSystem, eigh
from .sampling import SampleCncm
from .scene import SpaceTimeSteering
from .stap import Method, StapWeights, Target, lcmv_weights

EDGE_EPS = 1e-6
K_CLAMP = 1e-9


class NotApplicable(Exception):
    """Fewer training samples than clutter DOFs; the correction is undefined."""


@dataclass(frozen=True)
class SpikedRatio:
    dim: int
    n_samples: int

    def __post_init__(self):
        if self.dim < 1 or self.n_samples < 1:
            raise ValueError("dim and n_samples must be positive")

    @property
    def c(self) -> float:
        return self.dim / self.n_samples

    @property
    def edge(self) -> float:
        """Upper edge ``(1 + sqrt(c))^2`` of the noise bulk."""
        return (1.0 + np.sqrt(self.c)) ** 2


@dataclass(frozen=True)
class SpikeCorrection:
    """Per-spike estimates for the top ``Q`` sample eigenvalues.

    Unusable spikes (at or below the bulk edge) carry NaN estimates and a
    zero correction.
    """

    sample_eig: np.ndarray
    rho_hat: np.ndarray
    k_hat: np.ndarray
    h_hat: np.ndarray
    usable: np.ndarray
    c: float
    clamped: bool = False

    @property
    def n_spikes(self) -> int:
        return self.sample_eig.shape[0]

    @property
    def inverse_eigenvalues(self) -> np.ndarray:
        """Noise-normalized eigenvalues ``1 + h`` along the corrected directions."""
        return 1.0 + self.h_hat


@dataclass(frozen=True)
class CorrectedInverse:
    """``(1/noise_power) (I + sum_i h_i u_i u_i^H)`` kept in factored form."""

    correction: SpikeCorrection
    eigvecs: np.ndarray = field(repr=False)
    noise_power: float
    dim: int

    def __call__(self, b: np.ndarray) -> np.ndarray:
        return self.apply(b)

    def apply(self, b: np.ndarray) -> np.ndarray:
        U, h = self.eigvecs, self.correction.h_hat
        coeffs = U.conj().T @ b
        if b.ndim == 1:
            return (b + U @ (h * coeffs)) / self.noise_power
        return (b + U @ (h[:, None] * coeffs)) / self.noise_power

    def matrix(self) -> np.ndarray:
        U, h = self.eigvecs, self.correction.h_hat
        return (np.eye(self.dim) + (U * h) @ U.conj().T) / self.noise_power


def is_usable(mu, c: float, edge_eps: float = EDGE_EPS):
    return np.asarray(mu) > (1.0 + np.sqrt(c)) ** 2 + edge_eps


def estimate_rho(mu, c: float):
    """Spike strength from a noise-normalized sample eigenvalue.

    Inverts ``mu = 1 + rho + c (1 + rho) / rho`` on the branch ``rho > sqrt(c)``.
    Returns NaN where ``mu`` is not above the bulk edge.
    """
    mu = np.asarray(mu, dtype=float)
    b = mu - 1.0 - c
    disc = b * b - 4.0 * c
    ok = is_usable(mu, c) & (disc >= 0)
    rho = np.where(ok, 0.5 * (b + np.sqrt(np.where(ok, disc, 0.0))), np.nan)
    return float(rho) if rho.ndim == 0 else rho


def estimate_k(a, u, rho_hat, c: float):
    """Target energy along the population eigenvector(s) behind ``u``.

    ``u`` may be a single eigenvector or a matrix with one per column.
    Returns NaN where ``rho_hat**2 <= c``.
    """
    a = a.vector if isinstance(a, SpaceTimeSteering) else np.asarray(a)
    rho = np.asarray(rho_hat, dtype=float)
    proj = np.abs(np.asarray(u).conj().T @ a) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = (1.0 + c / rho) / (1.0 - c / rho ** 2)
    k = np.where(rho ** 2 > c, factor * proj, np.nan)
    return float(k) if k.ndim == 0 else k


def asymptotic_overlap(rho, c: float):
    """Limit of ``|v_i^H u_i|^2``: ``(1 - c/rho^2) / (1 + c/rho)``."""
    rho = np.asarray(rho, dtype=float)
    return (1.0 - c / rho ** 2) / (1.0 + c / rho)


def optimal_h(rho, k, a_norm_sq: float, c: float) -> np.ndarray:
    """Closed-form minimizer of the deterministic-equivalent output power."""
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if rho.size == 0:
        return np.zeros(0)
    denom = a_norm_sq - k.sum() + np.sum(c * k / rho ** 2)
    if not denom > 0:
        raise ArithmeticError(f"non-positive denominator {denom:.3e} in spike correction")
    bracket = np.sum(c * k / rho) / denom
    return (rho + c) / (rho ** 2 + rho) * (bracket - rho)


def deterministic_equivalent_power(h, rho, k, a_norm_sq: float, noise_power: float, s) -> float:
    """Large-system limit of the output power for a given correction ``h``."""
    h, rho, k, s = (np.asarray(x, dtype=float) for x in (h, rho, k, s))
    hsk = np.sum(h * s * k)
    den = (a_norm_sq + hsk) ** 2
    if den == 0:
        raise ZeroDivisionError("deterministic equivalent has a zero denominator")
    num = (a_norm_sq
           + 2.0 * hsk + np.sum(k * rho) + 2.0 * np.sum(h * rho * s * k)
           + np.sum(h ** 2 * s * k) + np.sum(h ** 2 * rho * s ** 2 * k))
    return float(noise_power * num / den)


def correct_spikes(eigs: EigenSystem, Q: int, a: np.ndarray, c: float) -> SpikeCorrection:
    """Estimate the corrections for the top ``Q`` pairs of a noise-normalized
    eigensystem."""
    mu = eigs.values[:Q].astype(float)
    U = eigs.vectors[:, :Q]
    usable = is_usable(mu, c)
    rho = np.full(Q, np.nan)
    k = np.full(Q, np.nan)
    h = np.zeros(Q)
    clamped = False
    if usable.any():
        rho_u = np.atleast_1d(estimate_rho(mu[usable], c))
        k_u = np.atleast_1d(estimate_k(a, U[:, usable], rho_u, c))
        a_norm_sq = float(np.real(np.vdot(a, a)))
        limit = a_norm_sq * (1.0 - K_CLAMP)
        if k_u.sum() > limit:
            k_u = k_u * (limit / k_u.sum())
            clamped = True
        rho[usable], k[usable] = rho_u, k_u
        h[usable] = optimal_h(rho_u, k_u, a_norm_sq, c)
    return SpikeCorrection(mu, rho, k, h, usable, c, clamped)


def _corrected_inverse(sample: SampleCncm, Q: int, a: np.ndarray,
                       noise_power: float) -> CorrectedInverse:
    dim, L = sample.dim, sample.n_samples
    if L < Q:
        raise NotApplicable(f"{L} training samples < {Q} clutter DOFs")
    if Q < 0 or Q > dim:
        raise ValueError(f"clutter DOF {Q} outside [0, {dim}]")
    c = SpikedRatio(dim, L).c
    if Q == 0:
        empty = np.zeros(0)
        corr = SpikeCorrection(empty, empty, empty, empty, np.zeros(0, bool), c)
        return CorrectedInverse(corr, np.zeros((dim, 0), complex), noise_power, dim)
    eigs = eigh(sample.matrix / noise_power)
    corr = correct_spikes(eigs, Q, a, c)
    return CorrectedInverse(corr, eigs.vectors[:, :Q], noise_power, dim)


def rmt_fd_inverse(sample: SampleCncm, Q: int, target: Target,
                   noise_power: float = 1.0) -> CorrectedInverse:
    """Corrected full-dimension inverse CNCM; ``Q`` is the clutter rank."""
    a = target.vector if isinstance(target, SpaceTimeSteering) else np.asarray(target)
    return _corrected_inverse(sample, Q, a, noise_power)


def rmt_rd_inverse(sample_rd: SampleCncm, Q_rd: int, a_rd: np.ndarray,
                   noise_power: float = 1.0) -> CorrectedInverse:
    """Corrected reduced-dimension inverse; white noise of power
    ``noise_power`` is assumed after the transform."""
    return _corrected_inverse(sample_rd, Q_rd, np.asarray(a_rd), noise_power)


def rmt_fd_stap(sample: SampleCncm, Q: int, target: Target,
                noise_power: float = 1.0) -> tuple[StapWeights, CorrectedInverse]:
    inv = rmt_fd_inverse(sample, Q, target, noise_power)
    return lcmv_weights(inv, target, Method.RMT_FD), inv


def rmt_rd_stap(sample_rd: SampleCncm, Q_rd: int, a_rd: np.ndarray,
                noise_power: float = 1.0) -> tuple[StapWeights, CorrectedInverse]:
    inv = rmt_rd_inverse(sample_rd, Q_rd, a_rd, noise_power)
    return lcmv_weights(inv, a_rd, Method.RMT_RD), inv


def estimate_noise_power(sample: SampleCncm, Q: int) -> float:
    """Noise power from the residual trace outside the top ``Q`` eigenvalues.

    A convenience fallback when the noise level is not known in advance; the
    corrections above assume it is.
    """
    values = eigh(sample.matrix).values
    dim = values.shape[0]
    if Q >= dim:
        raise ValueError("need Q < dim to estimate the noise power")
    return float(np.sum(values[Q:]) / (dim - Q))
