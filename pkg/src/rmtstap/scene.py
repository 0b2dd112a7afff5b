"""Side-looking ULA clutter scene: steering vectors, clutter ridge and CNCM."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .numerics import ContractError, herm_sqrt

# Guards floor() against ratios such as 2V/(d*prf) landing a hair under an integer.
_FLOOR_EPS = 1e-9


@dataclass(frozen=True)
class RadarConfig:
    """Platform, waveform and array parameters.

    Defaults reproduce the simulation table (8 elements, 8 pulses, 2 kHz PRF,
    0.3 m wavelength, 6 km altitude, 30 dB CNR) at 150 m/s.
    """

    n_elements: int = 8
    n_pulses: int = 8
    prf_hz: float = 2000.0
    wavelength_m: float = 0.3
    spacing_m: float | None = None
    height_m: float = 6000.0
    velocity_mps: float = 150.0
    noise_power: float = 1.0
    cnr_db: float = 30.0
    n_patches: int = 361
    elevation_rad: float = 0.0

    def __post_init__(self):
        if self.spacing_m is None:
            object.__setattr__(self, "spacing_m", self.wavelength_m / 2)
        if self.n_elements < 1 or self.n_pulses < 1:
            raise ContractError("n_elements and n_pulses must be >= 1")
        if self.prf_hz <= 0 or self.wavelength_m <= 0 or self.spacing_m <= 0:
            raise ContractError("prf, wavelength and spacing must be positive")
        if self.noise_power <= 0:
            raise ContractError("noise_power must be positive")
        if self.n_patches < 1:
            raise ContractError("n_patches must be >= 1")
        if self.velocity_mps < 0:
            raise ContractError("velocity must be non-negative")

    @property
    def dim(self) -> int:
        return self.n_elements * self.n_pulses

    @property
    def slope(self) -> float:
        """Clutter ridge slope ``2V / (d * prf)``."""
        return 2.0 * self.velocity_mps / (self.spacing_m * self.prf_hz)


@dataclass(frozen=True)
class SpaceTimeSteering:
    f_t: float
    f_s: float
    vector: np.ndarray = field(repr=False)

    @property
    def norm_sq(self) -> float:
        return float(np.real(np.vdot(self.vector, self.vector)))


@dataclass(frozen=True)
class ClutterScene:
    config: RadarConfig
    patch_freqs: np.ndarray = field(repr=False)
    patch_powers: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)
    slope: float
    clutter_rank: int

    @property
    def dim(self) -> int:
        return self.config.dim

    @property
    def noise_power(self) -> float:
        return self.config.noise_power

    @cached_property
    def R_sqrt(self) -> np.ndarray:
        return herm_sqrt(self.R)


def temporal_steering(f_t: float, K: int) -> np.ndarray:
    return np.exp(2j * np.pi * f_t * np.arange(K))


def spatial_steering(f_s: float, N: int) -> np.ndarray:
    return np.exp(2j * np.pi * f_s * np.arange(N))


def steering(f_t: float, f_s: float, N: int, K: int) -> SpaceTimeSteering:
    """Space-time steering vector, temporal (x) spatial ordering.

    Entry ``k*N + n`` is ``exp(j2pi(f_t k + f_s n))``.
    """
    # Frequencies are periodic in 1; reduce to keep phase arguments small.
    ft = f_t - math.floor(f_t)
    fs = f_s - math.floor(f_s)
    vec = np.kron(temporal_steering(ft, K), spatial_steering(fs, N))
    return SpaceTimeSteering(float(f_t), float(f_s), vec)


def azimuth_grid(n_patches: int) -> np.ndarray:
    """Patch azimuths evenly spaced over the forward hemisphere ``[0, pi)``."""
    return np.arange(n_patches) * (np.pi / n_patches)


def clutter_frequencies(config: RadarConfig, azimuths=None) -> np.ndarray:
    """Normalized (temporal, spatial) frequency of each clutter patch.

    Returns an ``(n_patches, 2)`` array. ``azimuths`` overrides the default
    uniform grid.
    """
    theta = azimuth_grid(config.n_patches) if azimuths is None else np.asarray(azimuths, float)
    cone = np.cos(theta) * np.cos(config.elevation_rad)
    f_s = (config.spacing_m / config.wavelength_m) * cone
    f_t = (2.0 * config.velocity_mps / (config.wavelength_m * config.prf_hz)) * cone
    return np.column_stack([f_t, f_s])


def clutter_rank(N: int, K: int, slope: float) -> int:
    """Brennan clutter rank ``floor(N + (K - 1) * slope)``."""
    if slope < 0:
        raise ContractError("slope must be non-negative")
    return int(math.floor(N + (K - 1) * slope + _FLOOR_EPS))


def build_scene(config: RadarConfig) -> ClutterScene:
    """Exact clutter-plus-noise covariance for one range cell.

    Patches share the total clutter power ``noise_power * 10**(cnr_db/10)``
    equally.
    """
    N, K = config.n_elements, config.n_pulses
    freqs = clutter_frequencies(config)
    total = config.noise_power * 10.0 ** (config.cnr_db / 10.0)
    powers = np.full(config.n_patches, total / config.n_patches)

    t_idx = np.arange(K)[:, None]
    s_idx = np.arange(N)[:, None]
    at = np.exp(2j * np.pi * t_idx * freqs[:, 0])          # K x Nc
    as_ = np.exp(2j * np.pi * s_idx * freqs[:, 1])         # N x Nc
    A = (at[:, None, :] * as_[None, :, :]).reshape(N * K, -1)

    R = (A * powers) @ A.conj().T + config.noise_power * np.eye(N * K)
    R = 0.5 * (R + R.conj().T)
    slope = config.slope
    return ClutterScene(
        config=config,
        patch_freqs=freqs,
        patch_powers=powers,
        R=R,
        slope=slope,
        clutter_rank=clutter_rank(N, K, slope),
    )
