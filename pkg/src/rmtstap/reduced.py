"""Reduced-dimension STAP with the extended factored approach (EFA)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import ContractError, eigh
from .sampling import SampleCncm, SnapshotSet, covariance
from .scene import ClutterScene, RadarConfig, SpaceTimeSteering, temporal_steering
from .stap import Method, StapWeights, Target, lcmv_weights, matrix_inverse

# Eigenvalues of R_rd above noise_power * (1 + SPIKE_THRESHOLD) count as clutter.
SPIKE_THRESHOLD = 0.05


@dataclass(frozen=True)
class ReducedTransform:
    """``NK x M`` transform ``F (x) I_N`` built from adjacent Doppler filters."""

    T: np.ndarray = field(repr=False)
    doppler_bins: tuple[int, ...]
    target_bin: int

    @property
    def M(self) -> int:
        return self.T.shape[1]

    def apply(self, x: np.ndarray) -> np.ndarray:
        """``T^H x`` for a vector or for snapshots stored as columns."""
        return self.T.conj().T @ x


@dataclass(frozen=True)
class ReducedScene:
    R_rd: np.ndarray = field(repr=False)
    a_rd: np.ndarray = field(repr=False)
    local_rank: int


def efa_transform(config: RadarConfig, target_f_t: float, n_channels: int = 3) -> ReducedTransform:
    """EFA transform centred on the DFT bin nearest ``target_f_t``.

    Column block ``c`` is the unit-norm Doppler filter at bin
    ``target_bin + c - (n_channels - 1) // 2`` of a K-point DFT, tensored with
    the N-element identity, so ``T^H T = I``.
    """
    K, N = config.n_pulses, config.n_elements
    if n_channels < 1 or n_channels % 2 == 0:
        raise ContractError("n_channels must be a positive odd number")
    if n_channels >= K:
        raise ContractError(f"n_channels ({n_channels}) must be smaller than K ({K})")
    target_bin = int(np.floor(target_f_t * K + 0.5))
    half = (n_channels - 1) // 2
    bins = tuple(target_bin + c for c in range(-half, half + 1))
    F = np.column_stack([temporal_steering(b / K, K) for b in bins]) / np.sqrt(K)
    return ReducedTransform(np.kron(F, np.eye(N)), bins, target_bin)


def local_clutter_rank(R_rd: np.ndarray, noise_power: float,
                       threshold: float = SPIKE_THRESHOLD) -> int:
    values = eigh(R_rd).values
    return int(np.sum(values > noise_power * (1.0 + threshold)))


def reduce(scene: ClutterScene, transform: ReducedTransform, target: Target,
           local_rank: int | None = None) -> ReducedScene:
    """Project the exact CNCM and the target steering vector.

    ``local_rank`` overrides the eigenvalue-threshold estimate of the local
    clutter DOF.
    """
    T = transform.T
    R_rd = T.conj().T @ scene.R @ T
    R_rd = 0.5 * (R_rd + R_rd.conj().T)
    a = target.vector if isinstance(target, SpaceTimeSteering) else np.asarray(target)
    if local_rank is None:
        local_rank = local_clutter_rank(R_rd, scene.noise_power)
    return ReducedScene(R_rd, T.conj().T @ a, int(local_rank))


def reduce_snapshots(snapshots: SnapshotSet, transform: ReducedTransform) -> SnapshotSet:
    return SnapshotSet(transform.apply(snapshots.snapshots), snapshots.seed, snapshots.scene_id)


def reduce_samples(snapshots: SnapshotSet, transform: ReducedTransform) -> SampleCncm:
    """Sample CNCM of the reduced snapshots, i.e. ``T^H R_L T``."""
    return SampleCncm(covariance(transform.apply(snapshots.snapshots)), snapshots.n_samples)


def rd_stap(sample_rd: SampleCncm, a_rd: np.ndarray) -> StapWeights:
    return lcmv_weights(matrix_inverse(sample_rd.matrix), a_rd, Method.RD)


def reduce_cncm(sample: SampleCncm, transform: ReducedTransform) -> SampleCncm:
    """``T^H R_L T`` from an already formed full-dimension sample CNCM."""
    T = transform.T
    m = T.conj().T @ sample.matrix @ T
    return SampleCncm(0.5 * (m + m.conj().T), sample.n_samples)
