"""IID Gaussian training snapshots and the sample CNCM."""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .numerics import ContractError
from .scene import ClutterScene

SNAPSHOT_MAGIC = b"STAPSNP1"
# magic, NK (uint32), L (uint32), seed (uint64); all little-endian
_HEADER = struct.Struct("<8sIIQ")


@dataclass(frozen=True)
class SnapshotSet:
    """``L`` training snapshots stored as the columns of an ``NK x L`` array."""

    snapshots: np.ndarray = field(repr=False)
    seed: int
    scene_id: str

    @property
    def n_samples(self) -> int:
        return self.snapshots.shape[1]

    @property
    def dim(self) -> int:
        return self.snapshots.shape[0]


@dataclass(frozen=True)
class SampleCncm:
    """``(1/L) sum x x^H`` together with the sample count ``L``."""

    matrix: np.ndarray = field(repr=False)
    n_samples: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def ratio(self) -> float:
        return self.dim / self.n_samples


def scene_id(scene: ClutterScene) -> str:
    return hashlib.sha1(repr(scene.config).encode()).hexdigest()[:12]


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def circular_gaussian(rng: np.random.Generator, shape: tuple) -> np.ndarray:
    """Standard circular complex Gaussian, ``E|z|^2 = 1``."""
    re, im = rng.standard_normal((2, *shape))
    return (re + 1j * im) * np.sqrt(0.5)


def draw_snapshots(scene: ClutterScene, L: int, seed: int) -> SnapshotSet:
    """Draw ``L`` target-free snapshots ``R^{1/2} z``."""
    if L < 1:
        raise ContractError("L must be >= 1")
    rng = make_rng(seed)
    z = circular_gaussian(rng, (scene.dim, L))
    return SnapshotSet(scene.R_sqrt @ z, int(seed), scene_id(scene))


def covariance(X: np.ndarray) -> np.ndarray:
    L = X.shape[1]
    C = (X @ X.conj().T) / L
    return 0.5 * (C + C.conj().T)


def sample_cncm(snapshots: SnapshotSet) -> SampleCncm:
    return SampleCncm(covariance(snapshots.snapshots), snapshots.n_samples)


def write_snapshots(snapshots: SnapshotSet, path) -> None:
    """Dump snapshots as little-endian complex64, one snapshot after another."""
    X = np.ascontiguousarray(snapshots.snapshots.T, dtype="<c8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(SNAPSHOT_MAGIC, snapshots.dim,
                              snapshots.n_samples, snapshots.seed))
        fh.write(X.tobytes())


def read_snapshots(path) -> SnapshotSet:
    data = Path(path).read_bytes()
    magic, nk, L, seed = _HEADER.unpack_from(data)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: not a snapshot dump")
    body = np.frombuffer(data, dtype="<c8", offset=_HEADER.size)
    if body.size != nk * L:
        raise ValueError(f"{path}: expected {nk * L} samples, found {body.size}")
    X = body.reshape(L, nk).T.astype(np.complex128)
    return SnapshotSet(X, int(seed), scene_id="")
