"""Seeded randomness, point clouds, and projections onto random directions.

Every random draw in the package is addressed by a (master_seed, stream_id)
pair, where stream_id is a tuple starting with a purpose tag.  Streams with
the same address reproduce bit-identical output regardless of execution
order, which is what makes parallel repetition sweeps reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

# Purpose tags (first element of a stream_id).
STREAM_DIRECTIONS = 0
STREAM_PERMUTATIONS = 1
STREAM_DATA = 2
STREAM_REPETITION = 3

_UNIT_NORM_TOL = 1e-12


@dataclass(frozen=True)
class SeededStream:
    """Address of an independent random stream.

    Philox is counter-based, so any (master_seed, stream_id) pair can be
    opened at any time without drawing through predecessor states.
    """

    master_seed: int
    stream_id: tuple[int, ...] = ()

    def child(self, *indices: int) -> "SeededStream":
        return SeededStream(self.master_seed, self.stream_id + tuple(indices))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=self.stream_id)
        return np.random.Generator(np.random.Philox(seq))


def directions_stream(master_seed: int, *indices: int) -> SeededStream:
    return SeededStream(master_seed, (STREAM_DIRECTIONS, *indices))


def permutations_stream(master_seed: int, *indices: int) -> SeededStream:
    return SeededStream(master_seed, (STREAM_PERMUTATIONS, *indices))


def data_stream(master_seed: int, *indices: int) -> SeededStream:
    return SeededStream(master_seed, (STREAM_DATA, *indices))


@dataclass(frozen=True)
class PointCloud:
    """One sample of one distribution: an (n, d) table of coordinates.

    radius_bound, when set, asserts that every point lies in the centered
    Euclidean ball of that radius; downstream bound checks rely on it.
    """

    coords: np.ndarray
    radius_bound: float | None = None

    def __post_init__(self):
        coords = np.ascontiguousarray(self.coords, dtype=np.float64)
        if coords.ndim != 2:
            raise ConfigurationError(f"point cloud must be 2-d, got shape {coords.shape}")
        if coords.shape[0] < 1 or coords.shape[1] < 1:
            raise ConfigurationError(f"point cloud must be non-empty, got shape {coords.shape}")
        object.__setattr__(self, "coords", coords)
        if self.radius_bound is not None:
            bound = float(self.radius_bound)
            if bound < 0:
                raise ConfigurationError("radius_bound must be nonnegative")
            worst = float(np.max(np.linalg.norm(coords, axis=1)))
            if worst > bound + 1e-12:
                raise ConfigurationError(
                    f"point norm {worst} exceeds radius_bound {bound}"
                )
            object.__setattr__(self, "radius_bound", bound)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]


@dataclass(frozen=True)
class DirectionSet:
    """L unit vectors on the (d-1)-sphere, stored as rows of an (L, d) array."""

    vectors: np.ndarray

    def __post_init__(self):
        vectors = np.ascontiguousarray(self.vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] < 1 or vectors.shape[1] < 1:
            raise ConfigurationError(f"direction set must be (L, d) with L,d >= 1, got {vectors.shape}")
        norms = np.linalg.norm(vectors, axis=1)
        if np.any(np.abs(norms - 1.0) > _UNIT_NORM_TOL):
            raise ConfigurationError("direction vectors must have unit norm within 1e-12")
        object.__setattr__(self, "vectors", vectors)

    @property
    def L(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]


def sample_directions(d: int, L: int, stream: SeededStream) -> DirectionSet:
    """Draw L i.i.d. uniform directions on S^{d-1} by normalizing Gaussians.

    Deterministic given the stream.  Zero-norm draws (probability 0) are
    redrawn and never surface to the caller.
    """
    if d < 1:
        raise ConfigurationError(f"dimension must be >= 1, got {d}")
    if L < 1:
        raise ConfigurationError(f"direction count must be >= 1, got {L}")
    rng = stream.generator()
    vectors = rng.standard_normal((L, d))
    norms = np.linalg.norm(vectors, axis=1)
    while np.any(norms < 1e-150):
        bad = norms < 1e-150
        vectors[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(vectors, axis=1)
    vectors /= norms[:, None]
    return DirectionSet(vectors)


def project_pool(pool: PointCloud, dirs: DirectionSet) -> np.ndarray:
    """Project every point onto every direction: entry (l, i) = <theta_l, x_i>."""
    if pool.d != dirs.d:
        raise ConfigurationError(
            f"dimension mismatch: points are {pool.d}-d, directions are {dirs.d}-d"
        )
    return dirs.vectors @ pool.coords.T
