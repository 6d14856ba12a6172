"""Synthetic scenario generators, MNIST ingestion, and CSV point clouds.

All generators are pure given their stream, so repetitions indexed by
distinct stream addresses are independent and reproducible.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DataFormatError
from .geometry import PointCloud, SeededStream

SCENARIO_KINDS = (
    "covariance_shift",
    "mean_shift",
    "sphere",
    "ball",
    "ball_sphere",
    "mnist_mixture",
    "custom_csv",
)

# MNIST radius bound: 784 coordinates each squashed into [0, 1].
MNIST_RADIUS_BOUND = 28.0

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


def gen_covariance_shift(
    n: int, delta: float, d: int, stream: SeededStream
) -> tuple[PointCloud, PointCloud]:
    """N(0, I_d) versus N(0, diag(delta^2, delta^2, 1, ..., 1)); delta=1 is the null."""
    if d < 2:
        raise ConfigurationError("covariance shift needs d >= 2")
    if delta <= 0:
        raise ConfigurationError("delta must be positive")
    rng = stream.generator()
    first = rng.standard_normal((n, d))
    second = rng.standard_normal((n, d))
    second[:, :2] *= delta
    return PointCloud(first), PointCloud(second)


def default_mean_shift(d: int) -> np.ndarray:
    shift = np.zeros(d)
    shift[: min(2, d)] = 0.6
    return shift


def gen_mean_shift(n: int, d: int, shift, stream: SeededStream) -> tuple[PointCloud, PointCloud]:
    """N(0, I_d) versus N(shift, I_d)."""
    shift = np.asarray(shift, dtype=np.float64)
    if shift.shape != (d,):
        raise ConfigurationError(f"shift must be a {d}-vector, got shape {shift.shape}")
    rng = stream.generator()
    first = rng.standard_normal((n, d))
    second = rng.standard_normal((n, d)) + shift
    return PointCloud(first), PointCloud(second)


def _sphere_points(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    points = rng.standard_normal((n, d))
    norms = np.linalg.norm(points, axis=1)
    while np.any(norms < 1e-150):
        bad = norms < 1e-150
        points[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(points, axis=1)
    return points / norms[:, None]


def gen_sphere(n: int, d: int, stream: SeededStream) -> PointCloud:
    """Uniform on the unit sphere (normalized Gaussians)."""
    return PointCloud(_sphere_points(n, d, stream.generator()), radius_bound=1.0)


def gen_ball(n: int, d: int, stream: SeededStream) -> PointCloud:
    """Uniform in the unit ball: sphere point scaled by U^(1/d)."""
    rng = stream.generator()
    points = _sphere_points(n, d, rng)
    radii = rng.uniform(size=n) ** (1.0 / d)
    return PointCloud(points * radii[:, None], radius_bound=1.0)


def _squash(pixels: np.ndarray) -> np.ndarray:
    # Logistic centered at mid-intensity; keeps every value inside (0, 1).
    return 1.0 / (1.0 + np.exp(-8.0 * (pixels / 255.0 - 0.5)))


def _read_be32(data: bytes, offset: int, path: str, what: str) -> int:
    if offset + 4 > len(data):
        raise DataFormatError(f"{path}: truncated {what} at offset {offset}")
    return struct.unpack_from(">I", data, offset)[0]


def load_mnist(images_path, labels_path) -> tuple[PointCloud, np.ndarray]:
    """Parse IDX image/label files into squashed 784-dim rows plus labels.

    Image files are big-endian: magic 0x00000803, count, rows, cols, then
    row-major unsigned bytes.  Label files: magic 0x00000801, count, bytes.
    """
    images_path = str(images_path)
    labels_path = str(labels_path)
    with open(images_path, "rb") as f:
        raw = f.read()
    magic = _read_be32(raw, 0, images_path, "magic number")
    if magic != IDX_IMAGES_MAGIC:
        raise DataFormatError(
            f"{images_path}: bad image magic number 0x{magic:08x} at offset 0, "
            f"expected 0x{IDX_IMAGES_MAGIC:08x}"
        )
    count = _read_be32(raw, 4, images_path, "image count")
    rows = _read_be32(raw, 8, images_path, "row count")
    cols = _read_be32(raw, 12, images_path, "column count")
    expected = 16 + count * rows * cols
    if len(raw) < expected:
        raise DataFormatError(
            f"{images_path}: truncated pixel data at offset {len(raw)}, expected {expected} bytes"
        )
    images = np.frombuffer(raw, dtype=np.uint8, count=count * rows * cols, offset=16)
    images = images.reshape(count, rows * cols).astype(np.float64)

    with open(labels_path, "rb") as f:
        raw_labels = f.read()
    magic = _read_be32(raw_labels, 0, labels_path, "magic number")
    if magic != IDX_LABELS_MAGIC:
        raise DataFormatError(
            f"{labels_path}: bad label magic number 0x{magic:08x} at offset 0, "
            f"expected 0x{IDX_LABELS_MAGIC:08x}"
        )
    label_count = _read_be32(raw_labels, 4, labels_path, "label count")
    if label_count != count:
        raise DataFormatError(
            f"{labels_path}: label count {label_count} does not match image count {count}"
        )
    if len(raw_labels) < 8 + label_count:
        raise DataFormatError(
            f"{labels_path}: truncated label data at offset {len(raw_labels)}, "
            f"expected {8 + label_count} bytes"
        )
    labels = np.frombuffer(raw_labels, dtype=np.uint8, count=label_count, offset=8).astype(np.int64)

    bound = float(np.sqrt(rows * cols))
    return PointCloud(_squash(images), radius_bound=bound), labels


def gen_mnist_mixture(
    n: int,
    w: float,
    digits: tuple[int, int],
    data: tuple[PointCloud, np.ndarray],
    stream: SeededStream,
) -> tuple[PointCloud, PointCloud]:
    """Pure digit-a sample versus the mixture w*digit_a + (1-w)*digit_b.

    Draws with replacement from the empirical digit pools.
    """
    if not 0.0 <= w <= 1.0:
        raise ConfigurationError(f"mixture weight must lie in [0, 1], got {w}")
    cloud, labels = data
    digit_a, digit_b = digits
    pool_a = cloud.coords[labels == digit_a]
    pool_b = cloud.coords[labels == digit_b]
    if pool_a.shape[0] == 0:
        raise ConfigurationError(f"digit class {digit_a} absent from data")
    if pool_b.shape[0] == 0:
        raise ConfigurationError(f"digit class {digit_b} absent from data")
    rng = stream.generator()
    first = pool_a[rng.integers(pool_a.shape[0], size=n)]
    take_a = rng.uniform(size=n) < w
    second = np.empty((n, cloud.d))
    idx_a = rng.integers(pool_a.shape[0], size=n)
    idx_b = rng.integers(pool_b.shape[0], size=n)
    second[take_a] = pool_a[idx_a[take_a]]
    second[~take_a] = pool_b[idx_b[~take_a]]
    bound = cloud.radius_bound
    return PointCloud(first, radius_bound=bound), PointCloud(second, radius_bound=bound)


def load_point_cloud_csv(path) -> PointCloud:
    """One point per row, comma-separated reals; header auto-detected."""
    path = str(path)
    with open(path, "r", encoding="utf-8") as f:
        lines = [line.strip() for line in f if line.strip()]
    if not lines:
        raise DataFormatError(f"{path}: no data rows")
    first_token = lines[0].split(",")[0].strip()
    try:
        float(first_token)
        start = 0
    except ValueError:
        start = 1
    rows = []
    width = None
    for lineno, line in enumerate(lines[start:], start=start + 1):
        tokens = line.split(",")
        try:
            row = [float(tok) for tok in tokens]
        except ValueError as exc:
            raise DataFormatError(f"{path}: non-numeric value on line {lineno}") from exc
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DataFormatError(
                f"{path}: line {lineno} has {len(row)} columns, expected {width}"
            )
        rows.append(row)
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return PointCloud(np.array(rows, dtype=np.float64))


def save_point_cloud_csv(cloud: PointCloud, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for row in cloud.coords:
            f.write(",".join(format(v, ".17g") for v in row) + "\n")


# Null data generators for the statistic-histogram study (one law, both
# samples drawn from it).
def gen_gaussian_cloud(n: int, d: int, stream: SeededStream) -> PointCloud:
    return PointCloud(stream.generator().standard_normal((n, d)))


def gen_uniform_cube_cloud(n: int, d: int, stream: SeededStream) -> PointCloud:
    return PointCloud(stream.generator().uniform(-1.0, 1.0, size=(n, d)), radius_bound=float(np.sqrt(d)))


def gen_gauss_mixture_cloud(
    n: int, d: int, stream: SeededStream, offset: float = 2.5, weight: float = 0.5
) -> PointCloud:
    rng = stream.generator()
    points = rng.standard_normal((n, d))
    shifted = rng.uniform(size=n) < weight
    points[shifted] += offset
    return PointCloud(points)


NULL_DISTRIBUTIONS = ("gaussian", "uniform", "gauss_mixture")


def null_cloud_sampler(name: str, d: int):
    """Single-cloud sampler for null-distribution histograms."""
    if name == "gaussian":
        return lambda n, stream: gen_gaussian_cloud(n, d, stream)
    if name == "uniform":
        return lambda n, stream: gen_uniform_cube_cloud(n, d, stream)
    if name == "gauss_mixture":
        return lambda n, stream: gen_gauss_mixture_cloud(n, d, stream)
    raise ConfigurationError(f"unknown null distribution {name!r}; choose from {NULL_DISTRIBUTIONS}")


@dataclass(frozen=True)
class ScenarioSpec:
    """A named two-sample scenario plus its kind-specific parameters."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ConfigurationError(f"unknown scenario {self.kind!r}; choose from {SCENARIO_KINDS}")
        if self.kind == "covariance_shift" and self.params.get("delta", 2.7) <= 0:
            raise ConfigurationError("delta must be positive")
        w = self.params.get("w", 0.85)
        if self.kind == "mnist_mixture" and not 0.0 <= w <= 1.0:
            raise ConfigurationError("mixture weight must lie in [0, 1]")


def make_sampler(spec: ScenarioSpec):
    """Resolve a ScenarioSpec into a callable (n, stream) -> (PointCloud, PointCloud)."""
    kind = spec.kind
    params = spec.params
    if kind == "covariance_shift":
        delta = float(params.get("delta", 2.7))
        d = int(params.get("d", 60))
        return lambda n, stream: gen_covariance_shift(n, delta, d, stream)
    if kind == "mean_shift":
        d = int(params.get("d", 60))
        shift = np.asarray(params.get("shift", default_mean_shift(d)), dtype=np.float64)
        return lambda n, stream: gen_mean_shift(n, d, shift, stream)
    if kind == "sphere":
        d = int(params.get("d", 5))
        return lambda n, stream: (gen_sphere(n, d, stream.child(0)), gen_sphere(n, d, stream.child(1)))
    if kind == "ball":
        d = int(params.get("d", 5))
        return lambda n, stream: (gen_ball(n, d, stream.child(0)), gen_ball(n, d, stream.child(1)))
    if kind == "ball_sphere":
        d = int(params.get("d", 5))
        return lambda n, stream: (gen_sphere(n, d, stream.child(0)), gen_ball(n, d, stream.child(1)))
    if kind == "mnist_mixture":
        data = params.get("data")
        if data is None:
            data = load_mnist(params["images_path"], params["labels_path"])
        digits = tuple(params.get("digits", (6, 9)))
        w = float(params.get("w", 0.85))
        return lambda n, stream: gen_mnist_mixture(n, w, digits, data, stream)
    if kind == "custom_csv":
        first = load_point_cloud_csv(params["file_a"])
        second = load_point_cloud_csv(params["file_b"])
        if first.d != second.d:
            raise ConfigurationError(
                f"dimension mismatch between CSV files: {first.d} vs {second.d}"
            )

        def sample(n, stream):
            rng = stream.generator()
            a = first.coords[rng.integers(first.n, size=n)]
            b = second.coords[rng.integers(second.n, size=n)]
            return PointCloud(a), PointCloud(b)

        return sample
    raise ConfigurationError(f"unknown scenario {kind!r}")
