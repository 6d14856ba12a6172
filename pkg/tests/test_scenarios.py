import struct

import numpy as np
import pytest

from swtest.errors import ConfigurationError, DataFormatError
from swtest.geometry import data_stream
from swtest.scenarios import (
    ScenarioSpec,
    gen_ball,
    gen_covariance_shift,
    gen_gauss_mixture_cloud,
    gen_mean_shift,
    gen_mnist_mixture,
    gen_sphere,
    default_mean_shift,
    load_mnist,
    load_point_cloud_csv,
    make_sampler,
    save_point_cloud_csv,
)


def write_idx_images(path, images):
    """images: (count, rows, cols) uint8."""
    count, rows, cols = images.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, count, rows, cols))
        f.write(images.tobytes())


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(int(v) for v in labels))


@pytest.fixture
def tiny_mnist(tmp_path):
    rng = np.random.default_rng(0)
    labels = np.array([6] * 30 + [9] * 30, dtype=np.uint8)
    images = np.zeros((60, 28, 28), dtype=np.uint8)
    images[:30, 5:15, :] = 200  # digit-6 stand-in pattern
    images[30:, :, 5:15] = 130  # digit-9 stand-in pattern
    images += rng.integers(0, 30, size=images.shape, dtype=np.uint8)
    img_path = tmp_path / "images.idx"
    lab_path = tmp_path / "labels.idx"
    write_idx_images(img_path, images)
    write_idx_labels(lab_path, labels)
    return img_path, lab_path


def test_covariance_shift_shapes_and_variance():
    n, d, delta = 4000, 6, 2.7
    first, second = gen_covariance_shift(n, delta, d, data_stream(1, 0))
    assert first.coords.shape == (n, d) and second.coords.shape == (n, d)
    var0 = second.coords[:, 0].var(ddof=1)
    assert abs(var0 - delta**2) <= 4 * delta**2 * np.sqrt(2.0 / n)
    # untouched coordinates keep unit variance
    assert abs(second.coords[:, 3].var(ddof=1) - 1.0) <= 4 * np.sqrt(2.0 / n)
    assert abs(first.coords[:, 0].var(ddof=1) - 1.0) <= 4 * np.sqrt(2.0 / n)


def test_covariance_shift_validation():
    with pytest.raises(ConfigurationError):
        gen_covariance_shift(10, 2.7, 1, data_stream(1, 1))
    with pytest.raises(ConfigurationError):
        gen_covariance_shift(10, 0.0, 5, data_stream(1, 2))


def test_mean_shift_defaults():
    n, d = 3600, 60
    shift = default_mean_shift(d)
    assert shift[0] == shift[1] == 0.6 and np.all(shift[2:] == 0)
    first, second = gen_mean_shift(n, d, shift, data_stream(2, 0))
    assert abs(second.coords[:, 0].mean() - 0.6) <= 3.0 / np.sqrt(n)
    assert abs(first.coords[:, 0].mean()) <= 3.0 / np.sqrt(n)


def test_mean_shift_zero_is_null():
    first, second = gen_mean_shift(50, 4, np.zeros(4), data_stream(2, 1))
    assert first.coords.shape == second.coords.shape == (50, 4)


def test_sphere_norms():
    cloud = gen_sphere(500, 5, data_stream(3, 0))
    assert cloud.radius_bound == 1.0
    assert np.all(np.abs(np.linalg.norm(cloud.coords, axis=1) - 1.0) <= 1e-12)


def test_ball_radial_law():
    n, d, r = 20000, 5, 0.8
    cloud = gen_ball(n, d, data_stream(3, 1))
    norms = np.linalg.norm(cloud.coords, axis=1)
    assert np.all(norms <= 1.0 + 1e-12)
    frac = np.mean(norms <= r)
    want = r**d
    assert abs(frac - want) <= 3 * np.sqrt(want * (1 - want) / n)


def test_generators_deterministic_and_independent():
    a1, b1 = gen_covariance_shift(20, 2.7, 4, data_stream(9, 0))
    a2, b2 = gen_covariance_shift(20, 2.7, 4, data_stream(9, 0))
    a3, _ = gen_covariance_shift(20, 2.7, 4, data_stream(9, 1))
    assert np.array_equal(a1.coords, a2.coords) and np.array_equal(b1.coords, b2.coords)
    assert not np.array_equal(a1.coords, a3.coords)


def test_load_mnist_header_count(tmp_path):
    # 0x2710 = 10000 images of zeros
    img_path = tmp_path / "big.idx"
    lab_path = tmp_path / "biglab.idx"
    write_idx_images(img_path, np.zeros((10000, 28, 28), dtype=np.uint8))
    write_idx_labels(lab_path, np.zeros(10000, dtype=np.uint8))
    cloud, labels = load_mnist(img_path, lab_path)
    assert cloud.coords.shape == (10000, 784)
    assert labels.shape == (10000,)
    # all-zero image maps to the constant squash of 0
    s0 = 1.0 / (1.0 + np.exp(4.0))
    assert np.allclose(cloud.coords, s0)
    assert 0.0 < s0 < 1.0


def test_load_mnist_values_in_unit_interval(tiny_mnist):
    cloud, labels = load_mnist(*tiny_mnist)
    assert cloud.coords.min() > 0.0 and cloud.coords.max() < 1.0
    assert cloud.radius_bound == 28.0
    assert set(np.unique(labels)) == {6, 9}


def test_load_mnist_bad_magic(tmp_path):
    path = tmp_path / "bad.idx"
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000777, 1, 28, 28))
        f.write(bytes(784))
    lab = tmp_path / "lab.idx"
    write_idx_labels(lab, np.zeros(1, dtype=np.uint8))
    with pytest.raises(DataFormatError, match="magic"):
        load_mnist(path, lab)


def test_load_mnist_truncated(tmp_path):
    path = tmp_path / "short.idx"
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, 2, 28, 28))
        f.write(bytes(784))  # one image missing
    lab = tmp_path / "lab.idx"
    write_idx_labels(lab, np.zeros(2, dtype=np.uint8))
    with pytest.raises(DataFormatError, match="truncated"):
        load_mnist(path, lab)


def test_load_mnist_count_mismatch(tmp_path):
    img = tmp_path / "img.idx"
    lab = tmp_path / "lab.idx"
    write_idx_images(img, np.zeros((3, 28, 28), dtype=np.uint8))
    write_idx_labels(lab, np.zeros(2, dtype=np.uint8))
    with pytest.raises(DataFormatError, match="count"):
        load_mnist(img, lab)


def test_mnist_mixture_null_case(tiny_mnist):
    data = load_mnist(*tiny_mnist)
    first, second = gen_mnist_mixture(40, 1.0, (6, 9), data, data_stream(4, 0))
    pool_a = {row.tobytes() for row in data[0].coords[data[1] == 6]}
    assert all(row.tobytes() in pool_a for row in second.coords)
    assert first.coords.shape == (40, 784)


def test_mnist_mixture_fraction(tiny_mnist):
    data = load_mnist(*tiny_mnist)
    pool_b = {row.tobytes() for row in data[0].coords[data[1] == 9]}
    _, second = gen_mnist_mixture(10**4, 0.85, (6, 9), data, data_stream(4, 1))
    frac_b = np.mean([row.tobytes() in pool_b for row in second.coords])
    assert abs(frac_b - 0.15) <= 0.011


def test_mnist_mixture_absent_digit(tiny_mnist):
    data = load_mnist(*tiny_mnist)
    with pytest.raises(ConfigurationError, match="absent"):
        gen_mnist_mixture(10, 0.85, (6, 3), data, data_stream(4, 2))


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    from swtest.geometry import PointCloud

    cloud = PointCloud(rng.normal(size=(7, 3)))
    path = tmp_path / "cloud.csv"
    save_point_cloud_csv(cloud, path)
    back = load_point_cloud_csv(path)
    assert np.array_equal(back.coords, cloud.coords)


def test_csv_header_autodetect(tmp_path):
    path = tmp_path / "with_header.csv"
    path.write_text("x,y\n1.5,2\n3,4\n")
    cloud = load_point_cloud_csv(path)
    assert cloud.coords.tolist() == [[1.5, 2.0], [3.0, 4.0]]


def test_csv_ragged_row(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text("1,2\n3\n")
    with pytest.raises(DataFormatError, match="line 2"):
        load_point_cloud_csv(path)


def test_csv_non_numeric_body(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2\n3,oops\n")
    with pytest.raises(DataFormatError, match="line 2"):
        load_point_cloud_csv(path)


def test_scenario_spec_validation():
    with pytest.raises(ConfigurationError):
        ScenarioSpec("unknown_kind")
    with pytest.raises(ConfigurationError):
        ScenarioSpec("covariance_shift", {"delta": -1.0})
    with pytest.raises(ConfigurationError):
        ScenarioSpec("mnist_mixture", {"w": 1.5})


def test_ball_sphere_sampler():
    sampler = make_sampler(ScenarioSpec("ball_sphere", {"d": 5}))
    first, second = sampler(64, data_stream(6, 0))
    assert np.all(np.abs(np.linalg.norm(first.coords, axis=1) - 1.0) <= 1e-12)
    assert np.all(np.linalg.norm(second.coords, axis=1) <= 1.0 + 1e-12)


def test_custom_csv_sampler(tmp_path):
    from swtest.geometry import PointCloud

    rng = np.random.default_rng(7)
    a_path = tmp_path / "a.csv"
    b_path = tmp_path / "b.csv"
    save_point_cloud_csv(PointCloud(rng.normal(size=(25, 2))), a_path)
    save_point_cloud_csv(PointCloud(rng.normal(size=(30, 2)) + 2.0), b_path)
    sampler = make_sampler(ScenarioSpec("custom_csv", {"file_a": str(a_path), "file_b": str(b_path)}))
    first, second = sampler(12, data_stream(6, 1))
    assert first.coords.shape == (12, 2) and second.coords.shape == (12, 2)


def test_gauss_mixture_cloud_shifts_some_points():
    cloud = gen_gauss_mixture_cloud(4000, 2, data_stream(8, 0))
    means = cloud.coords.mean(axis=0)
    # half the mass sits near (2.5, 2.5), so the overall mean is near 1.25
    assert np.all(np.abs(means - 1.25) < 0.2)
