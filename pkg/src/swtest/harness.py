"""Monte Carlo power/level estimation, null-statistic export, and timing.

Each repetition is an isolated task whose data, direction, and permutation
streams are derived from (master_seed, grid index, repetition index), so
results are invariant to execution order and thread count.  Parallelism is
over repetitions, matching how the experiments are usually run.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError
from .geometry import PointCloud, data_stream, directions_stream, permutations_stream, sample_directions
from .mmd import mmd_perm_test
from .permutation import TestConfig, TestReport, resolve_projections
from .scenarios import ScenarioSpec, make_sampler, null_cloud_sampler
from .sliced import sw_permutation_test, sw_pp_direct

# Stable ids keep permutation streams independent of which methods run together.
METHOD_IDS = {"sw": 0, "mmd-linear": 1, "mmd-gaussian": 2, "mmd-laplace": 3}
SWEEP_KINDS = ("n", "L", "delta")

CI_Z = 1.96


def run_method(
    name: str,
    y: PointCloud,
    z: PointCloud,
    config: TestConfig,
    dir_stream,
    perm_stream,
) -> TestReport:
    if name == "sw":
        return sw_permutation_test(
            y, z, config, directions_stream=dir_stream, permutation_stream=perm_stream
        )
    if name.startswith("mmd-"):
        return mmd_perm_test(y, z, name[len("mmd-") :], config, permutation_stream=perm_stream)
    raise ConfigurationError(f"unknown method {name!r}; choose from {sorted(METHOD_IDS)}")


def ci_half_width(p_hat: np.ndarray, reps: int) -> np.ndarray:
    """Normal-approximation 95% half-width: 1.96 * sqrt(p(1-p)/R)."""
    return CI_Z * np.sqrt(p_hat * (1.0 - p_hat) / reps)


@dataclass
class PowerCurve:
    """Rejection-rate estimates over a grid, one series per method."""

    sweep: str
    grid: list
    reps: int
    methods: list
    rejections: dict

    def p_hat(self, method: str) -> np.ndarray:
        return np.asarray(self.rejections[method], dtype=np.float64) / self.reps

    def ci_half(self, method: str) -> np.ndarray:
        return ci_half_width(self.p_hat(method), self.reps)

    def rows(self) -> list[dict]:
        out = []
        for gi, value in enumerate(self.grid):
            for method in self.methods:
                rej = int(self.rejections[method][gi])
                p = rej / self.reps
                out.append(
                    {
                        "sweep_value": value,
                        "method": method,
                        "rejections": rej,
                        "reps": self.reps,
                        "p_hat": p,
                        "ci_half": float(ci_half_width(np.array(p), self.reps)),
                    }
                )
        return out


def estimate_power(
    scenario: ScenarioSpec,
    methods: list[str],
    sweep: str,
    grid: list,
    reps: int,
    config: TestConfig,
    *,
    n: int | None = None,
    threads: int = 1,
) -> PowerCurve:
    """Rejection rate of each method at each grid value over reps repetitions.

    sweep selects what the grid varies: sample size "n", projection count
    "L", or the covariance-shift magnitude "delta".  Every repetition draws
    fresh data, directions, and permutations.
    """
    if sweep not in SWEEP_KINDS:
        raise ConfigurationError(f"unknown sweep {sweep!r}; choose from {SWEEP_KINDS}")
    if reps < 1:
        raise ConfigurationError("need at least one repetition")
    if sweep != "n" and n is None:
        raise ConfigurationError(f"sweep over {sweep!r} needs a fixed sample size n")
    for method in methods:
        if method not in METHOD_IDS:
            raise ConfigurationError(f"unknown method {method!r}; choose from {sorted(METHOD_IDS)}")
    seed = config.master_seed

    def point_setup(gi: int):
        value = grid[gi]
        if sweep == "n":
            return int(value), config, make_sampler(scenario)
        if sweep == "L":
            resolved = replace(config, n_projections=resolve_projections(value, n))
            return n, resolved, make_sampler(scenario)
        if scenario.kind != "covariance_shift":
            raise ConfigurationError("delta sweep applies to the covariance_shift scenario only")
        spec = ScenarioSpec("covariance_shift", {**scenario.params, "delta": float(value)})
        return n, config, make_sampler(spec)

    setups = [point_setup(gi) for gi in range(len(grid))]
    flags = {method: np.zeros((len(grid), reps), dtype=bool) for method in methods}

    def run_repetition(task):
        gi, ri = task
        n_g, cfg_g, sampler = setups[gi]
        try:
            y, z = sampler(n_g, data_stream(seed, gi, ri))
            for method in methods:
                report = run_method(
                    method,
                    y,
                    z,
                    cfg_g,
                    directions_stream(seed, gi, ri),
                    permutations_stream(seed, gi, ri, METHOD_IDS[method]),
                )
                flags[method][gi, ri] = report.reject
        except Exception as exc:
            raise RuntimeError(
                f"repetition {ri} failed at {sweep}={grid[gi]}: {exc}"
            ) from exc

    tasks = [(gi, ri) for gi in range(len(grid)) for ri in range(reps)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_repetition, tasks))
    else:
        for task in tasks:
            run_repetition(task)

    rejections = {m: flags[m].sum(axis=1).astype(int).tolist() for m in methods}
    return PowerCurve(sweep=sweep, grid=list(grid), reps=reps, methods=list(methods), rejections=rejections)


def type1_experiment(
    n: int = 50,
    d: int = 60,
    reps: int = 2000,
    L_factors: tuple = ("0.5n", "n", "2n"),
    config: TestConfig | None = None,
    *,
    threads: int = 1,
) -> PowerCurve:
    """Empirical level of the SW test on paired null Gaussians, per projection count."""
    if config is None:
        config = TestConfig()
    scenario = ScenarioSpec("covariance_shift", {"delta": 1.0, "d": d})
    grid = [resolve_projections(f, n) for f in L_factors]
    return estimate_power(scenario, ["sw"], "L", grid, reps, config, n=n, threads=threads)


def draw_null_statistics(
    dist,
    n: int,
    L: int,
    reps: int,
    config: TestConfig,
    *,
    d: int = 2,
    threads: int = 1,
) -> np.ndarray:
    """reps statistic values under the null: fresh paired samples per draw.

    dist is a named null distribution or a callable (n, stream) -> PointCloud
    used for both samples of each draw.
    """
    sampler = dist if callable(dist) else null_cloud_sampler(dist, d)
    seed = config.master_seed
    stats = np.empty(reps, dtype=np.float64)

    def one(ri: int):
        y = sampler(n, data_stream(seed, 0, ri, 0))
        z = sampler(n, data_stream(seed, 0, ri, 1))
        dirs = sample_directions(d, L, directions_stream(seed, 0, ri))
        stats[ri] = sw_pp_direct(y, z, dirs, config.p)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(one, range(reps)))
    else:
        for ri in range(reps):
            one(ri)
    return stats


def export_null_histogram(
    dist,
    n: int,
    L: int,
    reps: int,
    bins: int,
    config: TestConfig,
    *,
    d: int = 2,
    threads: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Bin reps null statistics over [0, max]; returns (counts, edges)."""
    stats = draw_null_statistics(dist, n, L, reps, config, d=d, threads=threads)
    top = float(stats.max())
    if top <= 0.0:
        top = 1.0  # degenerate inputs: everything lands in the zero bin
    counts, edges = np.histogram(stats, bins=bins, range=(0.0, top))
    return counts, edges


@dataclass
class TimingRecord:
    method: str
    n: int
    L: int
    B: int
    d: int
    seconds: float  # median of >= 5 runs

    def __post_init__(self):
        if self.seconds <= 0:
            raise ConfigurationError("timing must be positive")


def timing_sweep(
    method: str,
    config: TestConfig,
    *,
    base_n: int = 200,
    base_L: int = 200,
    base_B: int = 200,
    d: int = 30,
    n_grid: tuple = (),
    L_grid: tuple = (),
    B_grid: tuple = (),
    runs: int = 5,
) -> list[TimingRecord]:
    """Median wall time per (n, L, B) grid point, one axis varied at a time.

    Inputs are fixed per grid point (regenerated from the same stream), so
    run-to-run spread reflects scheduling noise only; the median resists it.
    """
    if runs < 5:
        raise ConfigurationError("need at least 5 timed runs per grid point")
    seed = config.master_seed
    records = []
    axes = [("n", tuple(n_grid)), ("L", tuple(L_grid)), ("B", tuple(B_grid))]
    if not any(grid for _, grid in axes):
        axes = [("n", (base_n,))]
    for axis_id, (axis, grid) in enumerate(axes):
        for vi, value in enumerate(grid):
            n = int(value) if axis == "n" else base_n
            L = int(value) if axis == "L" else base_L
            B = int(value) if axis == "B" else base_B
            rng = data_stream(seed, axis_id, vi).generator()
            y = PointCloud(rng.standard_normal((n, d)))
            z = PointCloud(rng.standard_normal((n, d)))
            cfg = replace(config, n_projections=L, n_permutations=B)
            times = []
            for _ in range(runs):
                start = time.perf_counter()
                run_method(
                    method,
                    y,
                    z,
                    cfg,
                    directions_stream(seed, axis_id, vi),
                    permutations_stream(seed, axis_id, vi),
                )
                times.append(time.perf_counter() - start)
            records.append(
                TimingRecord(method=method, n=n, L=L, B=B, d=d, seconds=float(np.median(times)))
            )
    return records
