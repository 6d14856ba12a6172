"""Permutation-calibrated sliced Wasserstein two-sample testing.

Exact 1D optimal-transport kernels, a pooled pre-sorted representation that
keeps the permutation loop linear per assignment, MMD baselines, and a
Monte Carlo benchmark harness.
"""

__version__ = "0.1.0"

from .errors import ConfigurationError, DataFormatError
from .geometry import (
    DirectionSet,
    PointCloud,
    SeededStream,
    project_pool,
    sample_directions,
)
from .ot1d import wasserstein_1d_pp, wasserstein_1d_pp_oracle
from .permutation import (
    GroupAssignment,
    TestConfig,
    TestReport,
    critical_value,
    identity_assignment,
    random_assignment,
    resolve_projections,
    run_permutation_test,
)
from .sliced import SortedProjectionPool, build_pool, sw_permutation_test, sw_pp, sw_pp_direct
from .mmd import KernelSpec, median_heuristic, mmd2_v, mmd_perm_test
from .harness import (
    PowerCurve,
    TimingRecord,
    estimate_power,
    export_null_histogram,
    timing_sweep,
    type1_experiment,
)
from .scenarios import (
    ScenarioSpec,
    gen_ball,
    gen_covariance_shift,
    gen_mean_shift,
    gen_mnist_mixture,
    gen_sphere,
    load_mnist,
    load_point_cloud_csv,
)

__all__ = [
    "ConfigurationError",
    "DataFormatError",
    "DirectionSet",
    "GroupAssignment",
    "KernelSpec",
    "PointCloud",
    "PowerCurve",
    "ScenarioSpec",
    "SeededStream",
    "SortedProjectionPool",
    "TestConfig",
    "TestReport",
    "TimingRecord",
    "build_pool",
    "critical_value",
    "estimate_power",
    "export_null_histogram",
    "gen_ball",
    "gen_covariance_shift",
    "gen_mean_shift",
    "gen_mnist_mixture",
    "gen_sphere",
    "identity_assignment",
    "load_mnist",
    "load_point_cloud_csv",
    "median_heuristic",
    "mmd2_v",
    "mmd_perm_test",
    "project_pool",
    "random_assignment",
    "resolve_projections",
    "run_permutation_test",
    "sample_directions",
    "sw_permutation_test",
    "sw_pp",
    "sw_pp_direct",
    "timing_sweep",
    "type1_experiment",
    "wasserstein_1d_pp",
    "wasserstein_1d_pp_oracle",
]
