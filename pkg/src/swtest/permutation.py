"""Generic permutation-test calibration.

Works with any statistic evaluated on group assignments of a pooled sample:
B random assignments plus the identity, critical value as the
ceil((B+1)(1-alpha))-th order statistic, strict-inequality rejection.  Ties
favor the null, which is what gives finite-sample level control.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError
from .geometry import SeededStream, permutations_stream


@dataclass(frozen=True)
class GroupAssignment:
    """Split of a pooled sample of size N into groups of sizes n and N-n.

    labels[i] is True when pooled point i belongs to the first group.
    """

    labels: np.ndarray
    n: int

    def __post_init__(self):
        labels = np.ascontiguousarray(self.labels, dtype=bool)
        if labels.ndim != 1:
            raise ConfigurationError("labels must be a 1-d boolean vector")
        count = int(labels.sum())
        if count != self.n:
            raise ConfigurationError(f"assignment has {count} first-group labels, expected {self.n}")
        if not 0 < self.n < labels.size:
            raise ConfigurationError("both groups must be non-empty")
        object.__setattr__(self, "labels", labels)

    @property
    def m(self) -> int:
        return self.labels.size - self.n


def identity_assignment(n: int, m: int) -> GroupAssignment:
    labels = np.zeros(n + m, dtype=bool)
    labels[:n] = True
    return GroupAssignment(labels, n)


def random_assignment(n: int, m: int, stream: SeededStream) -> GroupAssignment:
    """Uniform assignment of n out of n+m pooled indices to the first group.

    Implemented as a full shuffle of 0..N-1 taking the first n positions,
    equivalent to a uniform permutation since statistics are group-symmetric.
    """
    if n < 1 or m < 1:
        raise ConfigurationError("group sizes must be >= 1")
    perm = stream.generator().permutation(n + m)
    labels = np.zeros(n + m, dtype=bool)
    labels[perm[:n]] = True
    return GroupAssignment(labels, n)


def resolve_projections(spec, n: int) -> int:
    """Resolve a projection count that may be symbolic in the sample size.

    Accepts an int, None (meaning n), or one of "0.5n", "n", "2n".
    """
    if spec is None or spec == "n":
        return n
    if spec == "0.5n":
        return max(1, n // 2)
    if spec == "2n":
        return 2 * n
    L = int(spec)
    if L < 1:
        raise ConfigurationError(f"projection count must be >= 1, got {spec}")
    return L


@dataclass(frozen=True)
class TestConfig:
    """Tunables of one permutation test run.

    n_projections may be an int or a symbolic "0.5n" / "n" / "2n" resolved
    against the first-group size at run time (None also means n).
    """

    __test__ = False  # not a pytest class

    alpha: float = 0.05
    n_permutations: int = 200
    n_projections: int | str | None = None
    p: float = 2.0
    master_seed: int = 0

    def __post_init__(self):
        if self.n_permutations < 1:
            raise ConfigurationError("need at least one permutation")
        if not 1.0 / (self.n_permutations + 1) <= self.alpha < 1.0:
            raise ConfigurationError(
                f"alpha must satisfy 1/(B+1) <= alpha < 1, got alpha={self.alpha}, B={self.n_permutations}"
            )
        if self.p < 1:
            raise ConfigurationError(f"order p must be >= 1, got {self.p}")
        if isinstance(self.n_projections, str) and self.n_projections not in ("0.5n", "n", "2n"):
            raise ConfigurationError(f"unknown symbolic projection count {self.n_projections!r}")
        if isinstance(self.n_projections, int) and self.n_projections < 1:
            raise ConfigurationError("projection count must be >= 1")

    def directions_stream(self) -> SeededStream:
        from .geometry import directions_stream

        return directions_stream(self.master_seed)

    def permutations_stream(self) -> SeededStream:
        return permutations_stream(self.master_seed)


@dataclass
class TestReport:
    """Full outcome of one permutation test."""

    __test__ = False  # not a pytest class

    statistic_observed: float
    critical_value: float
    reject: bool
    p_value: float
    permuted_statistics: np.ndarray  # B+1 values, identity last
    wall_time: float
    method_info: dict = field(default_factory=dict)


def critical_value(stats, alpha: float) -> float:
    """The ceil((B+1)(1-alpha))-th smallest of the B+1 statistics (1-based)."""
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha}")
    stats = np.asarray(stats, dtype=np.float64)
    count = stats.size
    if count < 1:
        raise ConfigurationError("need at least one statistic")
    # Tolerant ceiling: (B+1)(1-alpha) may land a hair above an exact integer.
    k = math.ceil(count * (1.0 - alpha) - 1e-9)
    k = min(max(k, 1), count)
    return float(np.partition(stats, k - 1)[k - 1])


def run_permutation_test(
    stat_fn: Callable[[GroupAssignment], float],
    n: int,
    m: int,
    config: TestConfig,
    permutation_stream: SeededStream | None = None,
    threads: int = 1,
) -> TestReport:
    """Calibrate stat_fn by permutation and decide.

    Evaluates stat_fn on B assignments sampled i.i.d. (with replacement)
    plus the identity in the last slot.  Assignment b draws from the child
    stream (permutations, b), so results do not depend on evaluation order
    or thread count.  Rejection uses strict inequality, so tie-heavy
    degenerate inputs accept the null.
    """
    if permutation_stream is None:
        permutation_stream = config.permutations_stream()
    B = config.n_permutations
    start = time.perf_counter()
    stats = np.empty(B + 1, dtype=np.float64)

    def evaluate(b: int) -> None:
        # Slots 0..B-1 hold sampled assignments b=1..B; slot B is the identity.
        if b == B:
            stats[b] = stat_fn(identity_assignment(n, m))
        else:
            stats[b] = stat_fn(random_assignment(n, m, permutation_stream.child(b + 1)))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(evaluate, range(B + 1)))
    else:
        for b in range(B + 1):
            evaluate(b)

    observed = float(stats[B])
    crit = critical_value(stats, config.alpha)
    p_value = (1 + int(np.count_nonzero(stats[:B] >= observed))) / (B + 1)
    return TestReport(
        statistic_observed=observed,
        critical_value=crit,
        reject=observed > crit,
        p_value=p_value,
        permuted_statistics=stats,
        wall_time=time.perf_counter() - start,
    )
