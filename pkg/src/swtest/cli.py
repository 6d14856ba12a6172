"""Command-line entry point: two-sample tests, power/level sweeps, timing.

Exit codes: 0 the command ran (whatever the test decision), 1 usage error,
2 data/configuration error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import os
import sys
import traceback
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import ConfigurationError, DataFormatError
from .harness import (
    METHOD_IDS,
    PowerCurve,
    TimingRecord,
    estimate_power,
    export_null_histogram,
    timing_sweep,
    type1_experiment,
)
from .permutation import TestConfig, resolve_projections
from .scenarios import (
    NULL_DISTRIBUTIONS,
    SCENARIO_KINDS,
    ScenarioSpec,
    default_mean_shift,
    load_point_cloud_csv,
)
from .sliced import sw_permutation_test
from .mmd import mmd_perm_test

_ENV_OUT_DIR = "SWTEST_OUT_DIR"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _projection_count(text: str):
    if text in ("0.5n", "n", "2n"):
        return text
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f'--L expects an integer or one of "0.5n", "n", "2n", got {text!r}'
        )
    if value < 1:
        raise argparse.ArgumentTypeError("--L must be >= 1")
    return value


def _method_list(text: str) -> list[str]:
    methods = [tok.strip() for tok in text.split(",") if tok.strip()]
    bad = [m for m in methods if m not in METHOD_IDS]
    if bad or not methods:
        raise argparse.ArgumentTypeError(
            f"unknown method(s) {bad}; valid names: {', '.join(sorted(METHOD_IDS))}"
        )
    return methods


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _grid_list(text: str) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok in ("0.5n", "n", "2n"):
            out.append(tok)
            continue
        try:
            out.append(int(tok))
        except ValueError:
            try:
                out.append(float(tok))
            except ValueError:
                raise argparse.ArgumentTypeError(f"bad grid value {tok!r}")
    if not out:
        raise argparse.ArgumentTypeError("empty grid")
    return out


def _add_core_options(p: argparse.ArgumentParser):
    p.add_argument("--p", type=float, default=2.0, help="Wasserstein order (default 2)")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--threads", type=int, default=1, help="worker pool size")


def _add_alpha_option(p: argparse.ArgumentParser):
    p.add_argument("--alpha", type=float, default=0.05, help="significance level (default 0.05)")


def _add_permutation_options(p: argparse.ArgumentParser, with_L: bool = True):
    p.add_argument("--B", type=int, default=200, help="number of permutations (default 200)")
    if with_L:
        p.add_argument(
            "--L",
            type=_projection_count,
            default="n",
            help='projection count: integer or "0.5n"/"n"/"2n" (default n)',
        )


def _add_out_options(p: argparse.ArgumentParser):
    p.add_argument(
        "--out-dir",
        default=os.environ.get(_ENV_OUT_DIR, "."),
        help=f"output directory (default ${_ENV_OUT_DIR} or the working directory)",
    )
    p.add_argument("--svg", action="store_true", help="also emit an SVG line chart")


def _config_from(args) -> TestConfig:
    return TestConfig(
        alpha=getattr(args, "alpha", 0.05),
        n_permutations=getattr(args, "B", 200),
        n_projections=getattr(args, "L", "n"),
        p=args.p,
        master_seed=args.seed,
    )


@dataclass
class RunManifest:
    """Everything needed to reproduce a run's numeric outputs exactly."""

    command: str
    tool_version: str
    master_seed: int
    config: dict
    started: str
    finished: str = ""
    outputs: list = field(default_factory=list)

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.__dict__, f, indent=2, sort_keys=True)
            f.write("\n")


def _start_manifest(args, command: str) -> RunManifest:
    config = {
        k: v for k, v in sorted(vars(args).items()) if k != "func" and not k.startswith("_")
    }
    return RunManifest(
        command=command,
        tool_version=__version__,
        master_seed=args.seed,
        config=config,
        started=datetime.datetime.now(datetime.timezone.utc).isoformat(),
    )


def _finish_manifest(manifest: RunManifest, out_dir: str, name: str, outputs: list) -> None:
    manifest.finished = datetime.datetime.now(datetime.timezone.utc).isoformat()
    manifest.outputs = [os.path.basename(p) for p in outputs]
    path = os.path.join(out_dir, f"{name}_manifest.json")
    manifest.write(path)
    print(f"wrote {path}")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_power_csv(curve: PowerCurve, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["sweep_value", "method", "rejections", "reps", "p_hat", "ci_half"])
        for row in curve.rows():
            writer.writerow([_fmt(row[k]) for k in ("sweep_value", "method", "rejections", "reps", "p_hat", "ci_half")])


def read_power_csv(path: str, sweep: str = "n") -> PowerCurve:
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = list(csv.DictReader(f))
    if not rows:
        raise DataFormatError(f"{path}: empty power table")

    def parse_value(text):
        try:
            return int(text)
        except ValueError:
            return float(text)

    grid = []
    methods = []
    for row in rows:
        value = parse_value(row["sweep_value"])
        if value not in grid:
            grid.append(value)
        if row["method"] not in methods:
            methods.append(row["method"])
    reps = int(rows[0]["reps"])
    rejections = {m: [0] * len(grid) for m in methods}
    for row in rows:
        gi = grid.index(parse_value(row["sweep_value"]))
        rejections[row["method"]][gi] = int(row["rejections"])
    return PowerCurve(sweep=sweep, grid=grid, reps=reps, methods=methods, rejections=rejections)


def write_timing_csv(records: list[TimingRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["method", "n", "L", "B", "d", "seconds_median"])
        for r in records:
            writer.writerow([r.method, r.n, r.L, r.B, r.d, _fmt(r.seconds)])


def read_timing_csv(path: str) -> list[TimingRecord]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = list(csv.DictReader(f))
    return [
        TimingRecord(
            method=row["method"],
            n=int(row["n"]),
            L=int(row["L"]),
            B=int(row["B"]),
            d=int(row["d"]),
            seconds=float(row["seconds_median"]),
        )
        for row in rows
    ]


def _scenario_from(args) -> ScenarioSpec:
    kind = args.scenario
    params: dict = {}
    if kind == "covariance_shift":
        params = {"delta": args.delta, "d": args.d}
    elif kind == "mean_shift":
        shift = np.zeros(args.d)
        values = args.shift if args.shift is not None else default_mean_shift(args.d).tolist()
        if len(values) > args.d:
            raise ConfigurationError(f"--shift has {len(values)} entries but --d is {args.d}")
        shift[: len(values)] = values
        params = {"shift": shift, "d": args.d}
    elif kind in ("sphere", "ball", "ball_sphere"):
        params = {"d": args.d}
    elif kind == "mnist_mixture":
        if not args.mnist_images or not args.mnist_labels:
            raise ConfigurationError("mnist_mixture needs --mnist-images and --mnist-labels")
        digits = [int(v) for v in args.digits.split(",")]
        if len(digits) != 2:
            raise ConfigurationError("--digits expects two comma-separated digits")
        params = {
            "images_path": args.mnist_images,
            "labels_path": args.mnist_labels,
            "digits": tuple(digits),
            "w": args.mix_weight,
        }
    elif kind == "custom_csv":
        if not args.file_a or not args.file_b:
            raise ConfigurationError("custom_csv needs --file-a and --file-b")
        params = {"file_a": args.file_a, "file_b": args.file_b}
    return ScenarioSpec(kind, params)


def cmd_test(args) -> int:
    y = load_point_cloud_csv(args.file_a)
    z = load_point_cloud_csv(args.file_b)
    if y.d != z.d:
        raise ConfigurationError(
            f"dimension mismatch between {args.file_a} ({y.d}-d) and {args.file_b} ({z.d}-d)"
        )
    config = _config_from(args)
    if args.method == "sw":
        report = sw_permutation_test(y, z, config, threads=args.threads)
    else:
        report = mmd_perm_test(y, z, args.method[len("mmd-") :], config, threads=args.threads)
    decision = "reject" if report.reject else "accept"
    print(
        f"{args.method} permutation test: n={y.n}, m={z.n}, d={y.d}, "
        f"alpha={args.alpha}, B={args.B}, seed={args.seed}"
    )
    print(f"statistic={_fmt(report.statistic_observed)}")
    print(f"critical_value={_fmt(report.critical_value)}")
    print(f"p_value={_fmt(report.p_value)}")
    print(f"reject={_fmt(report.reject)}")
    print(
        f"decision: {decision} the null hypothesis "
        f"(statistic {'>' if report.reject else '<='} critical value at level {args.alpha})"
    )
    return 0


_DEFAULT_GRIDS = {
    "n": [20, 40, 60, 80, 100, 120, 140, 160, 180, 200],
    "L": ["0.5n", "n", "2n"],
    "delta": [1.3, 1.6, 2.0, 2.4, 2.7],
}


def cmd_power(args) -> int:
    manifest = _start_manifest(args, "power")
    scenario = _scenario_from(args)
    grid = args.grid if args.grid is not None else _DEFAULT_GRIDS[args.sweep]
    config = _config_from(args)
    curve = estimate_power(
        scenario,
        args.methods,
        args.sweep,
        grid,
        args.reps,
        config,
        n=args.n,
        threads=args.threads,
    )
    os.makedirs(args.out_dir, exist_ok=True)
    out_csv = os.path.join(args.out_dir, "power.csv")
    write_power_csv(curve, out_csv)
    outputs = [out_csv]
    print(f"wrote {out_csv}")
    if args.svg:
        from .charts import write_power_svg

        out_svg = os.path.join(args.out_dir, "power.svg")
        write_power_svg(curve, out_svg, title=f"{scenario.kind} power")
        outputs.append(out_svg)
        print(f"wrote {out_svg}")
    for row in curve.rows():
        print(
            f"{curve.sweep}={row['sweep_value']} {row['method']}: "
            f"p_hat={row['p_hat']:.4f} +- {row['ci_half']:.4f} ({row['rejections']}/{row['reps']})"
        )
    _finish_manifest(manifest, args.out_dir, "power", outputs)
    return 0


def cmd_type1(args) -> int:
    manifest = _start_manifest(args, "type1")
    config = _config_from(args)
    factors = args.L_factors
    curve = type1_experiment(
        n=args.n, d=args.d, reps=args.reps, L_factors=tuple(factors), config=config, threads=args.threads
    )
    os.makedirs(args.out_dir, exist_ok=True)
    out_csv = os.path.join(args.out_dir, "type1.csv")
    write_power_csv(curve, out_csv)
    print(f"wrote {out_csv}")
    for row in curve.rows():
        print(
            f"L={row['sweep_value']}: type-I rate {row['p_hat']:.4f} +- {row['ci_half']:.4f} "
            f"({row['rejections']}/{row['reps']})"
        )
    outputs = [out_csv]
    if args.svg:
        from .charts import write_power_svg

        out_svg = os.path.join(args.out_dir, "type1.svg")
        write_power_svg(curve, out_svg, title="type I error vs projection count")
        outputs.append(out_svg)
        print(f"wrote {out_svg}")
    _finish_manifest(manifest, args.out_dir, "type1", outputs)
    return 0


def cmd_nullhist(args) -> int:
    manifest = _start_manifest(args, "nullhist")
    config = _config_from(args)
    L = resolve_projections(args.L, args.n)
    counts, edges = export_null_histogram(
        args.dist, args.n, L, args.reps, args.bins, config, d=args.d, threads=args.threads
    )
    os.makedirs(args.out_dir, exist_ok=True)
    out_csv = os.path.join(args.out_dir, "nullhist.csv")
    with open(out_csv, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["bin_left", "bin_right", "count"])
        for left, right, count in zip(edges[:-1], edges[1:], counts):
            writer.writerow([_fmt(float(left)), _fmt(float(right)), int(count)])
    print(f"wrote {out_csv}")
    _finish_manifest(manifest, args.out_dir, "nullhist", [out_csv])
    return 0


def cmd_bench(args) -> int:
    manifest = _start_manifest(args, "bench")
    config = _config_from(args)
    records = timing_sweep(
        args.method,
        config,
        base_n=args.base_n,
        base_L=args.base_L,
        base_B=args.base_B,
        d=args.d,
        n_grid=tuple(args.n_grid),
        L_grid=tuple(args.L_grid),
        B_grid=tuple(args.B_grid),
        runs=args.runs,
    )
    os.makedirs(args.out_dir, exist_ok=True)
    out_csv = os.path.join(args.out_dir, "timing.csv")
    write_timing_csv(records, out_csv)
    print(f"wrote {out_csv}")
    for r in records:
        print(f"{r.method} n={r.n} L={r.L} B={r.B} d={r.d}: {r.seconds:.4f}s")
    _finish_manifest(manifest, args.out_dir, "bench", [out_csv])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="swtest", description=__doc__)
    parser.add_argument("--version", action="version", version=f"swtest {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="run one two-sample test on two CSV point clouds")
    p_test.add_argument("file_a")
    p_test.add_argument("file_b")
    p_test.add_argument("--method", choices=sorted(METHOD_IDS), default="sw")
    _add_alpha_option(p_test)
    _add_permutation_options(p_test)
    _add_core_options(p_test)
    p_test.set_defaults(func=cmd_test)

    p_power = sub.add_parser("power", help="Monte Carlo power estimation over a grid")
    p_power.add_argument("--scenario", choices=SCENARIO_KINDS, default="covariance_shift")
    p_power.add_argument("--methods", type=_method_list, default=["sw"], help="comma-separated")
    p_power.add_argument("--sweep", choices=("n", "L", "delta"), default="n")
    p_power.add_argument("--grid", type=_grid_list, default=None, help="comma-separated grid values")
    p_power.add_argument("--n", type=int, default=140, help="sample size for L/delta sweeps")
    p_power.add_argument("--d", type=int, default=60, help="dimension (scenario default)")
    p_power.add_argument("--delta", type=float, default=2.7, help="covariance shift magnitude")
    p_power.add_argument("--shift", type=_float_list, default=None, help="mean-shift vector prefix")
    p_power.add_argument("--mix-weight", type=float, default=0.85)
    p_power.add_argument("--digits", default="6,9")
    p_power.add_argument("--mnist-images")
    p_power.add_argument("--mnist-labels")
    p_power.add_argument("--file-a")
    p_power.add_argument("--file-b")
    p_power.add_argument("--reps", type=int, default=150)
    _add_alpha_option(p_power)
    _add_permutation_options(p_power)
    _add_core_options(p_power)
    _add_out_options(p_power)
    p_power.set_defaults(func=cmd_power)

    p_type1 = sub.add_parser("type1", help="empirical level of the SW test on null Gaussians")
    p_type1.add_argument("--n", type=int, default=50)
    p_type1.add_argument("--d", type=int, default=60)
    p_type1.add_argument("--reps", type=int, default=2000)
    p_type1.add_argument(
        "--L-factors", dest="L_factors", type=_grid_list, default=["0.5n", "n", "2n"]
    )
    _add_alpha_option(p_type1)
    _add_permutation_options(p_type1, with_L=False)
    _add_core_options(p_type1)
    _add_out_options(p_type1)
    p_type1.set_defaults(func=cmd_type1)

    p_hist = sub.add_parser("nullhist", help="histogram of the null statistic distribution")
    p_hist.add_argument("--dist", choices=NULL_DISTRIBUTIONS, default="gaussian")
    p_hist.add_argument("--n", type=int, default=100)
    p_hist.add_argument(
        "--L",
        type=_projection_count,
        default="n",
        help='projection count: integer or "0.5n"/"n"/"2n" (default n)',
    )
    p_hist.add_argument("--d", type=int, default=2)
    p_hist.add_argument("--reps", type=int, default=2000)
    p_hist.add_argument("--bins", type=int, default=40)
    _add_core_options(p_hist)
    _add_out_options(p_hist)
    p_hist.set_defaults(func=cmd_nullhist)

    p_bench = sub.add_parser("bench", help="median wall times over n/L/B grids")
    p_bench.add_argument("--method", choices=sorted(METHOD_IDS), default="sw")
    p_bench.add_argument("--base-n", type=int, default=200)
    p_bench.add_argument("--base-L", type=int, default=200)
    p_bench.add_argument("--base-B", type=int, default=200)
    p_bench.add_argument("--d", type=int, default=30)
    p_bench.add_argument("--runs", type=int, default=5)
    p_bench.add_argument("--n-grid", type=_grid_list, default=[200, 400])
    p_bench.add_argument("--L-grid", type=_grid_list, default=[200, 400])
    p_bench.add_argument("--B-grid", type=_grid_list, default=[200, 400])
    _add_core_options(p_bench)
    _add_out_options(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (ConfigurationError, DataFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 3


if __name__ == "__main__":
    sys.exit(main())
