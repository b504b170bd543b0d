"""
Command line interface.

Exit codes: 0 success, 2 input error, 3 estimation failure, 4 failed theory check under
``--strict``.
"""
import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import pandas as pd
from rich.console import Console

from tailcut import TAILCUT_LOGGER, __version__
from tailcut.errors import (
    InvalidOption,
    InvalidSample,
    MalformedInput,
    TailcutError,
    UnknownName,
)
from tailcut.estimators.core import SelectionResult, SortedSample, trace, weissman_curve
from tailcut.estimators.ihs import ihs_selector
from tailcut.estimators.samsee import DEFAULT_WINDOW, samsee_selector
from tailcut.io import read_values
from tailcut.simulation.distributions import DEFAULT_SEED, SeedSpec, lookup
from tailcut.simulation.harness import (
    KoptProtocol,
    StudyConfig,
    render_csv,
    run_table,
    summary_table,
)
from tailcut.simulation.registry import fixed_k_selector, sqrt_n, ten_percent
from tailcut.theory.checks import CHECKS, CheckResult, run_check
from tailcut.theory.report import check_table, render_report
from tailcut.util.encoding import dumps
from tailcut.varying import METHODS, default_global_k, fig6_experiment, fit_curve, ingest_losses

LOG = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ESTIMATION = 3
EXIT_CHECK = 4

MIN_SELECT_OBSERVATIONS = 30

SELECT_METHODS = ("samsee", "ihs", "sihs", "tenpct", "sqrtn")
DEFAULT_CHECKS = ("pqr", "bias-variance", "upper-mean", "kopt-ratio", "c-of-k")


@dataclass(frozen=True)
class CliConfig:
    subcommand: str
    seed: int = DEFAULT_SEED
    input: Optional[Path] = None
    column: Optional[str] = None
    method: Optional[str] = None
    variant: str = "auto"
    p: Optional[float] = None
    rho: Optional[float] = None
    window: int = DEFAULT_WINDOW
    distribution: Optional[str] = None
    n: Optional[int] = None
    reps: Optional[int] = None
    selectors: tuple[str, ...] = ()
    kopt_groups: int = 20
    kopt_samples: int = 1000
    checks: tuple[str, ...] = ()
    k: Optional[int] = None
    K: Optional[int] = None
    rhos: Optional[tuple[float, ...]] = None
    ns: Optional[tuple[int, ...]] = None
    gamma: Optional[float] = None
    c: Optional[float] = None
    strict: bool = False
    synthetic: Optional[str] = None
    h: float = 0.1
    grid: int = 100
    global_k: Optional[int] = None
    output: Optional[Path] = None
    format: str = "table"
    threads: Optional[int] = None

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "CliConfig":
        fields = cls.__dataclass_fields__
        return cls(**{key: value for key, value in vars(ns).items() if key in fields})


def _float_list(value: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in value.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {value!r}")


def _int_list(value: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in value.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {value!r}")


def _name_list(value: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in value.split(",") if v.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tailcut",
        description="Threshold selection for heavy-tailed data.",
        epilog=f"All commands are deterministic for a given --seed (default {DEFAULT_SEED}).",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", action="store_true", help="debug logging on stderr")
    common.add_argument(
        "--threads", type=int, help="worker cap (default: TAILCUT_THREADS or min(8, cpus))"
    )
    common.add_argument(
        "--seed", type=int, default=DEFAULT_SEED, help=f"base seed (default {DEFAULT_SEED})"
    )
    commands = parser.add_subparsers(dest="subcommand", required=True)

    select = commands.add_parser(
        "select", parents=[common], help="select the sample fraction on a data file"
    )
    select.add_argument("--input", type=Path, required=True, help="delimited text or JSON file")
    select.add_argument(
        "--column", help="column name or 0-based index; JSONPath expression for JSON input"
    )
    select.add_argument("--method", choices=SELECT_METHODS, default="samsee")
    select.add_argument("--variant", choices=("auto", "positive", "negative"), default="auto")
    select.add_argument("--p", type=float, help="also estimate the (1-p)-quantile")
    select.add_argument("--rho", type=float, help="second order parameter for samsee (default -1)")
    select.add_argument("--window", type=int, default=DEFAULT_WINDOW, help="K* search window")
    select.add_argument("--output", type=Path, help="write the JSON report to a file")

    simulate = commands.add_parser(
        "simulate", parents=[common], help="Monte-Carlo efficiency study"
    )
    simulate.add_argument("--dist", dest="distribution", required=True)
    simulate.add_argument("--n", type=int, required=True)
    simulate.add_argument("--reps", type=int, default=2000)
    simulate.add_argument(
        "--selectors", type=_name_list, default=("samsee", "sihs", "tenpct", "sqrtn")
    )
    simulate.add_argument("--p", type=float, default=0.001)
    simulate.add_argument("--kopt-groups", type=int, default=20)
    simulate.add_argument("--kopt-samples", type=int, default=1000)
    simulate.add_argument("--output", type=Path, help="write the CSV to a file")

    theory = commands.add_parser(
        "theory", parents=[common], help="compare Monte-Carlo results with asymptotics"
    )
    theory.add_argument(
        "--check",
        dest="checks",
        type=_name_list,
        default=DEFAULT_CHECKS,
        help=f"comma separated, any of {', '.join(CHECKS)}",
    )
    theory.add_argument("--k", type=int)
    theory.add_argument("--K", type=int)
    theory.add_argument("--reps", type=int)
    theory.add_argument(
        "--rho",
        dest="rhos",
        type=_float_list,
        help="comma separated second order parameters; write negative lists as --rho=-1,-2",
    )
    theory.add_argument("--n", dest="ns", type=_int_list)
    theory.add_argument("--gamma", type=float)
    theory.add_argument("--c", type=float)
    theory.add_argument("--strict", action="store_true", help="exit 4 when a check fails")
    theory.add_argument("--format", choices=("table", "json"), default="table")

    varying = commands.add_parser(
        "varying", parents=[common], help="extreme value index varying in time"
    )
    source = varying.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", type=Path, help="two columns: time, loss")
    source.add_argument("--synthetic", choices=("fig6",))
    varying.add_argument("--h", type=float, default=0.1)
    varying.add_argument("--grid", type=int, default=100)
    varying.add_argument("--method", choices=METHODS, default="adaptive_samsee")
    varying.add_argument("--global-k", type=int)
    varying.add_argument("--reps", type=int, default=200)
    varying.add_argument("--n", type=int, default=5000)
    varying.add_argument("--output", type=Path, help="write the CSV to a file")
    return parser


def _require(condition: bool, option: str, reason: str) -> None:
    if not condition:
        raise InvalidOption(option, reason)


def validate(config: CliConfig) -> None:
    """Option constraints argparse cannot express; a violation is a usage error."""
    counts = {
        "--reps": config.reps,
        "--n": config.n,
        "--k": config.k,
        "--K": config.K,
        "--global-k": config.global_k,
        "--threads": config.threads,
        "--kopt-groups": config.kopt_groups,
        "--kopt-samples": config.kopt_samples,
        "--window": config.window,
        "--grid": config.grid,
    }
    for option, value in counts.items():
        _require(value is None or value >= 1, option, f"must be at least 1, got {value}")
    _require(
        config.p is None or 0 < config.p < 0.5, "--p", f"must lie in (0, 1/2), got {config.p}"
    )
    _require(
        config.rho is None or config.rho < 0, "--rho", f"must be negative, got {config.rho}"
    )
    _require(
        not config.rhos or all(rho < 0 for rho in config.rhos),
        "--rho",
        f"every value must be negative, got {config.rhos}",
    )
    if config.subcommand == "varying":
        _require(0 < config.h < 0.5, "--h", f"must lie in (0, 1/2), got {config.h}")


def _emit(text: str, output: Optional[Path]) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    with open(output, "w", encoding="utf-8", newline="") as fd:
        fd.write(text)
    LOG.debug(f"wrote {output}")


def _selector(config: CliConfig):
    if config.method == "samsee":
        return samsee_selector(rho=config.rho, window_h=config.window)
    if config.method in ("ihs", "sihs"):
        return ihs_selector(config.variant, smoothed=config.method == "sihs")
    if config.method == "tenpct":
        return fixed_k_selector(ten_percent, "tenpct")
    if config.method == "sqrtn":
        return fixed_k_selector(sqrt_n, "sqrtn")
    raise UnknownName(config.method, kind="method")


def cmd_select(config: CliConfig) -> int:
    values = read_values(config.input, config.column)
    positive = int((values > 0).sum())
    if positive < MIN_SELECT_OBSERVATIONS:
        raise InvalidSample(
            f"need at least {MIN_SELECT_OBSERVATIONS} positive observations, got {positive}"
        )
    sample = SortedSample.from_values(values)
    result: SelectionResult = _selector(config)(sample)
    LOG.debug(f"{config.method} selected k={result.k_hat} on n={sample.n}")

    report = {"method": result.method, "n": sample.n, **result.to_dict()}
    if config.p is not None:
        report["quantile_p"] = {
            "p": config.p,
            "value": result.quantile(sample, config.p),
            "curve": weissman_curve(sample, trace(sample), config.p),
        }
    _emit(dumps(report, indent=2) + "\n", config.output)
    return EXIT_OK


def cmd_simulate(config: CliConfig, console: Console) -> int:
    try:
        study = StudyConfig(
            spec=lookup(config.distribution),
            n=config.n,
            reps=config.reps,
            p=config.p,
            selectors=config.selectors,
            seed=SeedSpec(config.seed),
            kopt_protocol=KoptProtocol(config.kopt_groups, config.kopt_samples),
            threads=config.threads,
        )
    except ValueError as e:
        raise InvalidOption("simulate", str(e)) from e
    report = run_table(study)
    _emit(render_csv(report), config.output)
    console.print(summary_table(report))
    return EXIT_OK


def cmd_theory(config: CliConfig, console: Console) -> int:
    options = {
        "k": config.k,
        "K": config.K,
        "reps": config.reps,
        "rhos": config.rhos,
        "ns": config.ns,
        "gamma": config.gamma,
        "c": config.c,
        "seed": SeedSpec(config.seed),
    }
    results: list[CheckResult] = [run_check(name, **options) for name in config.checks]
    if config.format == "json":
        sys.stdout.write(dumps([r.to_dict() for r in results], indent=2) + "\n")
    else:
        console.print(check_table(results))
    failed = [r for r in results if not r]
    for result in failed:
        sys.stderr.write(render_report(result))
    if failed and config.strict:
        return EXIT_CHECK
    return EXIT_OK


def cmd_varying(config: CliConfig) -> int:
    if config.synthetic == "fig6":
        result = fig6_experiment(
            n=config.n,
            h=config.h,
            grid_size=config.grid,
            reps=config.reps,
            global_k=config.global_k,
            seed=SeedSpec(config.seed),
            methods=tuple(dict.fromkeys(("global_k", config.method))),
            threads=config.threads,
        )
        frame: pd.DataFrame = result.to_frame()
    else:
        ts = ingest_losses(config.input)
        global_k = config.global_k
        if config.method == "global_k" and global_k is None:
            global_k = default_global_k(ts.n)
        fit = fit_curve(
            ts, config.h, config.grid, config.method, global_k=global_k, threads=config.threads
        )
        frame = fit.to_frame()
    _emit(frame.to_csv(index=False, float_format="%.6g", lineterminator="\n"), config.output)
    return EXIT_OK


def _configure_logging(verbose: bool) -> None:
    if not verbose:
        return
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    TAILCUT_LOGGER.addHandler(handler)
    TAILCUT_LOGGER.setLevel(logging.DEBUG)


def run(config: CliConfig) -> int:
    validate(config)
    # tables go to stderr whenever stdout carries the machine readable output
    console = Console(stderr=config.output is None)
    if config.subcommand == "select":
        return cmd_select(config)
    if config.subcommand == "simulate":
        return cmd_simulate(config, console)
    if config.subcommand == "theory":
        return cmd_theory(config, Console(stderr=config.format == "json"))
    if config.subcommand == "varying":
        return cmd_varying(config)
    raise UnknownName(config.subcommand, kind="subcommand")


def main(argv: Optional[Sequence[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    _configure_logging(ns.verbose)
    config = CliConfig.from_namespace(ns)
    try:
        return run(config)
    except (MalformedInput, UnknownName, InvalidSample, InvalidOption, OSError) as e:
        sys.stderr.write(f"tailcut: error: {e}\n")
        return EXIT_INPUT
    except (TailcutError, ValueError) as e:
        sys.stderr.write(f"tailcut: estimation failed: {type(e).__name__}: {e}\n")
        return EXIT_ESTIMATION


if __name__ == "__main__":
    sys.exit(main())
