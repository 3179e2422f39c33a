"""Command-line entry point: generate, train, benchmark and validate.

Exit codes: 0 on success, 1 when a validation suite fails or a policy
breaks plan validity, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import asyncio
import csv
import json
import logging
import sys
import typing as ty
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from ghostkitchen._defaults import DEFAULT_OUTPUT_ROOT
from ghostkitchen.config import LnsConfig, RunConfig, Scenario, load_run_config
from ghostkitchen.errors import CheckpointError, ConfigError, GhostKitchenError
from ghostkitchen.instances import (
    DayFile,
    build_facility,
    check_day,
    read_day,
    resolve_scenario,
    sample_days,
    write_day,
)
from ghostkitchen.kpi import (
    BenchmarkRow,
    aggregate,
    improvement_table,
    utilization_series,
    write_benchmark_csv,
    write_utilization_csv,
)
from ghostkitchen.manifest import RunManifest
from ghostkitchen.model import Order
from ghostkitchen.policies import Policy
from ghostkitchen.runner import run_policies
from ghostkitchen.simulation import EpisodeLog, write_episode_log
from ghostkitchen.solver import pdft_diagnostics
from ghostkitchen.training import Trainer, train_policy, write_curve
from ghostkitchen.validation import (
    SUITE_ALIASES,
    SUITES,
    WITNESS_SAMPLES,
    SuiteReport,
    run_suite,
)
from ghostkitchen.vfa import load_checkpoint, save_checkpoint

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s:%(lineno)d - %(levelname)s - %(message)s"

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


# =============================================================================
# Shared plumbing
# =============================================================================


class _Context(ty.NamedTuple):
    run: RunConfig
    scenario: Scenario
    seed: int
    out: Path


def _context(args: argparse.Namespace, command: str) -> _Context:
    run = load_run_config(args.config) if args.config is not None else RunConfig()
    scenario = resolve_scenario(run, args.preset)
    seed = args.seed if args.seed is not None else run.seed
    out = args.out or DEFAULT_OUTPUT_ROOT / f"{command}-{scenario.name}"
    return _Context(run, scenario, seed, out)


def _manifest(
    ctx: _Context,
    args: argparse.Namespace,
    command: str,
    inputs: Sequence[Path] = (),
) -> None:
    arguments = {
        key: value
        for key, value in sorted(vars(args).items())
        if key not in {"handler", "verbose", "quiet", "out", "config"}
    }
    manifest = RunManifest.build(
        command,
        seed=ctx.seed,
        output=ctx.out,
        arguments=arguments,
        preset=ctx.scenario.name,
        config_path=args.config,
        inputs=inputs,
    )
    manifest.write(ctx.out)
    logger.info("%s: outputs in %s", command, ctx.out)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", help="scenario preset (default: from config, else small)")
    parser.add_argument("--config", type=Path, help="run config file (.toml or .json)")
    parser.add_argument("--seed", type=int, help="master seed (default: from config)")
    parser.add_argument("--out", type=Path, help="output directory")


# =============================================================================
# generate
# =============================================================================


def cmd_generate(args: argparse.Namespace) -> int:
    ctx = _context(args, "generate")
    facility = build_facility(ctx.scenario)
    ctx.out.mkdir(parents=True, exist_ok=True)
    for day, orders in enumerate(sample_days(ctx.scenario, facility, ctx.seed, args.days)):
        write_day(
            ctx.out / f"day_{day:04d}.json",
            DayFile(scenario=ctx.scenario.name, day=day, seed=ctx.seed, orders=orders),
        )
    _manifest(ctx, args, "generate")
    return EXIT_OK


# =============================================================================
# train
# =============================================================================


def cmd_train(args: argparse.Namespace) -> int:
    ctx = _context(args, "train")
    config = ctx.run.train
    if args.iterations is not None:
        config = config.overlay({"lns_iterations": args.iterations})
    if args.checkpoint is not None:
        checkpoint = load_checkpoint(args.checkpoint)
        trainer = Trainer.resume(checkpoint, config)
        episodes = args.episodes if args.episodes is not None else config.fine_tune_episodes
    else:
        init_rng = np.random.default_rng(np.random.SeedSequence(ctx.seed).spawn(1)[0])
        trainer = Trainer.fresh(config, init_rng)
        episodes = args.episodes if args.episodes is not None else config.episodes

    lns = ctx.run.lns.overlay({"iterations": config.lns_iterations})
    curve = train_policy(ctx.scenario, trainer, episodes=episodes, seed=ctx.seed, lns=lns)
    ctx.out.mkdir(parents=True, exist_ok=True)
    save_checkpoint(
        ctx.out / "checkpoint.json",
        trainer.network,
        trainer.optimizer,
        {
            "preset": ctx.scenario.name,
            "episodes": len(curve),
            "seed": ctx.seed,
            "lns_iterations": config.lns_iterations,
            "fine_tuned_from": str(args.checkpoint) if args.checkpoint else None,
        },
    )
    write_curve(ctx.out / "curve.csv", curve)
    _manifest(ctx, args, "train", [args.checkpoint] if args.checkpoint else [])
    return EXIT_OK


# =============================================================================
# benchmark
# =============================================================================


def _parse_ai(spec: str) -> tuple[str, Path]:
    label, sep, path = spec.partition("=")
    if not sep or not label or not path:
        raise ConfigError(f"--ai expects LABEL=CHECKPOINT, got {spec!r}")
    return label, Path(path)


def _policies(args: argparse.Namespace, lns: LnsConfig) -> tuple[list[Policy], list[Path]]:
    names = [name.strip().lower() for name in args.policies.split(",") if name.strip()]
    variants = [_parse_ai(spec) for spec in args.ai or []]
    if args.checkpoint is not None:
        variants.insert(0, ("ai", args.checkpoint))
    policies: list[Policy] = []
    for name in names:
        match name:
            case "fifo":
                policies.append(Policy.fifo())
            case "integrated":
                policies.append(Policy.integrated(lns))
            case "ai":
                if not variants:
                    raise ConfigError("the ai policy needs --checkpoint or --ai LABEL=PATH")
            case other:
                raise ConfigError(f"unknown policy {other!r}")
    for label, path in variants:
        policies.append(Policy.ai(load_checkpoint(path).network, lns, label))
    labels = [policy.label for policy in policies]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"duplicate policy labels in {labels}")
    return policies, [path for _, path in variants]


def _load_days(directory: Path) -> tuple[list[list[Order]], list[Path]]:
    paths = sorted(directory.glob("day_*.json"))
    if not paths:
        raise ConfigError("no day files found", source=directory)
    return [sorted(read_day(path).orders, key=lambda o: o.t_order) for path in paths], paths


def _write_segments(path: Path, rows: Sequence[BenchmarkRow]) -> None:
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["policy", "segment", "avg_delay", "avg_late_delay"])
        for row in rows:
            mean = row.mean
            writer.writerow(
                [row.policy, "close", f"{mean.close_delay:.6f}", f"{mean.close_late_delay:.6f}"]
            )
            writer.writerow(
                [row.policy, "far", f"{mean.far_delay:.6f}", f"{mean.far_late_delay:.6f}"]
            )
            for food_type, delay in mean.delay_by_food_type.items():
                writer.writerow([row.policy, f"food_type_{food_type}", f"{delay:.6f}", ""])


def _write_diagnostics(
    out: Path,
    results: dict[str, list[EpisodeLog]],
    n_cooks: int,
    n_vehicles: int,
    max_iter: int,
) -> dict[str, ty.Any]:
    summary: dict[str, ty.Any] = {}
    with (out / "pdft_termination.csv").open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["policy", "backtracks", "cumulative_share"])
        for label, logs in results.items():
            profile = pdft_diagnostics(
                (outcome for log in logs for outcome in log.pdft), max_iter
            )
            for k, share in enumerate(profile.cumulative):
                writer.writerow([label, k, f"{share:.6f}"])
            summary[label] = {
                "calls": profile.calls,
                "by_verdict": {v.value: n for v, n in profile.by_verdict.items()},
                "within_0": profile.within(0),
                "within_5": profile.within(5),
                "cap_hits": profile.cap_hits,
            }
    utilization = out / "utilization.csv"
    utilization.unlink(missing_ok=True)
    for label, logs in results.items():
        for log in logs:
            series = utilization_series(log, n_cooks, n_vehicles)
            write_utilization_csv(utilization, log.day, label, series)
    return summary


def _print_table(rows: Sequence[BenchmarkRow]) -> None:
    improvements = improvement_table(rows)
    columns = ("avg_delay", "pct_late", "avg_late_delay", "max_delay", "avg_click_to_door")
    print(f"{'policy':<16}" + "".join(f"{c:>18}" for c in columns) + f"{'imp. over fifo':>16}")
    for row in rows:
        scalars = row.mean.scalars()
        gain = improvements.get(row.policy, {}).get("avg_delay")
        shown = "" if gain is None else f"{gain:.1f}%"
        print(
            f"{row.policy:<16}"
            + "".join(f"{scalars[c]:>18.2f}" for c in columns)
            + f"{shown:>16}"
        )


def cmd_benchmark(args: argparse.Namespace) -> int:
    ctx = _context(args, "benchmark")
    facility = build_facility(ctx.scenario)
    lns = ctx.run.lns
    if args.iterations is not None:
        lns = lns.overlay({"iterations": args.iterations})
    policies, checkpoints = _policies(args, lns)

    inputs: list[Path] = list(checkpoints)
    if args.instances is not None:
        days, paths = _load_days(args.instances)
        inputs.extend(paths)
        for orders in days:
            check_day(orders, facility)
    else:
        days = sample_days(ctx.scenario, facility, ctx.seed, args.days)

    results = asyncio.run(
        run_policies(days, policies, facility, seed=ctx.seed, jobs=args.jobs)
    )
    rows = [aggregate(label, logs) for label, logs in results.items()]

    ctx.out.mkdir(parents=True, exist_ok=True)
    write_benchmark_csv(ctx.out / "kpi.csv", ctx.scenario.name, rows)
    write_episode_log(
        ctx.out / "episodes.jsonl", [log for logs in results.values() for log in logs]
    )
    report: dict[str, ty.Any] = {
        "preset": ctx.scenario.name,
        "days": len(days),
        "policies": {
            row.policy: {
                **row.mean.scalars(),
                "global_max_delay": row.global_max_delay,
            }
            for row in rows
        },
        "improvement_over_fifo": improvement_table(rows),
    }
    if args.segment:
        _write_segments(ctx.out / "segments.csv", rows)
    if args.diagnostics:
        report["pdft"] = _write_diagnostics(
            ctx.out, results, facility.n_cooks, facility.n_vehicles, lns.pdft_max_iter
        )
    (ctx.out / "kpi.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    _print_table(rows)
    _manifest(ctx, args, "benchmark", inputs)
    return EXIT_OK


# =============================================================================
# validate
# =============================================================================


def cmd_validate(args: argparse.Namespace) -> int:
    if args.samples < 1:
        raise ConfigError(f"--samples must be positive, got {args.samples}")
    seed = args.seed if args.seed is not None else 0
    names = list(SUITES) if args.suite == "all" else [args.suite]
    reports: list[SuiteReport] = [
        run_suite(name, args.n, seed, samples=args.samples) for name in names
    ]
    for report in reports:
        status = "PASS" if report.passed else "FAIL"
        print(f"{report.name:<10} {status} {report.checked} checked, {len(report.failures)} failed")
        for failure in report.failures[:10]:
            print(f"    {failure}")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        payload = {
            report.name: {
                "checked": report.checked,
                "passed": report.passed,
                "failures": report.failures,
                "notes": report.notes,
            }
            for report in reports
        }
        (args.out / "validation.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n"
        )
    return EXIT_OK if all(report.passed for report in reports) else EXIT_FAILED


# =============================================================================
# Parser
# =============================================================================


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghostkitchen",
        description="Simulate and solve meal delivery from a ghost kitchen.",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    commands = parser.add_subparsers(dest="command", required=True)

    generate = commands.add_parser("generate", help="sample days of orders")
    _add_common(generate)
    generate.add_argument("--days", type=int, default=300)
    generate.set_defaults(handler=cmd_generate)

    train = commands.add_parser("train", help="train or fine-tune the value network")
    _add_common(train)
    train.add_argument("--episodes", type=int, help="simulated training days")
    train.add_argument("--iterations", type=int, help="LNS iterations per decision")
    train.add_argument("--checkpoint", type=Path, help="fine-tune from this checkpoint")
    train.set_defaults(handler=cmd_train)

    benchmark = commands.add_parser("benchmark", help="compare policies on the same days")
    _add_common(benchmark)
    source = benchmark.add_mutually_exclusive_group()
    source.add_argument("--instances", type=Path, help="directory of day files")
    source.add_argument("--days", type=int, default=50, help="days to sample")
    benchmark.add_argument("--policies", default="fifo,integrated")
    benchmark.add_argument("--checkpoint", type=Path, help="value network for the ai policy")
    benchmark.add_argument(
        "--ai", action="append", metavar="LABEL=PATH", help="named ai variant, repeatable"
    )
    benchmark.add_argument("--iterations", type=int, help="LNS iterations per decision")
    benchmark.add_argument("--jobs", type=int, default=1)
    benchmark.add_argument("--diagnostics", action="store_true")
    benchmark.add_argument("--segment", action="store_true")
    benchmark.set_defaults(handler=cmd_benchmark)

    validate = commands.add_parser("validate", help="run self-check suites")
    validate.add_argument(
        "--suite", choices=[*SUITES, *SUITE_ALIASES, "all"], default="all"
    )
    validate.add_argument("--n", type=int, default=100, help="instances per suite")
    validate.add_argument(
        "--samples",
        type=int,
        default=WITNESS_SAMPLES,
        help="original decisions sampled per instance by the condensed suite",
    )
    validate.add_argument("--seed", type=int)
    validate.add_argument("--out", type=Path)
    validate.set_defaults(handler=cmd_validate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)
    try:
        return args.handler(args)
    except (ConfigError, CheckpointError) as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG
    except GhostKitchenError as exc:
        logger.error("%s", exc)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
