"""Command-line front end: generate, solve, gaps, sensitivity and oracle."""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

from .bench import (
    GROUP_KEYS,
    GeneratorConfig,
    best_known,
    compute_gaps,
    generate_library,
    sensitivity_summary,
    write_metrics_table,
    write_sensitivity_table,
)
from .model import (
    InstanceFormatError,
    format_real,
    load_instance,
    load_solution,
    save_instance,
    save_solution,
)
from .oracle import exhaustive_optimum
from .orchestrator import (
    VARIANTS,
    VariantConfig,
    format_report,
    report_from_json,
    report_to_json,
    run_variant,
)

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_TIME_LIMIT = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors through an exception."""

    def error(self, message: str):
        raise _UsageError(f"{self.prog}: error: {message}")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_pair(text: str) -> tuple[int, int]:
    vals = _int_list(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated integers, got {text!r}")
    return vals[0], vals[1]


def _variant(text: str) -> str:
    key = text.upper()
    if key not in VARIANTS:
        raise argparse.ArgumentTypeError(
            f"unknown variant {text!r}; choose from {', '.join(v.lower() for v in VARIANTS)}"
        )
    return key


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="crowdship", description="Crowdshipping offer optimisation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write the benchmark instance library")
    g.add_argument("--out-dir", required=True)
    g.add_argument("--master-seed", type=int, default=0)
    g.add_argument("--n-full-instances", type=int, default=10)
    g.add_argument("--full-tasks", type=int, default=120)
    g.add_argument("--full-drivers", type=int, default=60)
    g.add_argument("--task-sizes", type=_int_list, default=(30, 60, 90, 120))
    g.add_argument("--driver-ratios", type=_float_list, default=(0.1, 0.2, 0.3, 0.4, 0.5))
    g.add_argument("--region-half-width", type=float, default=5.0)
    g.add_argument("--load-range", type=_int_pair, default=(10, 30))
    g.add_argument("--capacity", type=float, default=100.0)
    g.add_argument("--outsource-cost", type=float, default=4.95)

    s = sub.add_parser("solve", help="run one algorithm variant on an instance")
    s.add_argument("--variant", type=_variant, required=True)
    s.add_argument("--instance", required=True)
    s.add_argument("--out", required=True, help="solution file")
    s.add_argument("--report", help="key-value report file")
    s.add_argument("--json", help="JSON report file (includes wall time)")
    s.add_argument("--time-limit", type=float, default=None)
    s.add_argument("--theta", type=float, default=36.0)
    s.add_argument("--col-limit", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--pool-cap", type=int, default=None)
    s.add_argument("--with-timing", action="store_true", help="add wall time to the report")

    m = sub.add_parser("gaps", help="metrics table from JSON run reports")
    m.add_argument("reports", nargs="+", help="JSON reports written by solve --json")
    m.add_argument("--out", help="output table (default: stdout)")

    t = sub.add_parser("sensitivity", help="offer means grouped by class, size, ratio or pattern")
    t.add_argument("--instance", nargs="+", required=True)
    t.add_argument("--solution", nargs="+", required=True)
    t.add_argument("--group-by", default="class",
                   help=f"comma-separated keys from {', '.join(GROUP_KEYS)}")
    t.add_argument("--out", help="output table (default: stdout)")

    o = sub.add_parser("oracle", help="exhaustive optimum of a tiny instance")
    o.add_argument("--instance", required=True)
    o.add_argument("--out", help="solution file")
    return p


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _cmd_generate(a: argparse.Namespace) -> int:
    config = GeneratorConfig(
        n_full_instances=a.n_full_instances,
        full_tasks=a.full_tasks,
        full_drivers=a.full_drivers,
        task_sizes=a.task_sizes,
        driver_ratios=a.driver_ratios,
        region_half_width=a.region_half_width,
        load_range=a.load_range,
        capacity=a.capacity,
        outsource_cost=a.outsource_cost,
        master_seed=a.master_seed,
    )
    os.makedirs(a.out_dir, exist_ok=True)
    instances = generate_library(config)
    for inst in instances:
        save_instance(inst, os.path.join(a.out_dir, f"{inst.name}.txt"))
    print(f"wrote {len(instances)} instances to {a.out_dir}")
    return EXIT_OK


def _cmd_solve(a: argparse.Namespace) -> int:
    instance = load_instance(a.instance)
    config = VariantConfig.for_variant(
        a.variant,
        theta_degrees=a.theta,
        column_limit=a.col_limit,
        time_limit_seconds=a.time_limit,
        rng_seed=a.seed,
        workers=a.workers,
        pool_cap=a.pool_cap,
    )
    report = run_variant(instance, config)
    save_solution(report.solution, a.out)
    if a.report:
        _write_text(a.report, format_report(report, with_timing=a.with_timing))
    if a.json:
        _write_text(a.json, report_to_json(report))
    print(f"{report.instance_name} {report.variant} {report.status} objective "
          f"{format_real(report.solution.objective)}")
    return EXIT_TIME_LIMIT if report.status == "time_limit" else EXIT_OK


def _cmd_gaps(a: argparse.Namespace) -> int:
    reports = []
    for path in a.reports:
        with open(path, encoding="utf-8") as fh:
            reports.append(report_from_json(fh.read()))
    rows = compute_gaps(reports, best_known(reports))
    if a.out is None:
        write_metrics_table(rows, sys.stdout)
    else:
        with open(a.out, "w", encoding="utf-8", newline="\n") as fh:
            write_metrics_table(rows, fh)
    return EXIT_OK


def _cmd_sensitivity(a: argparse.Namespace) -> int:
    if len(a.instance) != len(a.solution):
        raise _UsageError("crowdship sensitivity: error: --instance and --solution need the same count")
    keys = tuple(k for k in a.group_by.split(",") if k)
    bad = [k for k in keys if k not in GROUP_KEYS]
    if bad or not keys:
        raise _UsageError(f"crowdship sensitivity: error: bad --group-by {a.group_by!r}")
    instances = [load_instance(p) for p in a.instance]
    solutions = [load_solution(p) for p in a.solution]
    rows = sensitivity_summary(solutions, instances, keys)
    if a.out is None:
        write_sensitivity_table(rows, keys, sys.stdout)
    else:
        with open(a.out, "w", encoding="utf-8", newline="\n") as fh:
            write_sensitivity_table(rows, keys, fh)
    return EXIT_OK


def _cmd_oracle(a: argparse.Namespace) -> int:
    instance = load_instance(a.instance)
    sol = exhaustive_optimum(instance)
    if a.out:
        save_solution(sol, a.out)
    print(format_real(sol.objective))
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "solve": _cmd_solve,
    "gaps": _cmd_gaps,
    "sensitivity": _cmd_sensitivity,
    "oracle": _cmd_oracle,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (OSError, InstanceFormatError, ValueError, KeyError) as exc:
        print(f"crowdship: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
