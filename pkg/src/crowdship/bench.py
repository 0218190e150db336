"""Benchmark library generation, gap metrics and sensitivity tables.

Random numbers come from numpy's PCG64 bit generator seeded through
``SeedSequence([master_seed, base_index])`` for locations and loads and
``SeedSequence([master_seed, base_index, pattern_index])`` for class
assignments, so a library is reproducible from its master seed alone.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from .model import DepotSpec, DriverSpec, Instance, Point, Solution, TaskSpec, format_real
from .orchestrator import RunReport
from .probability import BehaviorCoefficients

__all__ = [
    "CLASS_COEFFICIENTS",
    "PATTERNS",
    "GeneratorConfig",
    "InstanceKey",
    "instance_name",
    "parse_instance_name",
    "generate_base",
    "generate_library",
    "generate_slice",
    "MetricsRow",
    "Reference",
    "compute_gaps",
    "best_known",
    "SensitivityRow",
    "sensitivity_summary",
    "write_metrics_table",
    "write_sensitivity_table",
]

# (alpha, detour, size, compensation) of the three behavioural classes
CLASS_COEFFICIENTS: dict[int, BehaviorCoefficients] = {
    1: BehaviorCoefficients(-5.0, -3.0, -4.0, 2.5),
    2: BehaviorCoefficients(-4.5, -2.5, -3.5, 2.0),
    3: BehaviorCoefficients(-4.0, -2.0, -3.0, 1.5),
}

PATTERNS = ("c1", "c2", "c3", "m1", "m2", "m3", "m4", "m5")


@dataclass(frozen=True, slots=True)
class GeneratorConfig:
    n_full_instances: int = 10
    full_tasks: int = 120
    full_drivers: int = 60
    task_sizes: tuple[int, ...] = (30, 60, 90, 120)
    driver_ratios: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5)
    region_half_width: float = 5.0
    load_range: tuple[int, int] = (10, 30)
    capacity: float = 100.0
    outsource_cost: float = 4.95
    class_coefficients: tuple[BehaviorCoefficients, ...] = (
        CLASS_COEFFICIENTS[1], CLASS_COEFFICIENTS[2], CLASS_COEFFICIENTS[3],
    )
    patterns: tuple[str, ...] = PATTERNS
    master_seed: int = 0

    def __post_init__(self) -> None:
        if len(self.class_coefficients) != 3:
            raise ValueError("three behavioural classes are required")
        if len(self.patterns) != 8:
            raise ValueError("eight class patterns are required")
        for p in self.patterns:
            if not re.fullmatch(r"c[123]|m\d+", p):
                raise ValueError(f"bad pattern name {p!r}")
        if max(self.task_sizes) > self.full_tasks:
            raise ValueError("task size exceeds the full-scale task count")
        lo, hi = self.load_range
        if not 0 < lo <= hi:
            raise ValueError("bad load range")
        for m in self.task_sizes:
            for p in self.driver_ratios:
                n = driver_count(m, p)
                if abs(n - p * m) > 1e-9:
                    raise ValueError(f"p*|M| is not integral for |M|={m}, p={p}")
                if n > self.full_drivers:
                    raise ValueError("driver count exceeds the full-scale driver count")


def driver_count(tasks: int, ratio: float) -> int:
    return int(round(ratio * tasks))


@dataclass(frozen=True, slots=True, order=True)
class InstanceKey:
    base: int
    pattern: str
    tasks: int
    ratio: float


def instance_name(base: int, pattern: str, tasks: int, ratio: float) -> str:
    return f"{base:02d}_{pattern}_{tasks}_{ratio:.1f}"


_NAME_RE = re.compile(r"(\d+)_([a-z]\d+)_(\d+)_(\d+(?:\.\d+)?)")


def parse_instance_name(name: str) -> InstanceKey:
    m = _NAME_RE.fullmatch(name)
    if m is None:
        raise ValueError(f"not a library instance name: {name!r}")
    return InstanceKey(int(m.group(1)), m.group(2), int(m.group(3)), float(m.group(4)))


def _rng(*keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(keys))))


@dataclass(frozen=True, slots=True)
class _Base:
    tasks: tuple[TaskSpec, ...]
    destinations: tuple[Point, ...]


def generate_base(config: GeneratorConfig, base: int) -> _Base:
    rng = _rng(config.master_seed, base)
    h = config.region_half_width
    xy = rng.uniform(-h, h, size=(config.full_tasks, 2))
    lo, hi = config.load_range
    loads = rng.integers(lo, hi, endpoint=True, size=config.full_tasks)
    dest = rng.uniform(-h, h, size=(config.full_drivers, 2))
    tasks = tuple(
        TaskSpec(i, Point(float(x), float(y)), float(q), config.outsource_cost)
        for i, ((x, y), q) in enumerate(zip(xy, loads))
    )
    return _Base(tasks, tuple(Point(float(x), float(y)) for x, y in dest))


def class_assignment(config: GeneratorConfig, base: int, pattern_index: int) -> list[int]:
    """Class tag per full-scale driver.

    Mixed patterns shuffle consecutive blocks of three drivers, each block a
    permutation of the classes, so every prefix whose length is a multiple
    of three holds the same number of drivers of each class.
    """
    pattern = config.patterns[pattern_index]
    n = config.full_drivers
    if pattern.startswith("c"):
        return [int(pattern[1])] * n
    rng = _rng(config.master_seed, base, pattern_index)
    out: list[int] = []
    while len(out) < n:
        out.extend(int(c) + 1 for c in rng.permutation(3))
    return out[:n]


def _build(config: GeneratorConfig, base_idx: int, data: _Base, pattern: str,
           classes: list[int], tasks: int, ratio: float) -> Instance:
    depot_loc = Point(0.0, 0.0)
    ts = data.tasks[:tasks]
    n = driver_count(tasks, ratio)
    drivers = tuple(
        DriverSpec(
            k, depot_loc, data.destinations[k], config.capacity,
            config.class_coefficients[classes[k] - 1], classes[k],
        )
        for k in range(n)
    )
    depot = DepotSpec(0, depot_loc, frozenset(t.id for t in ts))
    return Instance(ts, (depot,), drivers, instance_name(base_idx + 1, pattern, tasks, ratio),
                    config.master_seed)


def generate_slice(
    config: GeneratorConfig,
    tasks: Iterable[int] | None = None,
    ratios: Iterable[float] | None = None,
    patterns: Iterable[str] | None = None,
    bases: Iterable[int] | None = None,
) -> list[Instance]:
    """Library instances restricted to the given sizes, ratios, patterns and bases.

    ``bases`` are zero-based indices of the full-scale instances.
    """
    sizes = tuple(tasks) if tasks is not None else config.task_sizes
    rs = tuple(ratios) if ratios is not None else config.driver_ratios
    pats = tuple(patterns) if patterns is not None else config.patterns
    bs = tuple(bases) if bases is not None else tuple(range(config.n_full_instances))
    for p in pats:
        if p not in config.patterns:
            raise ValueError(f"unknown pattern {p!r}")
    out: list[Instance] = []
    for b in bs:
        data = generate_base(config, b)
        for pi, pattern in enumerate(config.patterns):
            if pattern not in pats:
                continue
            classes = class_assignment(config, b, pi)
            for m in sizes:
                for r in rs:
                    out.append(_build(config, b, data, pattern, classes, m, r))
    return out


def generate_library(config: GeneratorConfig | None = None) -> list[Instance]:
    """All full-scale instances crossed with every pattern, size and ratio."""
    return generate_slice(config or GeneratorConfig())


# -- metrics ---------------------------------------------------------------


@dataclass(slots=True)
class MetricsRow:
    instance: str
    variant: str
    objective: float
    upper_bound: float | None
    gap_h: float | None
    gap_opt: float | None
    gap_bk: float | None
    mean_acceptance: float | None
    mean_compensation: float | None
    mean_bundle_size: float | None
    mean_detour: float | None
    wall_time: float
    status: str = ""
    note: str = ""


@dataclass(frozen=True, slots=True)
class Reference:
    """Reference objectives of one instance: proven optimum and best known."""

    optimal: float | None = None
    best_known: float | None = None


def _rel_gap(ref: float | None, value: float) -> tuple[float | None, str]:
    if ref is None:
        return None, ""
    if ref == 0:
        return None, "reference objective is 0"
    return (ref - value) / ref, ""


def _offer_means(sol: Solution) -> tuple[float | None, ...]:
    offers = sol.offers
    if not offers:
        return None, None, None, None
    k = len(offers)
    return (
        math.fsum(o.acceptance_probability for o in offers) / k,
        math.fsum(o.compensation for o in offers) / k,
        math.fsum(len(o.bundle) for o in offers) / k,
        math.fsum(o.detour for o in offers) / k,
    )


def compute_gaps(
    reports: Sequence[RunReport], reference_objectives: Mapping[str, Reference] | None = None
) -> list[MetricsRow]:
    """One metrics row per report with heuristic, optimality and best-known gaps."""
    refs = reference_objectives or {}
    rows = []
    for r in reports:
        ref = refs.get(r.instance_name, Reference())
        lb = r.solution.objective
        gap_h = None
        notes = []
        if r.upper_bound is not None:
            gap_h, note = _rel_gap(r.upper_bound, lb)
            if note:
                notes.append("gap_h: upper bound is 0")
        gap_opt, note = _rel_gap(ref.optimal, lb)
        if note:
            notes.append("gap_opt: " + note)
        gap_bk, note = _rel_gap(ref.best_known, lb)
        if note:
            notes.append("gap_bk: " + note)
        rows.append(MetricsRow(r.instance_name, r.variant, lb, r.upper_bound, gap_h, gap_opt, gap_bk,
                               *_offer_means(r.solution), r.wall_time_seconds, r.status, "; ".join(notes)))
    return rows


def best_known(reports: Iterable[RunReport]) -> dict[str, Reference]:
    """Reference objectives per instance from a set of runs.

    A run with status ``optimal`` gives the optimum; the best known value is
    the optimum when there is one and the largest objective otherwise.
    """
    by: dict[str, list[RunReport]] = {}
    for r in reports:
        by.setdefault(r.instance_name, []).append(r)
    out = {}
    for name, rs in by.items():
        opt = [r.solution.objective for r in rs if r.status == "optimal"]
        optimal = max(opt) if opt else None
        bk = optimal if optimal is not None else max(r.solution.objective for r in rs)
        out[name] = Reference(optimal, bk)
    return out


# -- sensitivity -----------------------------------------------------------

GROUP_KEYS = ("class", "tasks", "ratio", "pattern")


@dataclass(slots=True)
class SensitivityRow:
    group: tuple
    offers: int
    mean_acceptance: float
    mean_compensation: float
    mean_bundle_size: float
    mean_detour: float


def _group_value(key: str, inst: Instance, driver_id: int):
    if key == "class":
        return inst.driver_by_id[driver_id].class_tag
    meta = parse_instance_name(inst.name)
    if key == "tasks":
        return meta.tasks
    if key == "ratio":
        return meta.ratio
    if key == "pattern":
        return meta.pattern
    raise ValueError(f"unknown group key {key!r}; choose from {GROUP_KEYS}")


def sensitivity_summary(
    solutions: Sequence[Solution], instances: Sequence[Instance], group_by: Sequence[str] | str
) -> list[SensitivityRow]:
    """Per-offer means of the offer attributes, grouped as requested."""
    keys = (group_by,) if isinstance(group_by, str) else tuple(group_by)
    for k in keys:
        if k not in GROUP_KEYS:
            raise ValueError(f"unknown group key {k!r}; choose from {GROUP_KEYS}")
    if len(solutions) != len(instances):
        raise ValueError("solutions and instances differ in length")
    acc: dict[tuple, list] = {}
    for sol, inst in zip(solutions, instances):
        for o in sol.offers:
            g = tuple(_group_value(k, inst, o.driver_id) for k in keys)
            acc.setdefault(g, []).append(o)
    rows = []
    for g in sorted(acc, key=lambda t: tuple((v is None, v) for v in t)):
        offers = acc[g]
        k = len(offers)
        rows.append(SensitivityRow(
            g, k,
            math.fsum(o.acceptance_probability for o in offers) / k,
            math.fsum(o.compensation for o in offers) / k,
            math.fsum(len(o.bundle) for o in offers) / k,
            math.fsum(o.detour for o in offers) / k,
        ))
    return rows


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format_real(v)
    return str(v)


def write_metrics_table(rows: Sequence[MetricsRow], out: TextIO) -> None:
    """Tab-separated table with one header line."""
    names = [f.name for f in fields(MetricsRow)]
    out.write("\t".join(names) + "\n")
    for r in rows:
        out.write("\t".join(_cell(getattr(r, n)) for n in names) + "\n")


def write_sensitivity_table(rows: Sequence[SensitivityRow], group_by: Sequence[str], out: TextIO) -> None:
    cols = list(group_by) + ["offers", "mean_acceptance", "mean_compensation", "mean_bundle_size", "mean_detour"]
    out.write("\t".join(cols) + "\n")
    for r in rows:
        vals = list(r.group) + [r.offers, r.mean_acceptance, r.mean_compensation,
                                r.mean_bundle_size, r.mean_detour]
        out.write("\t".join(_cell(v) for v in vals) + "\n")
