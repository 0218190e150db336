"""Domain types, validation and the text file formats for instances and solutions."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

from .probability import BehaviorCoefficients, acceptance_probability

__all__ = [
    "Point",
    "TaskSpec",
    "DepotSpec",
    "DriverSpec",
    "Instance",
    "Bundle",
    "Offer",
    "Solution",
    "InstanceFormatError",
    "InstanceValidationError",
    "load_instance",
    "save_instance",
    "dump_instance",
    "parse_instance",
    "load_solution",
    "save_solution",
    "dump_solution",
    "parse_solution",
    "validate_solution",
    "format_real",
]

INSTANCE_HEADER = "CROWDSHIP-INSTANCE v1"
SOLUTION_HEADER = "CROWDSHIP-SOLUTION v1"
SOLUTION_STATUSES = ("optimal", "heuristic", "time_limit")


class InstanceFormatError(ValueError):
    """Malformed instance or solution text."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)
        self.line = line


class InstanceValidationError(ValueError):
    """An instance violates one of its structural invariants."""


def format_real(x: float) -> str:
    # 17 significant digits round-trip every double exactly
    return format(float(x), ".17g")


@dataclass(frozen=True, slots=True)
class Point:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("point coordinates must be finite")


@dataclass(frozen=True, slots=True)
class TaskSpec:
    id: int
    location: Point
    load: float
    outsource_cost: float

    def __post_init__(self) -> None:
        if self.id < 0:
            raise ValueError("task id must be >= 0")
        if not self.load > 0:
            raise ValueError(f"task {self.id}: load must be > 0")
        if not self.outsource_cost > 0:
            raise ValueError(f"task {self.id}: outsource_cost must be > 0")


@dataclass(frozen=True, slots=True)
class DepotSpec:
    id: int
    location: Point
    servable_tasks: frozenset[int]

    def __post_init__(self) -> None:
        if self.id < 0:
            raise ValueError("depot id must be >= 0")
        object.__setattr__(self, "servable_tasks", frozenset(self.servable_tasks))


@dataclass(frozen=True, slots=True)
class DriverSpec:
    id: int
    origin: Point
    destination: Point
    capacity: float
    behavior: BehaviorCoefficients
    class_tag: int | None = None

    def __post_init__(self) -> None:
        if self.id < 0:
            raise ValueError("driver id must be >= 0")
        if not self.capacity > 0:
            raise ValueError(f"driver {self.id}: capacity must be > 0")
        if self.class_tag is not None and self.class_tag not in (1, 2, 3):
            raise ValueError(f"driver {self.id}: class_tag must be 1, 2 or 3")


@dataclass(frozen=True)
class Instance:
    """Immutable problem description.

    Safe to share between workers; the lookup tables below are derived
    lazily and never change afterwards.
    """

    tasks: tuple[TaskSpec, ...]
    depots: tuple[DepotSpec, ...]
    drivers: tuple[DriverSpec, ...]
    name: str = "unnamed"
    seed: int | None = None
    # optional code-supplied update rules for bundle predictors beyond
    # detour and size; see geometry.ExtraPredictors
    extra_predictors: object | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "tasks", tuple(self.tasks))
        object.__setattr__(self, "depots", tuple(self.depots))
        object.__setattr__(self, "drivers", tuple(self.drivers))
        for label, items in (("task", self.tasks), ("depot", self.depots), ("driver", self.drivers)):
            ids = [it.id for it in items]
            if len(set(ids)) != len(ids):
                dup = sorted({i for i in ids if ids.count(i) > 1})
                raise InstanceValidationError(f"duplicate {label} ids: {dup}")
        if any(c.isspace() for c in self.name) or not self.name:
            raise InstanceValidationError("instance name must be a non-empty token without whitespace")
        task_ids = {t.id for t in self.tasks}
        covered: set[int] = set()
        for d in self.depots:
            unknown = d.servable_tasks - task_ids
            if unknown:
                raise InstanceValidationError(
                    f"depot {d.id} references unknown task ids {sorted(unknown)}"
                )
            covered |= d.servable_tasks
        missing = task_ids - covered
        if missing:
            raise InstanceValidationError(f"tasks not servable from any depot: {sorted(missing)}")

    def __getstate__(self):
        keys = ("tasks", "depots", "drivers", "name", "seed", "extra_predictors")
        return {k: self.__dict__[k] for k in keys}

    def __setstate__(self, state) -> None:
        self.__dict__.update(state)

    @cached_property
    def task_by_id(self) -> dict[int, TaskSpec]:
        return {t.id: t for t in self.tasks}

    @cached_property
    def depot_by_id(self) -> dict[int, DepotSpec]:
        return {d.id: d for d in self.depots}

    @cached_property
    def driver_by_id(self) -> dict[int, DriverSpec]:
        return {w.id: w for w in self.drivers}

    @cached_property
    def task_index(self) -> dict[int, int]:
        """Task id -> position in :attr:`tasks`."""
        return {t.id: i for i, t in enumerate(self.tasks)}


@dataclass(frozen=True, slots=True)
class Bundle:
    depot_id: int
    task_order: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "task_order", tuple(self.task_order))
        if not self.task_order:
            raise ValueError("a bundle holds at least one task")
        if len(set(self.task_order)) != len(self.task_order):
            raise ValueError(f"bundle repeats a task: {self.task_order}")

    def __len__(self) -> int:
        return len(self.task_order)


@dataclass(frozen=True, slots=True)
class Offer:
    driver_id: int
    bundle: Bundle
    compensation: float
    acceptance_probability: float
    expected_savings: float
    detour: float


@dataclass(frozen=True, slots=True)
class Solution:
    offers: tuple[Offer, ...] = ()
    objective: float = 0.0
    bound: float | None = None
    status: str = "heuristic"

    def __post_init__(self) -> None:
        object.__setattr__(self, "offers", tuple(self.offers))
        if self.status not in SOLUTION_STATUSES:
            raise ValueError(f"unknown solution status {self.status!r}")

    @classmethod
    def from_offers(
        cls, offers: Iterable[Offer], bound: float | None = None, status: str = "heuristic"
    ) -> Solution:
        offers = tuple(sorted(offers, key=lambda o: o.driver_id))
        return cls(offers, math.fsum(o.expected_savings for o in offers), bound, status)


# -- instance file ---------------------------------------------------------


def _csv(values: Sequence[float]) -> str:
    return ",".join(format_real(v) for v in values)


def dump_instance(instance: Instance) -> str:
    all_ids = frozenset(t.id for t in instance.tasks)
    lines = [
        INSTANCE_HEADER,
        f"NAME {instance.name}",
        f"SEED {'none' if instance.seed is None else instance.seed}",
        f"DEPOTS {len(instance.depots)}",
    ]
    for d in instance.depots:
        serv = "ALL" if d.servable_tasks == all_ids else ",".join(map(str, sorted(d.servable_tasks)))
        if not serv:
            serv = "-"
        lines.append(f"{d.id} {format_real(d.location.x)} {format_real(d.location.y)} {serv}")
    lines.append(f"TASKS {len(instance.tasks)}")
    for t in instance.tasks:
        lines.append(
            f"{t.id} {format_real(t.location.x)} {format_real(t.location.y)} "
            f"{format_real(t.load)} {format_real(t.outsource_cost)}"
        )
    lines.append(f"DRIVERS {len(instance.drivers)}")
    for w in instance.drivers:
        b = w.behavior
        parts = [
            str(w.id),
            format_real(w.origin.x),
            format_real(w.origin.y),
            format_real(w.destination.x),
            format_real(w.destination.y),
            format_real(w.capacity),
            format_real(b.intercept),
            format_real(b.detour_coeff),
            format_real(b.size_coeff),
            format_real(b.compensation_coeff),
        ]
        extras = []
        if b.extra_bundle_coeffs:
            extras.append("extra=" + _csv(b.extra_bundle_coeffs))
        if b.driver_coeffs:
            extras.append("dcoef=" + _csv(b.driver_coeffs))
            extras.append("dval=" + _csv(b.driver_values))
        if w.class_tag is not None:
            parts.append(str(w.class_tag))
        elif extras:
            parts.append("-")
        parts.extend(extras)
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def save_instance(instance: Instance, path: str | os.PathLike) -> None:
    Path(path).write_text(dump_instance(instance), encoding="utf-8")


class _Lines:
    def __init__(self, text: str, source: str | None):
        self.rows = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines())]
        self.rows = [(i, ln) for i, ln in self.rows if ln and not ln.startswith("#")]
        self.pos = 0
        self.source = source

    def error(self, msg: str, line: int | None = None) -> InstanceFormatError:
        if line is None:
            line = self.rows[self.pos - 1][0] if 0 < self.pos <= len(self.rows) else None
        return InstanceFormatError(msg, line, self.source)

    def next(self, what: str) -> tuple[int, str]:
        if self.pos >= len(self.rows):
            raise InstanceFormatError(f"unexpected end of file, expected {what}", None, self.source)
        row = self.rows[self.pos]
        self.pos += 1
        return row

    def keyword(self, key: str) -> str:
        lineno, ln = self.next(key)
        head, _, rest = ln.partition(" ")
        if head != key:
            raise self.error(f"expected '{key}', found '{head}'", lineno)
        return rest.strip()

    def count(self, key: str) -> int:
        rest = self.keyword(key)
        try:
            n = int(rest)
        except ValueError:
            raise self.error(f"{key}: count must be an integer, got {rest!r}") from None
        if n < 0:
            raise self.error(f"{key}: negative count")
        return n

    def done(self) -> None:
        if self.pos < len(self.rows):
            lineno, ln = self.rows[self.pos]
            raise self.error(f"unexpected trailing content {ln!r}", lineno)


def _num(tok: str, field_name: str, lines: _Lines, lineno: int, kind=float):
    try:
        v = kind(tok)
    except ValueError:
        raise lines.error(f"field '{field_name}': cannot parse {tok!r}", lineno) from None
    if kind is float and not math.isfinite(v):
        raise lines.error(f"field '{field_name}': value must be finite", lineno)
    return v


def _csv_floats(tok: str, field_name: str, lines: _Lines, lineno: int) -> tuple[float, ...]:
    if not tok:
        return ()
    return tuple(_num(v, field_name, lines, lineno) for v in tok.split(","))


def parse_instance(text: str, source: str | None = None) -> Instance:
    lines = _Lines(text, source)
    lineno, head = lines.next("header")
    if head != INSTANCE_HEADER:
        raise lines.error(f"bad header {head!r}, expected {INSTANCE_HEADER!r}", lineno)
    name = lines.keyword("NAME")
    seed_tok = lines.keyword("SEED")
    if seed_tok == "none":
        seed = None
    else:
        try:
            seed = int(seed_tok)
        except ValueError:
            raise lines.error(f"SEED must be an integer or 'none', got {seed_tok!r}") from None

    raw_depots = []
    for _ in range(lines.count("DEPOTS")):
        lineno, ln = lines.next("depot line")
        toks = ln.split()
        if len(toks) != 4:
            raise lines.error(f"depot line needs 4 fields, got {len(toks)}", lineno)
        did = _num(toks[0], "depot id", lines, lineno, int)
        loc = (_num(toks[1], "x", lines, lineno), _num(toks[2], "y", lines, lineno))
        raw_depots.append((lineno, did, loc, toks[3]))

    tasks = []
    for _ in range(lines.count("TASKS")):
        lineno, ln = lines.next("task line")
        toks = ln.split()
        if len(toks) != 5:
            raise lines.error(f"task line needs 5 fields, got {len(toks)}", lineno)
        try:
            tasks.append(
                TaskSpec(
                    _num(toks[0], "task id", lines, lineno, int),
                    Point(_num(toks[1], "x", lines, lineno), _num(toks[2], "y", lines, lineno)),
                    _num(toks[3], "load", lines, lineno),
                    _num(toks[4], "cost", lines, lineno),
                )
            )
        except InstanceFormatError:
            raise
        except ValueError as exc:
            raise lines.error(str(exc), lineno) from None

    all_ids = frozenset(t.id for t in tasks)
    depots = []
    for lineno, did, (x, y), serv in raw_depots:
        if serv == "ALL":
            ids = all_ids
        elif serv == "-":
            ids = frozenset()
        else:
            ids = frozenset(_num(s, "servable task id", lines, lineno, int) for s in serv.split(","))
        try:
            depots.append(DepotSpec(did, Point(x, y), ids))
        except ValueError as exc:
            raise lines.error(str(exc), lineno) from None

    drivers = []
    for _ in range(lines.count("DRIVERS")):
        lineno, ln = lines.next("driver line")
        toks = ln.split()
        if len(toks) < 10:
            raise lines.error(f"driver line needs at least 10 fields, got {len(toks)}", lineno)
        f = [_num(t, n, lines, lineno) for t, n in zip(
            toks[1:10],
            ("sx", "sy", "ex", "ey", "capacity", "alpha", "beta1", "beta2", "gamma"),
        )]
        tag = None
        rest = toks[10:]
        if rest and "=" not in rest[0]:
            tag = None if rest[0] == "-" else _num(rest[0], "class_tag", lines, lineno, int)
            rest = rest[1:]
        opts: dict[str, tuple[float, ...]] = {}
        for tok in rest:
            key, eq, val = tok.partition("=")
            if not eq or key not in ("extra", "dcoef", "dval") or key in opts:
                raise lines.error(f"unexpected driver field {tok!r}", lineno)
            opts[key] = _csv_floats(val, key, lines, lineno)
        try:
            behavior = BehaviorCoefficients(
                f[5], f[6], f[7], f[8],
                opts.get("extra", ()), opts.get("dcoef", ()), opts.get("dval", ()),
            )
            drivers.append(
                DriverSpec(
                    _num(toks[0], "driver id", lines, lineno, int),
                    Point(f[0], f[1]), Point(f[2], f[3]), f[4], behavior, tag,
                )
            )
        except ValueError as exc:
            raise lines.error(str(exc), lineno) from None
    lines.done()
    try:
        return Instance(tuple(tasks), tuple(depots), tuple(drivers), name, seed)
    except InstanceValidationError as exc:
        raise InstanceValidationError(f"{source + ': ' if source else ''}{exc}") from None


def load_instance(path: str | os.PathLike) -> Instance:
    p = Path(path)
    return parse_instance(p.read_text(encoding="utf-8"), str(p))


# -- solution file ---------------------------------------------------------


def dump_solution(solution: Solution) -> str:
    lines = [
        SOLUTION_HEADER,
        f"OBJECTIVE {format_real(solution.objective)}",
        f"BOUND {'none' if solution.bound is None else format_real(solution.bound)}",
        f"STATUS {solution.status}",
    ]
    for o in solution.offers:
        lines.append(
            " ".join(
                [
                    str(o.driver_id),
                    str(o.bundle.depot_id),
                    ",".join(map(str, o.bundle.task_order)),
                    format_real(o.compensation),
                    format_real(o.acceptance_probability),
                    format_real(o.expected_savings),
                    format_real(o.detour),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def save_solution(solution: Solution, path: str | os.PathLike) -> None:
    Path(path).write_text(dump_solution(solution), encoding="utf-8")


def parse_solution(text: str, source: str | None = None) -> Solution:
    lines = _Lines(text, source)
    lineno, head = lines.next("header")
    if head != SOLUTION_HEADER:
        raise lines.error(f"bad header {head!r}, expected {SOLUTION_HEADER!r}", lineno)
    obj_tok = lines.keyword("OBJECTIVE")
    objective = _num(obj_tok, "objective", lines, lines.rows[lines.pos - 1][0])
    bound_tok = lines.keyword("BOUND")
    bound = None if bound_tok == "none" else _num(bound_tok, "bound", lines, lines.rows[lines.pos - 1][0])
    status = lines.keyword("STATUS")
    if status not in SOLUTION_STATUSES:
        raise lines.error(f"unknown status {status!r}")
    offers = []
    while lines.pos < len(lines.rows):
        lineno, ln = lines.next("offer line")
        toks = ln.split()
        if len(toks) != 7:
            raise lines.error(f"offer line needs 7 fields, got {len(toks)}", lineno)
        try:
            bundle = Bundle(
                _num(toks[1], "depot id", lines, lineno, int),
                tuple(_num(t, "task id", lines, lineno, int) for t in toks[2].split(",")),
            )
        except ValueError as exc:
            if isinstance(exc, InstanceFormatError):
                raise
            raise lines.error(str(exc), lineno) from None
        offers.append(
            Offer(
                _num(toks[0], "driver id", lines, lineno, int),
                bundle,
                _num(toks[3], "compensation", lines, lineno),
                _num(toks[4], "acceptance_prob", lines, lineno),
                _num(toks[5], "expected_savings", lines, lineno),
                _num(toks[6], "detour", lines, lineno),
            )
        )
    return Solution(tuple(offers), objective, bound, status)


def load_solution(path: str | os.PathLike) -> Solution:
    p = Path(path)
    return parse_solution(p.read_text(encoding="utf-8"), str(p))


# -- feasibility -----------------------------------------------------------


def validate_solution(instance: Instance, solution: Solution, tol: float = 1e-9) -> list[str]:
    """Every violated constraint of ``solution``; an empty list means feasible."""
    from .geometry import bundle_predictors

    findings: list[str] = []
    task_seen: dict[int, int] = {}
    driver_seen: set[int] = set()
    for k, offer in enumerate(solution.offers):
        tag = f"offer {k} (driver {offer.driver_id})"
        driver = instance.driver_by_id.get(offer.driver_id)
        depot = instance.depot_by_id.get(offer.bundle.depot_id)
        if driver is None:
            findings.append(f"{tag}: unknown driver id")
        elif offer.driver_id in driver_seen:
            findings.append(f"driver multiplicity: driver {offer.driver_id} receives more than one offer")
        driver_seen.add(offer.driver_id)
        if depot is None:
            findings.append(f"{tag}: unknown depot id {offer.bundle.depot_id}")
        unknown = [t for t in offer.bundle.task_order if t not in instance.task_by_id]
        if unknown:
            findings.append(f"{tag}: unknown task ids {unknown}")
        for t in offer.bundle.task_order:
            if t in task_seen:
                findings.append(
                    f"task multiplicity: task {t} appears in offers {task_seen[t]} and {k}"
                )
            else:
                task_seen[t] = k
        if driver is None or depot is None or unknown:
            continue
        not_servable = [t for t in offer.bundle.task_order if t not in depot.servable_tasks]
        if not_servable:
            findings.append(f"depot servability: {tag}: depot {depot.id} cannot serve tasks {not_servable}")
        load = math.fsum(instance.task_by_id[t].load for t in offer.bundle.task_order)
        if load > driver.capacity + tol:
            findings.append(f"capacity: {tag}: load {load:g} exceeds capacity {driver.capacity:g}")
        if offer.compensation < 0:
            findings.append(f"{tag}: negative compensation")
            continue
        x = bundle_predictors(instance, driver, offer.bundle)
        if abs(x.detour - offer.detour) > tol * max(1.0, x.detour):
            findings.append(f"{tag}: detour {offer.detour!r} differs from recomputed {x.detour!r}")
        p = acceptance_probability(driver.behavior, x, offer.compensation)
        if abs(p - offer.acceptance_probability) > tol:
            findings.append(f"{tag}: acceptance probability {offer.acceptance_probability!r} != {p!r}")
        cbar = math.fsum(instance.task_by_id[t].outsource_cost for t in offer.bundle.task_order)
        sav = offer.acceptance_probability * (cbar - offer.compensation)
        if abs(sav - offer.expected_savings) > tol * max(1.0, abs(sav)):
            findings.append(f"{tag}: expected savings {offer.expected_savings!r} != {sav!r}")
    total = math.fsum(o.expected_savings for o in solution.offers)
    if abs(total - solution.objective) > tol * max(1.0, abs(total)):
        findings.append(f"objective mismatch: stored {solution.objective!r}, offers sum to {total!r}")
    return findings
