"""Column generation, MILP heuristic, enumeration and the algorithm variants.

The restricted master problem has one ``<= 1`` row per task followed by one
``<= 1`` row per driver; every column is an offer of one bundle to one
driver whose objective coefficient is the expected savings at the optimal
compensation.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .geometry import (
    DegenerateDriverError,
    bundle_predictors,
    corridor_tasks,
    detour_increment,
    PathContext,
    initial_detour,
)
from .lpsolve import LinearProgram, SimplexSolver, solve_milp
from .model import Bundle, Instance, Offer, Solution, format_real
from .pricing import Column, DualPrices, PricingConfig, PricingStats, price_driver
from .probability import price_offer

__all__ = [
    "VARIANTS",
    "VariantConfig",
    "RunReport",
    "ColumnPool",
    "CgResult",
    "column_generation",
    "milp_heuristic",
    "best_per_task_set",
    "enumerate_and_reoptimize",
    "corridor_warm_start",
    "run_variant",
    "sequential_baseline",
    "format_report",
    "report_to_json",
    "report_from_json",
    "parse_report",
]

VARIANTS = ("H-B", "H-D", "H-DD", "H-DDC", "H-C", "E-DD", "E-DDC", "SEQ")

# name -> (dominance, rc pruning, detour limit, corridor start, enumeration)
_FEATURES = {
    "H-B": (False, False, False, False, False),
    "H-D": (True, True, False, False, False),
    "H-DD": (True, True, True, False, False),
    "H-DDC": (True, True, True, True, False),
    "H-C": (True, True, True, True, False),
    "E-DD": (True, True, True, False, True),
    "E-DDC": (True, True, True, True, True),
    "SEQ": (False, False, False, False, False),
}

ENUM_MARGIN = 1e-9


@dataclass(frozen=True, slots=True)
class VariantConfig:
    name: str
    use_dominance: bool
    use_rc_pruning: bool
    use_detour_limit: bool
    use_corridor_init: bool
    do_enumeration: bool
    theta_degrees: float = 36.0
    column_limit: int = 100
    time_limit_seconds: float | None = None
    rng_seed: int = 0
    workers: int = 1
    pool_cap: int | None = None
    # label extensions per driver in the truncated pricing pass (None: exact only)
    quick_pricing_extensions: int | None = 50
    # sequential baseline parameters
    seq_max_detour: float = 5.0
    seq_extensions: int = 250
    seq_top_k: int = 5
    seq_min_probability: float = 0.8
    seq_min_savings: float = 1.0

    def __post_init__(self) -> None:
        if self.name not in _FEATURES:
            raise ValueError(f"unknown variant {self.name!r}")
        flags = (self.use_dominance, self.use_rc_pruning, self.use_detour_limit,
                 self.use_corridor_init, self.do_enumeration)
        if flags != _FEATURES[self.name]:
            raise ValueError(f"feature flags do not match variant {self.name}")
        if not self.theta_degrees > 0:
            raise ValueError("theta_degrees must be > 0")
        if self.column_limit < 1:
            raise ValueError("column_limit must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @classmethod
    def for_variant(cls, name: str, **options) -> VariantConfig:
        """Config of a named variant (case-insensitive)."""
        key = name.upper()
        if key not in _FEATURES:
            raise ValueError(f"unknown variant {name!r}; choose from {', '.join(VARIANTS)}")
        dom, prune, detour, corridor, enum = _FEATURES[key]
        return cls(key, dom, prune, detour, corridor, enum, **options)

    @property
    def computes_upper_bound(self) -> bool:
        return self.name not in ("H-C", "SEQ")

    def pricing(self, **changes) -> PricingConfig:
        base = PricingConfig(
            use_dominance=self.use_dominance,
            use_rc_pruning=self.use_rc_pruning,
            use_detour_limit=self.use_detour_limit,
            column_limit_per_driver=self.column_limit,
        )
        return replace(base, **changes) if changes else base


@dataclass(slots=True)
class RunReport:
    instance_name: str
    variant: str
    solution: Solution
    upper_bound: float | None
    lower_bound: float
    gap_h: float | None
    columns_generated: int
    cg_iterations: int
    wall_time_seconds: float
    status: str
    enumerated_columns: int = 0
    milp_nodes: int = 0
    notes: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.upper_bound is not None and self.lower_bound > self.upper_bound + 1e-6:
            raise ValueError(
                f"lower bound {self.lower_bound} exceeds upper bound {self.upper_bound}"
            )


# -- column pool and master problem ---------------------------------------


class ColumnPool:
    """Deduplicated columns together with a warm-started master LP."""

    def __init__(self, instance: Instance):
        self.instance = instance
        self.columns: list[Column] = []
        self._keys: dict[tuple, int] = {}
        n_t = len(instance.tasks)
        self._task_row = instance.task_index
        self._driver_row = {w.id: n_t + k for k, w in enumerate(instance.drivers)}
        m = n_t + len(instance.drivers)
        self.solver = SimplexSolver(LinearProgram([], [[] for _ in range(m)], [1.0] * m))

    def __len__(self) -> int:
        return len(self.columns)

    def __contains__(self, col: Column) -> bool:
        return col.key in self._keys

    def coefficients(self, col: Column) -> list[tuple[int, float]]:
        rows = [(self._task_row[t], 1.0) for t in col.bundle.task_order]
        rows.append((self._driver_row[col.driver_id], 1.0))
        return rows

    def add(self, cols: Iterable[Column]) -> int:
        fresh = []
        for col in cols:
            if col.key in self._keys:
                continue
            self._keys[col.key] = len(self.columns) + len(fresh)
            fresh.append(col)
        if fresh:
            self.columns.extend(fresh)
            self.solver.add_columns(
                [c.expected_savings for c in fresh], [self.coefficients(c) for c in fresh]
            )
        return len(fresh)

    def solve_lp(self):
        res = self.solver.solve()
        if res.status != "optimal":
            raise RuntimeError(f"master LP is {res.status}")
        return res

    def duals(self, row_duals: Sequence[float]) -> DualPrices:
        inst = self.instance
        n_t = len(inst.tasks)
        task = {t.id: max(float(row_duals[i]), 0.0) for i, t in enumerate(inst.tasks)}
        drv = {w.id: max(float(row_duals[n_t + k]), 0.0) for k, w in enumerate(inst.drivers)}
        return DualPrices(task, drv)

    def milp(self) -> LinearProgram:
        m = self.solver.m
        return LinearProgram.from_columns(
            m, [1.0] * m, [c.expected_savings for c in self.columns],
            [self.coefficients(c) for c in self.columns], [1.0] * len(self.columns),
        )


# -- parallel pricing ------------------------------------------------------

_WORKER_INSTANCE: Instance | None = None


def _worker_init(instance: Instance) -> None:
    global _WORKER_INSTANCE
    _WORKER_INSTANCE = instance


def _worker_price(args):
    driver_id, duals, config, deadline = args
    inst = _WORKER_INSTANCE
    stats = PricingStats()
    cols = price_driver(inst, inst.driver_by_id[driver_id], duals, config, stats=stats, deadline=deadline)
    return cols, stats


class _Pricer:
    """Runs pricing for all drivers, serially or in a process pool."""

    def __init__(self, instance: Instance, workers: int):
        self.instance = instance
        self.pool = None
        if workers > 1 and len(instance.drivers) > 1:
            self.pool = ProcessPoolExecutor(
                max_workers=workers, initializer=_worker_init, initargs=(instance,)
            )

    def close(self) -> None:
        if self.pool is not None:
            self.pool.shutdown()
            self.pool = None

    def __enter__(self) -> _Pricer:
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def run(self, duals: DualPrices, configs: dict[int, PricingConfig | None],
            deadline: float | None, stats: PricingStats) -> list[Column]:
        """Columns of all drivers, merged in driver-id order."""
        ids = sorted(d for d, c in configs.items() if c is not None)
        out: list[Column] = []
        if self.pool is None:
            for d in ids:
                s = PricingStats()
                out.extend(price_driver(self.instance, self.instance.driver_by_id[d], duals,
                                        configs[d], stats=s, deadline=deadline))
                stats.merge(s)
                if s.cap_hit:
                    break
        else:
            jobs = [(d, duals, configs[d], deadline) for d in ids]
            for cols, s in self.pool.map(_worker_price, jobs):
                out.extend(cols)
                stats.merge(s)
        return out


# -- algorithm steps -------------------------------------------------------


@dataclass(slots=True)
class CgResult:
    columns: list[Column]
    upper_bound: float | None
    duals: DualPrices
    iterations: int
    lp_objective: float
    timed_out: bool
    pool: ColumnPool | None = None


def _deadline(config: VariantConfig, start: float) -> float | None:
    if config.time_limit_seconds is None:
        return None
    return start + config.time_limit_seconds


def _corridor_configs(instance: Instance, config: VariantConfig) -> dict[int, PricingConfig | None]:
    out: dict[int, PricingConfig | None] = {}
    for w in instance.drivers:
        try:
            allowed = corridor_tasks(instance, w, config.theta_degrees)
        except DegenerateDriverError:
            out[w.id] = None
            continue
        out[w.id] = config.pricing(restrict_tasks=allowed) if allowed else None
    return out


def _cg_loop(
    instance: Instance,
    config: VariantConfig,
    pool: ColumnPool,
    configs: dict[int, PricingConfig | None],
    deadline: float | None,
    pricer: _Pricer,
) -> CgResult:
    iterations = 0
    last_obj = -math.inf
    stats = PricingStats()
    # a truncated search usually finds improving columns much faster; the
    # exact search runs only when it comes back empty
    quick = None
    if config.quick_pricing_extensions is not None:
        n = config.quick_pricing_extensions
        quick = {k: None if c is None else replace(c, max_extensions=n) for k, c in configs.items()}
    while True:
        res = pool.solve_lp()
        if res.objective < last_obj - 1e-7:
            raise RuntimeError("master objective decreased between iterations")
        last_obj = res.objective
        duals = pool.duals(res.row_duals)
        if deadline is not None and time.monotonic() > deadline:
            return CgResult(pool.columns, None, duals, iterations, res.objective, True, pool)
        if quick is not None and pool.add(pricer.run(duals, quick, deadline, stats)) > 0 \
                and not stats.timed_out:
            iterations += 1
            continue
        found = pricer.run(duals, configs, deadline, stats)
        if stats.timed_out:
            pool.add(found)
            res = pool.solve_lp()
            return CgResult(pool.columns, None, pool.duals(res.row_duals), iterations,
                            res.objective, True, pool)
        added = pool.add(found)
        if added == 0:
            return CgResult(pool.columns, res.objective, duals, iterations, res.objective, False, pool)
        iterations += 1


def column_generation(
    instance: Instance,
    config: VariantConfig,
    initial_columns: Sequence[Column] = (),
    *,
    deadline: float | None = None,
    pricer: _Pricer | None = None,
) -> CgResult:
    """Solve the LP relaxation over all bundles; the result carries the upper bound."""
    pool = ColumnPool(instance)
    pool.add(initial_columns)
    configs = {w.id: config.pricing() for w in instance.drivers}
    own = pricer is None
    pricer = pricer or _Pricer(instance, config.workers)
    try:
        return _cg_loop(instance, config, pool, configs, deadline, pricer)
    finally:
        if own:
            pricer.close()


def corridor_warm_start(
    instance: Instance,
    config: VariantConfig,
    *,
    deadline: float | None = None,
    pricer: _Pricer | None = None,
) -> CgResult:
    """Column generation restricted to each driver's corridor tasks.

    The LP value of the result is not an upper bound of the full problem.
    """
    pool = ColumnPool(instance)
    configs = _corridor_configs(instance, config)
    own = pricer is None
    pricer = pricer or _Pricer(instance, config.workers)
    try:
        res = _cg_loop(instance, config, pool, configs, deadline, pricer)
    finally:
        if own:
            pricer.close()
    res.upper_bound = None
    return res


def _offer(col: Column) -> Offer:
    return Offer(col.driver_id, col.bundle, col.compensation, col.acceptance_probability,
                 col.expected_savings, col.detour)


def best_per_task_set(columns: Iterable[Column]) -> list[Column]:
    """Highest-savings column per driver and task set.

    Columns of one driver covering the same tasks have identical constraint
    coefficients, so only the most valuable of them can be part of an
    optimal selection.
    """
    best: dict[tuple[int, frozenset[int]], Column] = {}
    for col in columns:
        key = (col.driver_id, frozenset(col.bundle.task_order))
        cur = best.get(key)
        if cur is None or col.expected_savings > cur.expected_savings:
            best[key] = col
    return list(best.values())


def milp_heuristic(
    instance: Instance,
    columns: Sequence[Column],
    time_limit: float | None = None,
    *,
    bound: float | None = None,
    incumbent: Solution | None = None,
) -> tuple[Solution, int, bool]:
    """Best selection of pool columns; returns (solution, nodes, timed_out).

    The offers of ``incumbent`` seed the search when the pool covers them.
    """
    pool = ColumnPool(instance)
    pool.add(best_per_task_set(columns))
    if not pool.columns:
        return Solution.from_offers((), bound, "heuristic"), 0, False
    start = None
    if incumbent is not None and incumbent.offers:
        where = {(c.driver_id, frozenset(c.bundle.task_order)): j for j, c in enumerate(pool.columns)}
        idx = [where.get((o.driver_id, frozenset(o.bundle.task_order))) for o in incumbent.offers]
        if all(j is not None for j in idx):
            start = [0.0] * len(pool.columns)
            for j in idx:
                start[j] = 1.0
    res = solve_milp(pool.milp(), None, time_limit, initial=start, pair_branching=True)
    if res.status == "infeasible":
        raise RuntimeError("set-packing MILP reported infeasible")
    chosen = [pool.columns[j] for j, v in enumerate(res.primal) if v > 0.5]
    timed_out = res.status != "optimal"
    sol = Solution.from_offers([_offer(c) for c in chosen], bound,
                               "time_limit" if timed_out else "heuristic")
    return sol, res.nodes, timed_out


def enumerate_and_reoptimize(
    instance: Instance,
    columns: Sequence[Column],
    upper_bound: float,
    lower_bound: float,
    duals: DualPrices,
    config: VariantConfig,
    *,
    deadline: float | None = None,
    pricer: _Pricer | None = None,
    incumbent: Solution | None = None,
) -> tuple[Solution, int, list[str]]:
    """Add every column that could belong to a better solution, then re-solve.

    Returns the solution, the number of enumerated columns that were new to
    the pool, and notes on any limit that was hit.
    """
    notes: list[str] = []
    threshold = lower_bound - upper_bound - ENUM_MARGIN
    pool = ColumnPool(instance)
    pool.add(columns)
    cap = None
    if config.pool_cap is not None:
        cap = max(config.pool_cap - len(pool), 0)
    enum_cfg = config.pricing(enumeration_mode=True, enumeration_threshold=threshold, max_columns=cap)
    stats = PricingStats()
    own = pricer is None
    pricer = pricer or _Pricer(instance, config.workers)
    try:
        found = pricer.run(duals, {w.id: enum_cfg for w in instance.drivers}, deadline, stats)
    finally:
        if own:
            pricer.close()
    before = len(pool)
    pool.add(found)
    if config.pool_cap is not None and len(pool) > config.pool_cap:
        stats.cap_hit = True
    new = len(pool) - before
    if stats.cap_hit:
        notes.append("enumeration pool cap reached")
    if stats.timed_out:
        notes.append("time limit reached during enumeration")
    remaining = None if deadline is None else max(deadline - time.monotonic(), 0.0)
    sol, nodes, milp_to = milp_heuristic(instance, pool.columns, remaining, bound=upper_bound,
                                         incumbent=incumbent)
    if milp_to:
        notes.append("time limit reached in the final MILP")
    if stats.timed_out or milp_to:
        status = "time_limit"
    elif stats.cap_hit:
        status = "heuristic"
    else:
        status = "optimal"
    sol = replace(sol, status=status, bound=upper_bound if status != "optimal" else sol.objective)
    return sol, new, notes


# -- variants --------------------------------------------------------------


def _gap(ub: float | None, lb: float) -> float | None:
    if ub is None or ub <= 0:
        return None
    return (ub - lb) / ub


def run_variant(instance: Instance, config: VariantConfig) -> RunReport:
    """Run one algorithm variant end to end."""
    if config.name == "SEQ":
        return sequential_baseline(instance, config)
    start = time.monotonic()
    deadline = _deadline(config, start)
    notes: list[str] = []
    with _Pricer(instance, config.workers) as pricer:
        initial: list[Column] = []
        iterations = 0
        timed_out = False
        if config.use_corridor_init:
            warm = corridor_warm_start(instance, config, deadline=deadline, pricer=pricer)
            initial = list(warm.columns)
            iterations += warm.iterations
            timed_out = warm.timed_out
        if config.name == "H-C" or timed_out:
            cg_cols, ub, duals = initial, None, None
        else:
            cg = column_generation(instance, config, initial, deadline=deadline, pricer=pricer)
            cg_cols, ub, duals = list(cg.columns), cg.upper_bound, cg.duals
            iterations += cg.iterations
            timed_out = cg.timed_out
        if timed_out:
            notes.append("time limit reached during column generation")
        remaining = None if deadline is None else max(deadline - time.monotonic(), 0.0)
        sol, nodes, milp_to = milp_heuristic(instance, cg_cols, remaining, bound=ub)
        timed_out |= milp_to
        columns_generated = len(cg_cols)
        enumerated = 0
        if config.do_enumeration and not timed_out and ub is not None:
            sol, enumerated, enum_notes = enumerate_and_reoptimize(
                instance, cg_cols, ub, sol.objective, duals, config, deadline=deadline, pricer=pricer,
                incumbent=sol,
            )
            notes.extend(enum_notes)
            columns_generated += enumerated
            timed_out = sol.status == "time_limit"
        elif config.do_enumeration and ub is None:
            notes.append("no valid upper bound; enumeration skipped")
    if timed_out:
        status = "time_limit"
    elif config.do_enumeration:
        status = sol.status
    else:
        status = "heuristic"
    sol = replace(sol, status=status)
    return RunReport(
        instance.name, config.name, sol, ub, sol.objective, _gap(ub, sol.objective),
        columns_generated, iterations, time.monotonic() - start, status, enumerated, nodes, notes,
    )


def _sequential_bundles(instance: Instance, config: VariantConfig) -> list[Column]:
    """Randomised greedy bundle pool, one best-detour ordering per task set."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([config.rng_seed])))
    dmax = config.seq_max_detour
    columns: list[Column] = []
    for depot in instance.depots:
        servable = [t for t in instance.tasks if t.id in depot.servable_tasks]
        for driver in instance.drivers:
            base = initial_detour(driver, depot)
            start_ctx = PathContext(driver.id, depot.id, depot.location)
            best: dict[frozenset[int], tuple[float, tuple[int, ...]]] = {}

            def keep(order: tuple[int, ...], detour: float) -> None:
                key = frozenset(order)
                cur = best.get(key)
                if cur is None or detour < cur[0]:
                    best[key] = (detour, order)

            seeds = []
            for t in servable:
                if t.load > driver.capacity:
                    continue
                d0 = base + detour_increment(start_ctx, t, driver)
                if d0 <= dmax:
                    seeds.append((t, d0))
            for seed, d0 in seeds:
                for _ in range(config.seq_extensions):
                    order = (seed.id,)
                    load = seed.load
                    detour = d0
                    last = seed
                    keep(order, detour)
                    while True:
                        ctx = PathContext(driver.id, depot.id, last.location)
                        cands = []
                        for t in servable:
                            if t.id in order or load + t.load > driver.capacity:
                                continue
                            inc = detour_increment(ctx, t, driver)
                            if detour + inc <= dmax:
                                cands.append((inc, t.id, t))
                        if not cands:
                            break
                        cands.sort(key=lambda c: (c[0], c[1]))
                        top = cands[: config.seq_top_k]
                        inc, _, t = top[int(rng.integers(len(top)))]
                        order = order + (t.id,)
                        load += t.load
                        detour += inc
                        last = t
                        keep(order, detour)
            for key in sorted(best, key=lambda k: best[k][1]):
                _, order = best[key]
                bundle = Bundle(depot.id, order)
                x = bundle_predictors(instance, driver, bundle)
                cbar = math.fsum(instance.task_by_id[t].outsource_cost for t in order)
                offer = price_offer(driver.behavior, x, cbar)
                if not offer.worthwhile:
                    continue
                if offer.acceptance_probability < config.seq_min_probability:
                    continue
                if offer.expected_savings < config.seq_min_savings:
                    continue
                columns.append(Column(driver.id, bundle, offer.compensation,
                                      offer.acceptance_probability, offer.expected_savings,
                                      0.0, x.detour))
    return columns


def sequential_baseline(instance: Instance, config: VariantConfig) -> RunReport:
    """Generate bundles, price them, then pick offers with one MILP."""
    start = time.monotonic()
    deadline = _deadline(config, start)
    columns = _sequential_bundles(instance, config)
    remaining = None if deadline is None else max(deadline - time.monotonic(), 0.0)
    sol, nodes, timed_out = milp_heuristic(instance, columns, remaining)
    status = "time_limit" if timed_out else "heuristic"
    sol = replace(sol, status=status)
    return RunReport(
        instance.name, "SEQ", sol, None, sol.objective, None, len(columns), 0,
        time.monotonic() - start, status, 0, nodes, [],
    )


# -- report output ---------------------------------------------------------


def _fmt(v: float | None) -> str:
    return "none" if v is None else format_real(v)


def _means(sol: Solution) -> dict[str, float | None]:
    offers = sol.offers
    if not offers:
        return {k: None for k in ("mean_acceptance", "mean_compensation", "mean_bundle_size", "mean_detour")}
    k = len(offers)
    return {
        "mean_acceptance": math.fsum(o.acceptance_probability for o in offers) / k,
        "mean_compensation": math.fsum(o.compensation for o in offers) / k,
        "mean_bundle_size": math.fsum(len(o.bundle) for o in offers) / k,
        "mean_detour": math.fsum(o.detour for o in offers) / k,
    }


def format_report(report: RunReport, with_timing: bool = False) -> str:
    """Flat ``key value`` text block.

    Wall time is left out unless requested so that repeated runs produce
    identical files.
    """
    rows = [
        ("instance", report.instance_name),
        ("variant", report.variant),
        ("status", report.status),
        ("objective", format_real(report.solution.objective)),
        ("upper_bound", _fmt(report.upper_bound)),
        ("lower_bound", format_real(report.lower_bound)),
        ("gap_h", _fmt(report.gap_h)),
        ("columns_generated", str(report.columns_generated)),
        ("enumerated_columns", str(report.enumerated_columns)),
        ("cg_iterations", str(report.cg_iterations)),
        ("milp_nodes", str(report.milp_nodes)),
        ("offers", str(len(report.solution.offers))),
    ]
    rows += [(k, _fmt(v)) for k, v in _means(report.solution).items()]
    if with_timing:
        rows.append(("wall_time_seconds", format_real(report.wall_time_seconds)))
    for note in report.notes:
        rows.append(("note", note))
    return "".join(f"{k} {v}\n" for k, v in rows)


def parse_report(text: str) -> dict[str, str]:
    """Inverse of :func:`format_report` (notes are collected under ``note``)."""
    out: dict[str, str] = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition(" ")
        if key == "note":
            out["note"] = (out["note"] + "; " + value) if "note" in out else value
        else:
            out[key] = value
    return out


def report_to_json(report: RunReport) -> str:
    """Structured report: bounds, counters, wall time and one entry per offer."""
    doc = {
        "instance": report.instance_name,
        "variant": report.variant,
        "status": report.status,
        "objective": report.solution.objective,
        "bound": report.upper_bound,
        "lower_bound": report.lower_bound,
        "gap_h": report.gap_h,
        "columns_generated": report.columns_generated,
        "cg_iterations": report.cg_iterations,
        "enumerated_columns": report.enumerated_columns,
        "milp_nodes": report.milp_nodes,
        "wall_time_seconds": report.wall_time_seconds,
        "notes": list(report.notes),
        "offers": [
            {
                "driver": o.driver_id,
                "depot": o.bundle.depot_id,
                "tasks": list(o.bundle.task_order),
                "compensation": o.compensation,
                "acceptance_probability": o.acceptance_probability,
                "expected_savings": o.expected_savings,
                "detour": o.detour,
            }
            for o in report.solution.offers
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def report_from_json(text: str) -> RunReport:
    """Inverse of :func:`report_to_json`."""
    doc = json.loads(text)
    offers = [
        Offer(
            int(o["driver"]),
            Bundle(int(o["depot"]), tuple(int(t) for t in o["tasks"])),
            float(o["compensation"]),
            float(o["acceptance_probability"]),
            float(o["expected_savings"]),
            float(o["detour"]),
        )
        for o in doc["offers"]
    ]
    status = doc["status"]
    sol = Solution(tuple(offers), float(doc["objective"]), doc["bound"], status)
    return RunReport(
        doc["instance"], doc["variant"], sol, doc["bound"], float(doc["lower_bound"]), doc["gap_h"],
        int(doc["columns_generated"]), int(doc["cg_iterations"]), float(doc["wall_time_seconds"]),
        status, int(doc.get("enumerated_columns", 0)), int(doc.get("milp_nodes", 0)),
        list(doc.get("notes", [])),
    )
