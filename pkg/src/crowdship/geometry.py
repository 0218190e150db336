"""Planar distances, detours, depot choice and corridor membership."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Protocol

from .model import Bundle, DepotSpec, DriverSpec, Instance, Point, TaskSpec
from .probability import PredictorVector

__all__ = [
    "PathContext",
    "ExtraPredictors",
    "NoFeasibleDepotError",
    "DegenerateDriverError",
    "distance",
    "initial_detour",
    "detour_increment",
    "bundle_detour",
    "bundle_predictors",
    "best_depot",
    "vector_angle",
    "corridor_tasks",
]


class NoFeasibleDepotError(ValueError):
    pass


class DegenerateDriverError(ValueError):
    pass


class ExtraPredictors(Protocol):
    """Update rules for bundle predictors beyond detour and size.

    Values must be non-negative and additive along the path, one entry per
    ``extra_bundle_coeffs`` coefficient of the driver.
    """

    def initial(self, driver: DriverSpec, depot: DepotSpec) -> tuple[float, ...]: ...

    def increment(
        self, driver: DriverSpec, last: TaskSpec | DepotSpec, task: TaskSpec
    ) -> tuple[float, ...]: ...


@dataclass(frozen=True, slots=True)
class PathContext:
    driver_id: int
    depot_id: int
    last_location: Point


def distance(a: Point, b: Point) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def initial_detour(driver: DriverSpec, depot: DepotSpec) -> float:
    """Extra length of ``origin -> depot -> destination`` over the direct trip."""
    s, e, d = driver.origin, driver.destination, depot.location
    return max(distance(s, d) + distance(d, e) - distance(s, e), 0.0)


def detour_increment(ctx: PathContext, task: TaskSpec, driver: DriverSpec) -> float:
    last, e = ctx.last_location, driver.destination
    t = task.location
    return max(distance(last, t) + distance(t, e) - distance(last, e), 0.0)


def _zero_extras(driver: DriverSpec) -> tuple[float, ...]:
    return tuple(0.0 for _ in driver.behavior.extra_bundle_coeffs)


def bundle_predictors(instance: Instance, driver: DriverSpec, bundle: Bundle) -> PredictorVector:
    """Detour, size and extra predictors of offering ``bundle`` to ``driver``."""
    try:
        depot = instance.depot_by_id[bundle.depot_id]
        tasks = [instance.task_by_id[t] for t in bundle.task_order]
    except KeyError as exc:
        raise KeyError(f"unknown id {exc.args[0]} in bundle") from None
    hook = instance.extra_predictors
    extras = list(hook.initial(driver, depot)) if hook is not None else list(_zero_extras(driver))
    # total path length minus the direct trip, summed in path order
    s, e = driver.origin, driver.destination
    length = distance(s, depot.location)
    prev_loc = depot.location
    last: TaskSpec | DepotSpec = depot
    for t in tasks:
        length += distance(prev_loc, t.location)
        if hook is not None:
            for i, v in enumerate(hook.increment(driver, last, t)):
                extras[i] += v
        prev_loc, last = t.location, t
    length += distance(prev_loc, e)
    detour = max(length - distance(s, e), 0.0)
    return PredictorVector(detour, float(len(tasks)), tuple(extras))


def bundle_detour(instance: Instance, driver: DriverSpec, bundle: Bundle) -> float:
    return bundle_predictors(instance, driver, bundle).detour


def best_depot(instance: Instance, driver: DriverSpec, tasks: Iterable[int]) -> int:
    """Detour-minimising depot that can serve every task (ties: smallest id)."""
    need = frozenset(tasks)
    best: tuple[float, int] | None = None
    for d in instance.depots:
        if need <= d.servable_tasks:
            key = (initial_detour(driver, d), d.id)
            if best is None or key < best:
                best = key
    if best is None:
        raise NoFeasibleDepotError(f"no depot serves all of tasks {sorted(need)}")
    return best[1]


def vector_angle(ux: float, uy: float, vx: float, vy: float) -> float:
    """Smaller angle between two plane vectors in radians (0 for a zero vector)."""
    if (ux == 0.0 and uy == 0.0) or (vx == 0.0 and vy == 0.0):
        return 0.0
    return math.atan2(abs(ux * vy - uy * vx), ux * vx + uy * vy)


def corridor_tasks(instance: Instance, driver: DriverSpec, theta_degrees: float) -> frozenset[int]:
    """Tasks inside the angular corridor around the driver's travel direction."""
    if not theta_degrees > 0:
        raise ValueError("theta_degrees must be > 0")
    s, e = driver.origin, driver.destination
    vx, vy = e.x - s.x, e.y - s.y
    if vx == 0.0 and vy == 0.0:
        raise DegenerateDriverError(f"driver {driver.id} has identical origin and destination")
    theta = math.radians(theta_degrees)

    def inside(p: Point) -> bool:
        return vector_angle(vx, vy, p.x - s.x, p.y - s.y) < theta

    depot_ok = [d for d in instance.depots if inside(d.location)]
    allowed: set[int] = set()
    for d in depot_ok:
        allowed |= d.servable_tasks
    return frozenset(t.id for t in instance.tasks if t.id in allowed and inside(t.location))
