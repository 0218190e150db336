"""Labeling algorithm for the pricing subproblem.

A label is a partial path ``origin -> depot -> tasks...`` of one driver.
The reduced cost of a bundle is not additive along the path (it is
``W(exp(score))/gamma`` minus duals), so the usual resource-based dominance
does not apply; instead labels ending at the same task are compared on the
linear score ``B.X + gamma*Cbar``, the accumulated task duals, the
reachable set and the used capacity.  Labels whose extensions cannot reach
a positive reduced cost are pruned using optimistic bounds on the
predictors, and successors whose detour alone rules out a positive reduced
cost are trimmed from the reachable set.

Task sets are handled internally as integer bitmasks over task positions.
"""

from __future__ import annotations

import heapq
import math
import time
import weakref
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .geometry import initial_detour
from .model import Bundle, DriverSpec, Instance
from .probability import PredictorVector, lambert_w_of_exp, price_offer

__all__ = [
    "DualPrices",
    "PricingConfig",
    "PricingStats",
    "Column",
    "Label",
    "init_labels",
    "extend",
    "dominates",
    "route_dominates",
    "k_max",
    "rc_upper_bound",
    "can_prune",
    "detour_bound",
    "trim_successors",
    "price_driver",
    "EmptyReachableError",
]

RC_TOL = 1e-9
_CAP_EPS = 1e-9


class EmptyReachableError(ValueError):
    pass


@dataclass(frozen=True)
class DualPrices:
    task_duals: Mapping[int, float] = field(default_factory=dict)
    driver_duals: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for k, v in list(self.task_duals.items()) + list(self.driver_duals.items()):
            if v < 0:
                raise ValueError(f"dual value for {k} is negative: {v}")

    @classmethod
    def zero(cls) -> DualPrices:
        return cls({}, {})


@dataclass(frozen=True)
class PricingConfig:
    use_dominance: bool = True
    use_rc_pruning: bool = True
    use_detour_limit: bool = True
    column_limit_per_driver: int = 100
    enumeration_mode: bool = False
    enumeration_threshold: float = 0.0
    restrict_tasks: frozenset[int] | None = None
    # enumeration only: stop once this many columns were found for a driver
    max_columns: int | None = None
    # stop after this many label extensions (a heuristic, incomplete search)
    max_extensions: int | None = None

    def __post_init__(self) -> None:
        if self.column_limit_per_driver < 1:
            raise ValueError("column_limit_per_driver must be >= 1")
        if self.max_extensions is not None and self.max_extensions < 1:
            raise ValueError("max_extensions must be >= 1")
        if self.restrict_tasks is not None:
            object.__setattr__(self, "restrict_tasks", frozenset(self.restrict_tasks))


@dataclass
class PricingStats:
    labels_created: int = 0
    labels_extended: int = 0
    labels_dominated: int = 0
    labels_pruned: int = 0
    successors_trimmed: int = 0
    columns: int = 0
    limit_hit: bool = False
    cap_hit: bool = False
    timed_out: bool = False
    truncated: bool = False

    def merge(self, other: PricingStats) -> None:
        for name in ("labels_created", "labels_extended", "labels_dominated",
                     "labels_pruned", "successors_trimmed", "columns"):
            setattr(self, name, getattr(self, name) + getattr(other, name))
        self.limit_hit |= other.limit_hit
        self.cap_hit |= other.cap_hit
        self.timed_out |= other.timed_out
        self.truncated |= other.truncated


@dataclass(frozen=True, slots=True)
class Column:
    driver_id: int
    bundle: Bundle
    compensation: float
    acceptance_probability: float
    expected_savings: float
    reduced_cost_at_generation: float
    detour: float = 0.0

    @property
    def key(self) -> tuple[int, int, tuple[int, ...]]:
        return (self.driver_id, self.bundle.depot_id, self.bundle.task_order)


# -- per-driver precomputation --------------------------------------------


def _bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class _DriverContext:
    """Distances, increments and coefficient shortcuts for one driver."""

    def __init__(self, instance: Instance, driver: DriverSpec):
        self.instance = instance
        self.driver = driver
        tasks = instance.tasks
        n = len(tasks)
        self.n = n
        self.task_ids = [t.id for t in tasks]
        self.loads = [float(t.load) for t in tasks]
        self.costs = [float(t.outsource_cost) for t in tasks]
        self.depot_ids = [d.id for d in instance.depots]
        idx = instance.task_index
        self.depot_masks = []
        for d in instance.depots:
            m = 0
            for tid in d.servable_tasks:
                m |= 1 << idx[tid]
            self.depot_masks.append(m)
        self.depot_init = [initial_detour(driver, d) for d in instance.depots]

        # increment matrix: rows are "from" locations (tasks, then depots)
        pts = np.array(
            [(t.location.x, t.location.y) for t in tasks]
            + [(d.location.x, d.location.y) for d in instance.depots],
            dtype=float,
        ).reshape(-1, 2)
        e = np.array([driver.destination.x, driver.destination.y])
        to_end = np.hypot(pts[:, 0] - e[0], pts[:, 1] - e[1])
        tp = pts[:n]
        dmat = np.hypot(pts[:, None, 0] - tp[None, :, 0], pts[:, None, 1] - tp[None, :, 1])
        inc = dmat + to_end[None, :n] - to_end[:, None]
        np.maximum(inc, 0.0, out=inc)
        self.inc = inc.tolist()
        self._inc_np = inc
        self._trim_rows: dict[int, tuple[list[float], list[int]]] = {}
        self._umin_rows: list[list[tuple[float, int]]] | None = None

        order = sorted(range(n), key=lambda i: (self.loads[i], i))
        self.load_order = order
        self.sorted_loads = [self.loads[i] for i in order]
        pref = [0]
        for i in order:
            pref.append(pref[-1] | (1 << i))
        self.load_prefix = pref
        self.cost_desc = sorted(range(n), key=lambda i: (-self.costs[i], i))
        self.full_mask = (1 << n) - 1

        b = driver.behavior
        self.gamma = b.compensation_coeff
        self.b1 = b.detour_coeff
        self.b2 = b.size_coeff
        self.extra_coeffs = tuple(b.extra_bundle_coeffs)
        self.score0 = b.intercept + b.driver_term
        self.capacity = float(driver.capacity)

        hook = instance.extra_predictors
        self.n_extra = len(self.extra_coeffs)
        self.extra_init: list[tuple[float, ...]] = []
        self.extra_inc: list[list[tuple[float, ...]]] | None = None
        if self.n_extra:
            zero = tuple(0.0 for _ in self.extra_coeffs)
            if hook is None:
                self.extra_init = [zero for _ in instance.depots]
                self.extra_inc = [[zero] * n for _ in range(n + len(instance.depots))]
            else:
                self.extra_init = [tuple(hook.initial(driver, d)) for d in instance.depots]
                froms = list(tasks) + list(instance.depots)
                self.extra_inc = [[tuple(hook.increment(driver, f, t)) for t in tasks] for f in froms]

    def fit_mask(self, remaining: float) -> int:
        """Tasks whose load fits into ``remaining`` capacity."""
        return self.load_prefix[bisect_right(self.sorted_loads, remaining + _CAP_EPS)]

    def trim_mask(self, last: int, limit: float) -> int:
        """Tasks ``t`` with ``inc[last][t] >= limit``."""
        row = self._trim_rows.get(last)
        if row is None:
            r = self.inc[last]
            order = sorted(range(self.n), key=lambda i: (r[i], i))
            vals = [r[i] for i in order]
            # suffix masks: tasks from position k onwards
            suf = [0] * (self.n + 1)
            for k in range(self.n - 1, -1, -1):
                suf[k] = suf[k + 1] | (1 << order[k])
            row = (vals, suf)
            self._trim_rows[last] = row
        vals, suf = row
        return suf[bisect_left(vals, limit)]

    def umin_rows(self) -> list[list[tuple[float, int]]]:
        """Per target task, (increment, source task) pairs sorted ascending."""
        if self._umin_rows is None:
            n = self.n
            rows = []
            for t in range(n):
                col = [(self.inc[s][t], s) for s in range(n) if s != t]
                col.sort()
                rows.append(col)
            self._umin_rows = rows
        return self._umin_rows


_CONTEXTS: dict[int, dict[int, _DriverContext]] = {}


def _context(instance: Instance, driver: DriverSpec) -> _DriverContext:
    key = id(instance)
    per = _CONTEXTS.get(key)
    if per is None:
        per = {}
        _CONTEXTS[key] = per
        weakref.finalize(instance, _CONTEXTS.pop, key, None)
    ctx = per.get(driver.id)
    if ctx is None or ctx.driver is not driver:
        ctx = _DriverContext(instance, driver)
        per[driver.id] = ctx
    return ctx


class _Duals:
    """Dual values laid out by task position for one driver."""

    __slots__ = ("pi", "mu", "pi_asc")

    def __init__(self, ctx: _DriverContext, duals: DualPrices):
        td = duals.task_duals
        self.pi = [float(td.get(tid, 0.0)) for tid in ctx.task_ids]
        self.mu = float(duals.driver_duals.get(ctx.driver.id, 0.0))
        self.pi_asc = sorted(range(ctx.n), key=lambda i: (self.pi[i], i))


# -- labels ----------------------------------------------------------------


class Label:
    """Partial bundle path of one driver.

    ``last`` indexes the increment matrix rows: a task position, or
    ``n + depot position`` for an empty bundle.
    """

    __slots__ = (
        "ctx", "depot", "order", "last", "q", "detour", "extras", "cbar",
        "reach", "visited", "pi_sum", "score", "rc", "serial", "dead",
    )

    def __init__(self, ctx, depot, order, last, q, detour, extras, cbar, reach, visited, pi_sum, rc,
                 serial, score=None):
        self.ctx = ctx
        self.depot = depot
        self.order = order
        self.last = last
        self.q = q
        self.detour = detour
        self.extras = extras
        self.cbar = cbar
        self.reach = reach
        self.visited = visited
        self.pi_sum = pi_sum
        self.score = _linear_score(ctx, detour, len(order), extras, cbar) if score is None else score
        self.rc = rc
        self.serial = serial
        self.dead = False

    # spec-facing views
    @property
    def driver_id(self) -> int:
        return self.ctx.driver.id

    @property
    def depot_id(self) -> int:
        return self.ctx.depot_ids[self.depot]

    @property
    def task_order(self) -> tuple[int, ...]:
        ids = self.ctx.task_ids
        return tuple(ids[i] for i in self.order)

    @property
    def used_capacity(self) -> float:
        return self.q

    @property
    def predictors(self) -> PredictorVector:
        return PredictorVector(self.detour, float(len(self.order)), tuple(self.extras))

    @property
    def outsource_total(self) -> float:
        return self.cbar

    @property
    def reachable(self) -> frozenset[int]:
        ids = self.ctx.task_ids
        return frozenset(ids[i] for i in _bits(self.reach))

    @property
    def dual_task_sum(self) -> float:
        return self.pi_sum

    @property
    def reduced_cost(self) -> float:
        return self.rc

    def __repr__(self) -> str:
        return (
            f"Label(driver={self.driver_id}, depot={self.depot_id}, order={self.task_order}, "
            f"q={self.q:g}, rc={self.rc:.6g})"
        )


def _linear_score(ctx: _DriverContext, detour: float, size: int, extras, cbar: float) -> float:
    s = ctx.b1 * detour + ctx.b2 * size + ctx.gamma * cbar
    for c, v in zip(ctx.extra_coeffs, extras):
        s += c * v
    return s


def _w(ctx: _DriverContext, score: float) -> float:
    return lambert_w_of_exp(ctx.score0 + score - 1.0)


def _make_root(ctx: _DriverContext, depot: int, restrict: int, mu: float, serial: int) -> Label:
    reach = ctx.depot_masks[depot] & restrict & ctx.fit_mask(ctx.capacity)
    extras = ctx.extra_init[depot] if ctx.n_extra else ()
    return Label(ctx, depot, (), ctx.n + depot, 0.0, ctx.depot_init[depot], extras, 0.0,
                 reach, 0, 0.0, -mu, serial)


def _extend(lab: Label, t: int, d: _Duals, serial: int, with_rc: bool = True) -> Label:
    ctx = lab.ctx
    q = lab.q + ctx.loads[t]
    bit = 1 << t
    reach = lab.reach & ~bit & ctx.fit_mask(ctx.capacity - q)
    step = ctx.inc[lab.last][t]
    score = lab.score + ctx.b1 * step + ctx.b2 + ctx.gamma * ctx.costs[t]
    if ctx.n_extra:
        inc = ctx.extra_inc[lab.last][t]
        extras = tuple(a + b for a, b in zip(lab.extras, inc))
        for c, v in zip(ctx.extra_coeffs, inc):
            score += c * v
    else:
        extras = ()
    new = Label(ctx, lab.depot, lab.order + (t,), t, q, lab.detour + step, extras,
                lab.cbar + ctx.costs[t], reach, lab.visited | bit, lab.pi_sum + d.pi[t], None,
                serial, score)
    if with_rc:
        _set_rc(new, d)
    return new


def _set_rc(lab: Label, d: _Duals) -> None:
    ctx = lab.ctx
    lab.rc = lambert_w_of_exp(ctx.score0 + lab.score - 1.0) / ctx.gamma - lab.pi_sum - d.mu


def _kmax(lab: Label) -> int:
    ctx = lab.ctx
    rem = ctx.capacity - lab.q + _CAP_EPS
    reach = lab.reach
    k = 0
    total = 0.0
    for i in ctx.load_order:
        if reach >> i & 1:
            total += ctx.loads[i]
            if total > rem:
                break
            k += 1
    return k


def _first_in(order: list[int], mask: int) -> int:
    for i in order:
        if mask >> i & 1:
            return i
    raise EmptyReachableError("reachable set is empty")


def _u_min(lab: Label) -> float:
    """Smallest detour increment of any step of any extension."""
    ctx = lab.ctx
    reach = lab.reach
    row = ctx.inc[lab.last]
    best = min(row[t] for t in _bits(reach))
    if best <= 0.0:
        return 0.0
    rows = ctx.umin_rows()
    for t in _bits(reach):
        for val, s in rows[t]:
            if val >= best:
                break
            if reach >> s & 1:
                best = val
                break
        if best <= 0.0:
            return 0.0
    return best


def _extra_extrema(lab: Label) -> tuple[list[float], list[float]]:
    ctx = lab.ctx
    srcs = [lab.last] + list(_bits(lab.reach))
    tgts = list(_bits(lab.reach))
    hi = [-math.inf] * ctx.n_extra
    lo = [math.inf] * ctx.n_extra
    for s in srcs:
        row = ctx.extra_inc[s]
        for t in tgts:
            if s == t:
                continue
            for i, v in enumerate(row[t]):
                if v > hi[i]:
                    hi[i] = v
                if v < lo[i]:
                    lo[i] = v
    return hi, lo


def _optimistic_scores(lab: Label, d: _Duals, k_hi: int, u_min: float | None):
    """Yield ``(k, score_hat, pi_hat)`` for k = 1..k_hi."""
    ctx = lab.ctx
    cmax = ctx.costs[_first_in(ctx.cost_desc, lab.reach)]
    pimin = d.pi[_first_in(d.pi_asc, lab.reach)]
    umin = _u_min(lab) if u_min is None else u_min
    extra_step = 0.0
    if ctx.n_extra:
        hi, lo = _extra_extrema(lab)
        extra_step = sum(c * (h if c > 0 else l) for c, h, l in zip(ctx.extra_coeffs, hi, lo))
    size = len(lab.order)
    for k in range(1, k_hi + 1):
        score = (
            ctx.b1 * (lab.detour + k * umin)
            + ctx.b2 * (size + k)
            + ctx.gamma * (lab.cbar + k * cmax)
        )
        for c, v in zip(ctx.extra_coeffs, lab.extras):
            score += c * v
        score += k * extra_step
        yield k, score, lab.pi_sum + k * pimin, cmax


def _step_terms(lab: Label, d: _Duals) -> tuple[float, float, float]:
    """``(cmax, pimin, extra_step)`` over the reachable set of ``lab``."""
    ctx = lab.ctx
    cmax = ctx.costs[_first_in(ctx.cost_desc, lab.reach)]
    pimin = d.pi[_first_in(d.pi_asc, lab.reach)]
    extra_step = 0.0
    if ctx.n_extra:
        hi, lo = _extra_extrema(lab)
        extra_step = sum(c * (h if c > 0 else l) for c, h, l in zip(ctx.extra_coeffs, hi, lo))
    return cmax, pimin, extra_step


# The bound W(exp(z_k))/gamma - tau_k <= 0 is equivalent to
# h(k) = ln(gamma*tau_k) + gamma*tau_k - z_k >= 0 with z_k and tau_k affine
# in k.  h is concave in k, so it is smallest at k = 1 or k = k_max and
# only those two values need checking.


def _can_prune(lab: Label, d: _Duals, floor: float) -> bool:
    if not lab.reach:
        return True
    km = _kmax(lab)
    if km == 0:
        return True
    ctx = lab.ctx
    cmax, pimin, extra_step = _step_terms(lab, d)
    tau0 = lab.pi_sum + d.mu + floor
    if tau0 + pimin <= 0.0:
        return False
    g = ctx.gamma
    z0 = ctx.score0 + lab.score - 1.0
    step = ctx.b2 + g * cmax + extra_step
    # a zero detour step is tried first; the exact minimum increment is
    # only computed when that is not conclusive
    umin = 0.0
    while True:
        s = step + ctx.b1 * umin
        ok = True
        for k in (1, km) if km > 1 else (1,):
            gt = g * (tau0 + k * pimin)
            if math.log(gt) + gt < z0 + k * s:
                ok = False
                break
        if ok:
            return True
        if umin > 0.0 or ctx.b1 == 0.0:
            return False
        umin = _u_min(lab)
        if umin <= 0.0:
            return False


def _detour_limit(lab: Label, d: _Duals, km: int, floor: float) -> float:
    """Largest detour bound over k = 1..km; +inf when no restriction applies."""
    ctx = lab.ctx
    if km == 0 or not lab.reach or ctx.b1 >= 0.0:
        return math.inf
    cmax, pimin, extra_step = _step_terms(lab, d)
    tau0 = lab.pi_sum + d.mu + floor
    if tau0 + pimin <= 0.0:
        return math.inf
    g = ctx.gamma
    # numerator of the bound without the current detour term
    base = g * lab.cbar + ctx.score0 + ctx.b2 * len(lab.order) - 1.0
    for c, v in zip(ctx.extra_coeffs, lab.extras):
        base += c * v
    step = g * cmax + ctx.b2 + extra_step
    num = math.inf
    for k in (1, km) if km > 1 else (1,):
        gt = g * (tau0 + k * pimin)
        num = min(num, math.log(gt) + gt - base - k * step)
    return num / ctx.b1


def _trim(lab: Label, d: _Duals, floor: float) -> int:
    """Drop successors whose detour rules out the floor; returns #removed."""
    if not lab.reach:
        return 0
    limit = _detour_limit(lab, d, _kmax(lab), floor)
    if limit == math.inf:
        return 0
    drop = lab.ctx.trim_mask(lab.last, limit - lab.detour) & lab.reach
    if drop:
        lab.reach &= ~drop
        return bin(drop).count("1")
    return 0


def _trim_or_prune(lab: Label, d: _Duals, floor: float, prune: bool) -> tuple[int, bool | None]:
    """Trim ``lab`` and test it for pruning; returns ``(#removed, pruned)``.

    ``pruned`` is None when the full pruning test is still to be run.

    With a zero detour step the pruning slack at ``k`` is ``h_k``; a
    successor whose increment is at least ``min_k h_k / b1`` can never
    reach the floor, so the trim threshold falls out of the same terms.
    """
    reach = lab.reach
    ctx = lab.ctx
    km = _kmax(lab)
    if km == 0:
        return 0, prune
    cmax, pimin, extra_step = _step_terms(lab, d)
    tau0 = lab.pi_sum + d.mu + floor
    if tau0 + pimin <= 0.0:
        return 0, False
    g = ctx.gamma
    z0 = ctx.score0 + lab.score - 1.0
    step = ctx.b2 + g * cmax + extra_step
    hmin = math.inf
    for k in (1, km) if km > 1 else (1,):
        gt = g * (tau0 + k * pimin)
        h = math.log(gt) + gt - z0 - k * step
        if h < hmin:
            hmin = h
    if hmin >= 0.0:
        # no successor can reach the floor even with a zero detour step
        lab.reach = 0
        return bin(reach).count("1"), False
    removed = 0
    if ctx.b1 < 0.0:
        drop = ctx.trim_mask(lab.last, hmin / ctx.b1) & reach
        if drop:
            lab.reach = reach & ~drop
            removed = bin(drop).count("1")
            if not lab.reach:
                return removed, False
    return removed, None if prune else False


def _prop4(lp: Label, lf: Label) -> bool:
    return (
        lp.score >= lf.score
        and lp.pi_sum <= lf.pi_sum
        and (lf.reach & ~lp.reach) == 0
        and lp.q <= lf.q
    )


def _route(lp: Label, lf: Label) -> bool:
    return lp.rc > lf.rc and (lf.reach & ~lp.reach) == 0


# -- public operations -----------------------------------------------------


def _restrict_mask(ctx: _DriverContext, restrict: frozenset[int] | None) -> int:
    if restrict is None:
        return ctx.full_mask
    idx = ctx.instance.task_index
    m = 0
    for tid in restrict:
        i = idx.get(tid)
        if i is not None:
            m |= 1 << i
    return m


def init_labels(
    instance: Instance, driver: DriverSpec, duals: DualPrices, config: PricingConfig | None = None
) -> list[Label]:
    """One empty-bundle label per depot."""
    config = config or PricingConfig()
    ctx = _context(instance, driver)
    mu = float(duals.driver_duals.get(driver.id, 0.0))
    restrict = _restrict_mask(ctx, config.restrict_tasks)
    return [_make_root(ctx, j, restrict, mu, j) for j in range(len(instance.depots))]


def extend(instance: Instance, label: Label, task_id: int, duals: DualPrices) -> Label:
    """Append ``task_id`` to ``label``; the task must be reachable."""
    ctx = label.ctx
    t = instance.task_index.get(task_id)
    if t is None or not (label.reach >> t & 1):
        raise ValueError(f"task {task_id} is not reachable from {label!r}")
    return _extend(label, t, _Duals(ctx, duals), label.serial + 1)


def dominates(lp: Label, lf: Label) -> bool:
    """Score, dual, reachability and capacity dominance between two labels.

    Both labels must belong to the same driver and depot and end at the same
    task.
    """
    if lp.ctx.driver.id != lf.ctx.driver.id or lp.depot != lf.depot or lp.last != lf.last:
        raise ValueError("labels must share driver, depot and last task")
    return _prop4(lp, lf)


def route_dominates(lp: Label, lf: Label) -> bool:
    """Dominance between two orderings of the same task set ending at the same task."""
    if lp.ctx.driver.id != lf.ctx.driver.id or lp.visited != lf.visited:
        raise ValueError("labels must share driver and task set")
    if lp.last != lf.last:
        raise ValueError("labels must end at the same task")
    return _route(lp, lf)


def k_max(instance: Instance, label: Label) -> int:
    """Greedy bound on how many more tasks fit (lightest first)."""
    return _kmax(label)


def rc_upper_bound(instance: Instance, label: Label, duals: DualPrices, k: int) -> float:
    """Upper bound on the reduced cost of any extension by exactly ``k`` tasks."""
    if not label.reach:
        raise EmptyReachableError("label has no reachable task")
    if k < 1:
        raise ValueError("k must be >= 1")
    d = _Duals(label.ctx, duals)
    ctx = label.ctx
    for kk, score, pi_hat, _ in _optimistic_scores(label, d, k, None):
        if kk == k:
            return _w(ctx, score) / ctx.gamma - pi_hat - d.mu
    raise AssertionError("unreachable")


def can_prune(instance: Instance, label: Label, duals: DualPrices, floor: float = 0.0) -> bool:
    """True when no extension of ``label`` can have reduced cost above ``floor``."""
    return _can_prune(label, _Duals(label.ctx, duals), floor)


def detour_bound(instance: Instance, label: Label, duals: DualPrices, k: int, floor: float = 0.0) -> float:
    """Largest total detour of a ``k``-extension that can still exceed ``floor``."""
    ctx = label.ctx
    if ctx.b1 >= 0.0:
        raise ValueError("detour bound needs a negative detour coefficient")
    if not label.reach:
        raise EmptyReachableError("label has no reachable task")
    d = _Duals(ctx, duals)
    cmax = ctx.costs[_first_in(ctx.cost_desc, label.reach)]
    pimin = d.pi[_first_in(d.pi_asc, label.reach)]
    tau = label.pi_sum + k * pimin + d.mu + floor
    if tau <= 0.0:
        return math.inf
    gt = ctx.gamma * tau
    extras_term = sum(c * v for c, v in zip(ctx.extra_coeffs, label.extras))
    rest = ctx.score0 + ctx.b2 * (len(label.order) + k) + extras_term
    return (math.log(gt) + gt - ctx.gamma * (label.cbar + k * cmax) - rest + 1.0) / ctx.b1


def trim_successors(instance: Instance, label: Label, duals: DualPrices, floor: float = 0.0) -> Label:
    """Copy of ``label`` without successors whose detour rules out ``floor``."""
    new = Label(label.ctx, label.depot, label.order, label.last, label.q, label.detour,
                label.extras, label.cbar, label.reach, label.visited, label.pi_sum,
                label.rc, label.serial)
    _trim(new, _Duals(label.ctx, duals), floor)
    return new


def _to_column(lab: Label) -> Column | None:
    ctx = lab.ctx
    x = PredictorVector(lab.detour, float(len(lab.order)), tuple(lab.extras))
    offer = price_offer(ctx.driver.behavior, x, lab.cbar)
    if not offer.worthwhile:
        return None
    ids = ctx.task_ids
    return Column(
        ctx.driver.id,
        Bundle(ctx.depot_ids[lab.depot], tuple(ids[i] for i in lab.order)),
        offer.compensation,
        offer.acceptance_probability,
        offer.expected_savings,
        lab.rc,
        lab.detour,
    )


def price_driver(
    instance: Instance,
    driver: DriverSpec,
    duals: DualPrices,
    config: PricingConfig | None = None,
    *,
    stats: PricingStats | None = None,
    deadline: float | None = None,
) -> list[Column]:
    """Columns of positive (or, when enumerating, above-threshold) reduced cost.

    In enumeration mode only the best ordering found for each task set is
    returned, since orderings of one set share their constraint
    coefficients.
    """
    config = config or PricingConfig()
    stats = stats if stats is not None else PricingStats()
    ctx = _context(instance, driver)
    d = _Duals(ctx, duals)
    enum = config.enumeration_mode
    floor = config.enumeration_threshold if enum else 0.0
    use_dom = config.use_dominance or enum
    trim = config.use_detour_limit
    prune = config.use_rc_pruning
    limit = config.column_limit_per_driver
    cap = config.max_columns if enum else None

    serial = 0
    restrict = _restrict_mask(ctx, config.restrict_tasks)
    heap: list[tuple[float, int, Label]] = []
    buckets: dict[tuple, list[Label]] = {}
    out: list[Column] = []
    best_of_set: dict[int, Label] = {}

    g = ctx.gamma

    def dominated_by_bucket(lab: Label, bucket: list[Label]) -> bool:
        rf = lab.reach
        if enum:
            # one task set shares its dual sum, so reduced costs order as
            # scores do
            sc = lab.score
            for o in bucket:
                if o.score > sc and not (rf & ~o.reach):
                    return True
            return False
        sc, ps, qq = lab.score, lab.pi_sum, lab.q
        for o in bucket:
            if o.pi_sum <= ps and o.score + g * (ps - o.pi_sum) >= sc and o.q <= qq and not (rf & ~o.reach):
                return True
        return False

    def admit(lab: Label, prechecked: bool = False) -> bool:
        """Trim, dominance-check, emit and queue ``lab``; False stops the search."""
        bucket = None
        if use_dom and lab.order:
            key = (lab.visited, lab.last) if enum else (lab.depot, lab.last)
            bucket = buckets.get(key)
            if bucket is None:
                bucket = buckets[key] = []
            # a dominator of the untrimmed label also dominates it after
            # trimming, so this cheap test may come first
            if not prechecked and bucket and dominated_by_bucket(lab, bucket):
                stats.labels_dominated += 1
                return True
        pruned: bool | None = None if prune else False
        if trim and lab.reach:
            removed, pruned = _trim_or_prune(lab, d, floor, prune)
            stats.successors_trimmed += removed
            if removed and bucket and dominated_by_bucket(lab, bucket):
                stats.labels_dominated += 1
                return True
        if enum and not lab.reach and lab.order and lab.rc < floor:
            # a dead end below the floor is neither a column nor a useful
            # dominator
            stats.labels_pruned += 1
            return True
        if bucket is not None:
            rf = lab.reach
            keep = []
            if enum:
                sc = lab.score
                for o in bucket:
                    if sc > o.score and not (o.reach & ~rf):
                        o.dead = True
                        stats.labels_dominated += 1
                    else:
                        keep.append(o)
            else:
                sc, ps, qq = lab.score, lab.pi_sum, lab.q
                for o in bucket:
                    if ps <= o.pi_sum and sc + g * (o.pi_sum - ps) >= o.score and qq <= o.q and not (o.reach & ~rf):
                        o.dead = True
                        stats.labels_dominated += 1
                    else:
                        keep.append(o)
            keep.append(lab)
            bucket[:] = keep
        if lab.rc is None:
            _set_rc(lab, d)
        if enum:
            # only the best ordering of a task set is worth a column
            if lab.order and lab.rc >= floor:
                cur = best_of_set.get(lab.visited)
                if cur is None:
                    if cap is not None and len(best_of_set) >= cap:
                        stats.cap_hit = True
                        return False
                    best_of_set[lab.visited] = lab
                elif lab.rc > cur.rc:
                    best_of_set[lab.visited] = lab
        elif lab.order and lab.rc > RC_TOL:
            col = _to_column(lab)
            if col is not None:
                out.append(col)
                if len(out) >= limit:
                    stats.limit_hit = True
                    return False
        if not lab.reach:
            return True
        if pruned is None:
            pruned = _can_prune(lab, d, floor)
        if pruned:
            stats.labels_pruned += 1
            return True
        heapq.heappush(heap, (-lab.rc, lab.serial, lab))
        return True

    running = True
    for j in range(len(instance.depots)):
        root = _make_root(ctx, j, restrict, d.mu, serial)
        serial += 1
        stats.labels_created += 1
        if not admit(root):
            running = False
            break

    # fast path: dominance and a conservative trim are tested on the raw
    # fields of a child before a label object is built for it
    fast = use_dom and not ctx.n_extra
    loads, costs, pi, mu = ctx.loads, ctx.costs, d.pi, d.mu
    load_prefix, sorted_loads = ctx.load_prefix, ctx.sorted_loads
    cap_eps = ctx.capacity + _CAP_EPS
    b1, g, score0 = ctx.b1, ctx.gamma, ctx.score0
    gain = [ctx.b2 + g * c for c in costs]
    tbase = mu + floor
    check_every = 256
    budget = config.max_extensions
    while running and heap:
        _, _, lab = heapq.heappop(heap)
        if lab.dead:
            continue
        if budget is not None:
            if budget == 0:
                stats.truncated = True
                break
            budget -= 1
        stats.labels_extended += 1
        if deadline is not None and stats.labels_extended % check_every == 0:
            if time.monotonic() > deadline:
                stats.timed_out = True
                break
        if not fast:
            for t in _bits(lab.reach):
                new = _extend(lab, t, d, serial, enum)
                serial += 1
                stats.labels_created += 1
                if not admit(new):
                    running = False
                    break
            continue
        lr, lq, lsc, lps = lab.reach, lab.q, lab.score, lab.pi_sum
        dep, lorder, ldet, lcb, lvis = lab.depot, lab.order, lab.detour, lab.cbar, lab.visited
        row = ctx.inc[lab.last]
        # a child fits at most one task fewer than its parent and cannot see
        # a larger cost or a smaller dual, so the parent's terms give a
        # conservative trim threshold for every child
        ks = ()
        if trim and lr:
            kp = _kmax(lab) - 1
            if kp >= 1:
                cmax, pimin, _ = _step_terms(lab, d)
                tstep = ctx.b2 + g * cmax
                ks = (1, kp) if kp > 1 else (1,)
        r = lr
        while r:
            low = r & -r
            t = low.bit_length() - 1
            r ^= low
            q = lq + loads[t]
            reach = lr & ~low & load_prefix[bisect_right(sorted_loads, cap_eps - q)]
            step = row[t]
            sc = lsc + b1 * step + gain[t]
            ps = lps + pi[t]
            serial += 1
            stats.labels_created += 1
            z = score0 + sc - 1.0
            if reach and ks and pimin + ps + tbase > 0.0:
                tau0 = ps + tbase
                hmin = math.inf
                for k in ks:
                    gt = g * (tau0 + k * pimin)
                    h = math.log(gt) + gt - z - k * tstep
                    if h < hmin:
                        hmin = h
                if hmin >= 0.0:
                    drop = reach
                elif b1 < 0.0:
                    drop = ctx.trim_mask(t, hmin / b1) & reach
                else:
                    drop = 0
                if drop:
                    stats.successors_trimmed += bin(drop).count("1")
                    reach &= ~drop
            if enum:
                if not reach:
                    # a dead end below the floor is neither a column nor a
                    # useful dominator; W(e^z) >= x iff z >= x + ln x
                    gt = g * (ps + tbase)
                    if gt > 0.0 and z < gt + math.log(gt):
                        stats.labels_pruned += 1
                        continue
                vis = lvis | low
                bucket = buckets.get((vis, t))
                if bucket:
                    dominated = False
                    for o in bucket:
                        if o.score > sc and not (reach & ~o.reach):
                            dominated = True
                            break
                    if dominated:
                        stats.labels_dominated += 1
                        continue
                rc = lambert_w_of_exp(z) / g - ps - mu
                new = Label(ctx, dep, lorder + (t,), t, q, ldet + step, (), lcb + costs[t], reach,
                            vis, ps, rc, serial, sc)
            else:
                bucket = buckets.get((dep, t))
                if bucket:
                    dominated = False
                    for o in bucket:
                        if o.pi_sum <= ps and o.score + g * (ps - o.pi_sum) >= sc and o.q <= q and not (reach & ~o.reach):
                            dominated = True
                            break
                    if dominated:
                        stats.labels_dominated += 1
                        continue
                new = Label(ctx, dep, lorder + (t,), t, q, ldet + step, (), lcb + costs[t], reach,
                            lvis | low, ps, None, serial, sc)
            if not admit(new, True):
                running = False
                break
    if enum:
        for lab in best_of_set.values():
            col = _to_column(lab)
            if col is not None:
                out.append(col)
    stats.columns += len(out)
    return out
