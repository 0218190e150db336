"""Brute-force reference optimum for very small instances.

Every capacity-feasible ordered bundle of every driver is evaluated from
scratch: predictors come from the geometric path definition and the best
compensation is found by golden-section search on the expected savings,
without the closed-form pricing formula.  An exact set-packing search over
drivers then picks at most one bundle per driver with disjoint task sets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .geometry import bundle_predictors
from .model import Bundle, DriverSpec, Instance, Offer, Solution
from .probability import BehaviorCoefficients, PredictorVector

__all__ = [
    "MAX_ORACLE_TASKS",
    "MAX_ORACLE_DRIVERS",
    "OracleTooLargeError",
    "search_offer",
    "driver_offers",
    "exhaustive_optimum",
]

MAX_ORACLE_TASKS = 8
MAX_ORACLE_DRIVERS = 3

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_SEARCH_STEPS = 120


class OracleTooLargeError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class _Candidate:
    bundle: Bundle
    predictors: PredictorVector
    outsource_total: float


def _sigmoid(u: np.ndarray) -> np.ndarray:
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    e = np.exp(u[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _golden_max(a: np.ndarray, gamma: float, cbar: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Maximise ``sigmoid(a + gamma*C) * (cbar - C)`` over ``C in [0, cbar]``.

    The objective is log-concave in ``C`` and therefore unimodal, so a
    golden-section search converges to the maximiser.  Returns the
    maximising compensation and its acceptance probability.
    """
    lo = np.zeros_like(cbar)
    hi = cbar.copy()

    def f(c: np.ndarray) -> np.ndarray:
        return _sigmoid(a + gamma * c) * (cbar - c)

    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(_SEARCH_STEPS):
        left = f1 >= f2
        # keep [lo, x2] where the left probe is better, else [x1, hi]
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        nx1 = hi - _GOLDEN * (hi - lo)
        nx2 = lo + _GOLDEN * (hi - lo)
        x1, x2 = nx1, nx2
        f1, f2 = f(x1), f(x2)
    c = 0.5 * (lo + hi)
    return c, _sigmoid(a + gamma * c)


def search_offer(
    coeffs: BehaviorCoefficients, x: PredictorVector, outsource_total: float
) -> tuple[float, float, float]:
    """``(compensation, probability, expected_savings)`` by numeric search.

    An offer whose savings do not increase when moving away from zero
    compensation is worthless and reported as all zeros.
    """
    c, p = _search_many(coeffs, np.array([coeffs.base_score(x)]), np.array([outsource_total]))
    return float(c[0]), float(p[0]), float(p[0] * (outsource_total - c[0]))


def _search_many(
    coeffs: BehaviorCoefficients, a: np.ndarray, cbar: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    g = coeffs.compensation_coeff
    c, p = _golden_max(a, g, cbar)
    # d/dC of the savings at C = 0 is g*P0*(1-P0)*cbar - P0
    p0 = _sigmoid(a)
    useless = g * (1.0 - p0) * cbar <= 1.0
    c = np.where(useless, 0.0, c)
    p = np.where(useless, 0.0, p)
    return c, p


def _candidates(instance: Instance, driver: DriverSpec) -> list[_Candidate]:
    cost = {t.id: t.outsource_cost for t in instance.tasks}
    load = {t.id: t.load for t in instance.tasks}
    out = []
    for depot in instance.depots:
        ids = sorted(depot.servable_tasks)
        for r in range(1, len(ids) + 1):
            for combo in itertools.combinations(ids, r):
                if math.fsum(load[t] for t in combo) > driver.capacity + 1e-9:
                    continue
                total = math.fsum(cost[t] for t in combo)
                for perm in itertools.permutations(combo):
                    b = Bundle(depot.id, perm)
                    out.append(_Candidate(b, bundle_predictors(instance, driver, b), total))
    return out


def driver_offers(instance: Instance, driver: DriverSpec) -> dict[frozenset[int], Offer]:
    """Best worthwhile offer of ``driver`` for each task set."""
    cands = _candidates(instance, driver)
    if not cands:
        return {}
    coeffs = driver.behavior
    a = np.array([coeffs.base_score(c.predictors) for c in cands])
    cbar = np.array([c.outsource_total for c in cands])
    comp, prob = _search_many(coeffs, a, cbar)
    best: dict[frozenset[int], Offer] = {}
    for cand, c, p, cb in zip(cands, comp.tolist(), prob.tolist(), cbar.tolist()):
        if p <= 0.0:
            continue
        value = p * (cb - c)
        key = frozenset(cand.bundle.task_order)
        cur = best.get(key)
        if cur is None or value > cur.expected_savings:
            best[key] = Offer(driver.id, cand.bundle, c, p, value, cand.predictors.detour)
    return best


def exhaustive_optimum(instance: Instance) -> Solution:
    """Maximum expected savings over all feasible offer assignments."""
    if len(instance.tasks) > MAX_ORACLE_TASKS or len(instance.drivers) > MAX_ORACLE_DRIVERS:
        raise OracleTooLargeError(
            f"oracle handles at most {MAX_ORACLE_TASKS} tasks and {MAX_ORACLE_DRIVERS} drivers"
        )
    idx = {t.id: i for i, t in enumerate(instance.tasks)}
    per_driver = []
    for driver in instance.drivers:
        offers = driver_offers(instance, driver)
        per_driver.append([(sum(1 << idx[t] for t in key), o) for key, o in offers.items()])

    # best[mask] = (value, offers) using tasks exactly inside ``mask`` at most
    best: dict[int, tuple[float, tuple[Offer, ...]]] = {0: (0.0, ())}
    for options in per_driver:
        nxt = dict(best)
        for used, (val, chosen) in best.items():
            for m, offer in options:
                if m & used:
                    continue
                key = used | m
                cand = val + offer.expected_savings
                if key not in nxt or cand > nxt[key][0]:
                    nxt[key] = (cand, chosen + (offer,))
        best = nxt
    value, chosen = max(best.values(), key=lambda vc: vc[0])
    return Solution.from_offers(chosen, bound=value, status="optimal")
