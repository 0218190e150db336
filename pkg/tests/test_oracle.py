from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crowdship.bench import CLASS_COEFFICIENTS
from crowdship.model import DepotSpec, DriverSpec, Instance, Point, TaskSpec, validate_solution
from crowdship.oracle import OracleTooLargeError, driver_offers, exhaustive_optimum, search_offer
from crowdship.probability import PredictorVector

from oracles import direct_reduced_cost, feasible_orders, grid_best, path_detour
from tiny import tiny_instance


def best_orders(inst: Instance, driver_id: int) -> dict[frozenset[int], tuple[float, int, tuple[int, ...]]]:
    """Best (savings, depot, order) per task set by direct path evaluation."""
    best: dict[frozenset[int], tuple[float, int, tuple[int, ...]]] = {}
    for depot in inst.depots:
        for order in feasible_orders(inst, driver_id, depot.id):
            v = direct_reduced_cost(inst, driver_id, depot.id, order, {}, 0.0)
            key = frozenset(order)
            if key not in best or v > best[key][0]:
                best[key] = (v, depot.id, order)
    return best


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_driver_offers_match_direct_search(seed):
    inst = tiny_instance(seed, max_tasks=6)
    for w in inst.drivers:
        offers = driver_offers(inst, w)
        direct = best_orders(inst, w.id)
        assert set(offers) <= set(direct)
        for key, (v, depot_id, order) in direct.items():
            if key in offers:
                assert offers[key].expected_savings == pytest.approx(v, abs=1e-9)
            else:
                # no worthwhile offer: the best compensation on a fine grid is zero
                b = w.behavior
                cbar = sum(inst.task_by_id[t].outsource_cost for t in order)
                base = b.intercept + b.detour_coeff * path_detour(inst, w.id, depot_id, order) \
                    + b.size_coeff * len(order)
                c, _ = grid_best(base, b.compensation_coeff, cbar, step=1e-3)
                assert c == 0.0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_exhaustive_optimum_matches_assignment_enumeration(seed):
    inst = tiny_instance(seed, max_tasks=6)
    sol = exhaustive_optimum(inst)
    assert sol.status == "optimal"
    assert validate_solution(inst, sol, tol=1e-9) == []
    menus = [[None] + list(driver_offers(inst, w).values()) for w in inst.drivers]
    best = 0.0
    for pick in itertools.product(*menus):
        chosen = [o for o in pick if o is not None]
        tasks = [t for o in chosen for t in o.bundle.task_order]
        if len(tasks) == len(set(tasks)):
            best = max(best, sum(o.expected_savings for o in chosen))
    assert sol.objective == pytest.approx(best, abs=1e-12)


def test_search_offer_against_grid():
    b = CLASS_COEFFICIENTS[2]
    x = PredictorVector(1.2, 2.0)
    c, p, v = search_offer(b, x, 9.9)
    gc, gv = grid_best(b.base_score(x), b.compensation_coeff, 9.9)
    assert abs(c - gc) <= 2e-4 and v == pytest.approx(gv, abs=1e-6)
    assert 0.0 < p < 1.0


def test_search_offer_worthless():
    b = CLASS_COEFFICIENTS[1]
    assert search_offer(b, PredictorVector(30.0, 1.0), 0.01) == (0.0, 0.0, 0.0)


def test_size_guard():
    c = CLASS_COEFFICIENTS[1]
    tasks = tuple(TaskSpec(i, Point(i % 3, i // 3), 1.0, 4.95) for i in range(9))
    w = DriverSpec(1, Point(0, 0), Point(1, 1), 10.0, c)
    inst = Instance(tasks, (DepotSpec(0, Point(0, 0), {t.id for t in tasks}),), (w,))
    with pytest.raises(OracleTooLargeError):
        exhaustive_optimum(inst)
    drivers = tuple(DriverSpec(k, Point(0, 0), Point(1, 1), 10.0, c) for k in range(4))
    inst = Instance(tasks[:2], (DepotSpec(0, Point(0, 0), {0, 1}),), drivers)
    with pytest.raises(OracleTooLargeError):
        exhaustive_optimum(inst)
