"""Independent reference computations used as test oracles.

Nothing here calls into the closed-form pricing formulas: values are
obtained by bisection, grid search, direct path-length sums or exhaustive
enumeration.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from crowdship.model import Instance


def bisect_root(f, lo: float, hi: float, tol: float = 1e-15, iters: int = 2000) -> float:
    """Root of an increasing function on ``[lo, hi]`` by bisection (relative tolerance)."""
    flo = f(lo)
    if flo > 0:
        raise ValueError("no sign change")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) <= 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * abs(mid):
            break
    return 0.5 * (lo + hi)


def lambert_bisect(x: float) -> float:
    """``w >= 0`` with ``w * exp(w) = x``."""
    if x == 0:
        return 0.0
    hi = max(1.0, math.log(x) + 1.0)
    return bisect_root(lambda w: w * math.exp(w) - x, 0.0, hi)


def w_of_exp_bisect(z: float) -> float:
    """``w > 0`` with ``w + ln(w) = z``."""
    hi = max(2.0, z + 2.0)
    return bisect_root(lambda w: w + math.log(w) - z, 1e-300, hi)


def logistic(u):
    return 1.0 / (1.0 + np.exp(-u))


def grid_best(base_score: float, gamma: float, cbar: float, step: float = 1e-4) -> tuple[float, float]:
    """Best ``(compensation, savings)`` of ``P(C)(cbar - C)`` over a grid on ``[0, cbar]``."""
    c = np.arange(0.0, cbar + step / 2, step)
    v = logistic(base_score + gamma * c) * (cbar - c)
    i = int(np.argmax(v))
    return float(c[i]), float(v[i])


def path_detour(instance: Instance, driver_id: int, depot_id: int, order) -> float:
    """Total path length ``origin -> depot -> tasks -> destination`` minus the direct trip."""
    drv = instance.driver_by_id[driver_id]
    pts = [drv.origin, instance.depot_by_id[depot_id].location]
    pts += [instance.task_by_id[t].location for t in order]
    pts.append(drv.destination)
    length = sum(math.hypot(a.x - b.x, a.y - b.y) for a, b in zip(pts, pts[1:]))
    return length - math.hypot(drv.origin.x - drv.destination.x, drv.origin.y - drv.destination.y)


def direct_reduced_cost(instance: Instance, driver_id: int, depot_id: int, order, pi, mu) -> float:
    """Best expected savings of an ordered bundle minus duals, by fine numeric search.

    Golden-section search on the log-concave savings curve; exact to far
    below the tolerances used in the tests.
    """
    drv = instance.driver_by_id[driver_id]
    b = drv.behavior
    cbar = sum(instance.task_by_id[t].outsource_cost for t in order)
    a = b.intercept + b.detour_coeff * path_detour(instance, driver_id, depot_id, order) + b.size_coeff * len(order)
    g = b.compensation_coeff

    def f(c):
        return float(logistic(a + g * c)) * (cbar - c)

    lo, hi = 0.0, cbar
    r = (math.sqrt(5) - 1) / 2
    x1, x2 = hi - r * (hi - lo), lo + r * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(200):
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - r * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + r * (hi - lo)
            f2 = f(x2)
    best = f(0.5 * (lo + hi))
    return best - sum(pi.get(t, 0.0) for t in order) - mu


def feasible_orders(instance: Instance, driver_id: int, depot_id: int, start=(), reachable=None,
                    used: float = 0.0):
    """Every elementary capacity-feasible continuation of ``start`` (non-empty suffixes)."""
    drv = instance.driver_by_id[driver_id]
    depot = instance.depot_by_id[depot_id]
    pool = sorted(reachable if reachable is not None else depot.servable_tasks)
    load = {t.id: t.load for t in instance.tasks}

    def rec(seq, q):
        for t in pool:
            if t in seq or q + load[t] > drv.capacity + 1e-9:
                continue
            nxt = seq + (t,)
            yield nxt
            yield from rec(nxt, q + load[t])

    yield from rec(tuple(start), used)


def vertex_lp_max(c, rows, b, ub):
    """Maximum of ``c.x`` over ``{A x <= b, 0 <= x <= ub}`` by vertex enumeration."""
    n = len(c)
    A = np.zeros((len(rows), n))
    for i, row in enumerate(rows):
        for j, a in row:
            A[i, j] += a
    cons = [(A[i], b[i]) for i in range(len(rows))]
    cons += [(-np.eye(n)[j], 0.0) for j in range(n)]
    cons += [(np.eye(n)[j], ub[j]) for j in range(n) if math.isfinite(ub[j])]
    G = np.array([g for g, _ in cons])
    h = np.array([v for _, v in cons])
    best = -math.inf
    for idx in itertools.combinations(range(len(cons)), n):
        M = G[list(idx)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, h[list(idx)])
        if np.all(G @ x <= h + 1e-9):
            best = max(best, float(np.dot(c, x)))
    return best


def brute_binary_max(c, rows, b):
    """Maximum of ``c.x`` over binary ``x`` with ``A x <= b``."""
    n = len(c)
    best = -math.inf
    for bits in itertools.product((0, 1), repeat=n):
        ok = all(sum(a * bits[j] for j, a in row) <= bi + 1e-9 for row, bi in zip(rows, b))
        if ok:
            best = max(best, sum(ci * x for ci, x in zip(c, bits)))
    return best
