"""Bounded-variable revised simplex and best-first branch and bound.

Problems have the form ``max c.y  s.t.  A y <= b,  l <= y <= u`` with
``l = 0`` for the caller (branching changes bounds internally).  Every row
gets a slack ``s_i >= 0``.  The basis inverse is kept dense and updated in
product form; it is rebuilt from scratch every :data:`REFACTOR_EVERY`
pivots.  Infeasible starting bases are repaired by a phase 1 that
minimises the sum of bound violations of the basic variables, so a solve
may start from any basis (in particular from the parent basis of a
branch-and-bound node).

Text dump format (see :func:`dump_lp`)::

    LP <n_vars> <n_rows>
    max <c_0> <c_1> ...
    ub <u_0> <u_1> ...          (inf for unbounded variables)
    row <b_i> <j>:<a_ij> ...    (one line per constraint, a.y <= b_i)
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import format_real

__all__ = [
    "LinearProgram",
    "LpResult",
    "MilpResult",
    "SimplexSolver",
    "solve_lp",
    "solve_milp",
    "dump_lp",
]

PRIMAL_TOL = 1e-9
DUAL_TOL = 1e-9
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 100
BLAND_AFTER = 10_000
INT_TOL = 1e-6
HEURISTIC_EVERY = 10


@dataclass(slots=True)
class LinearProgram:
    """``max c.y`` subject to ``a_i.y <= b_i`` and ``0 <= y <= u``.

    ``constraint_rows[i]`` is a sparse row given as ``(variable, coefficient)``
    pairs.
    """

    objective_coeffs: list[float]
    constraint_rows: list[list[tuple[int, float]]]
    row_bounds: list[float]
    variable_upper_bounds: list[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        n = len(self.objective_coeffs)
        if not self.variable_upper_bounds:
            self.variable_upper_bounds = [math.inf] * n
        if len(self.variable_upper_bounds) != n:
            raise ValueError("variable_upper_bounds has the wrong length")
        if len(self.constraint_rows) != len(self.row_bounds):
            raise ValueError("constraint_rows and row_bounds differ in length")
        for b in self.row_bounds:
            if not math.isfinite(b):
                raise ValueError("row bounds must be finite")
        for u in self.variable_upper_bounds:
            if u < 0:
                raise ValueError("upper bounds must be >= 0")
        for row in self.constraint_rows:
            for j, _ in row:
                if not 0 <= j < n:
                    raise ValueError(f"row references unknown variable {j}")

    @property
    def n_vars(self) -> int:
        return len(self.objective_coeffs)

    @property
    def n_rows(self) -> int:
        return len(self.row_bounds)

    @property
    def variable_lower_bounds(self) -> list[float]:
        return [0.0] * self.n_vars

    @classmethod
    def from_columns(
        cls,
        n_rows: int,
        row_bounds: Sequence[float],
        objective: Sequence[float],
        columns: Sequence[Sequence[tuple[int, float]]],
        upper_bounds: Sequence[float] | None = None,
    ) -> LinearProgram:
        rows: list[list[tuple[int, float]]] = [[] for _ in range(n_rows)]
        for j, col in enumerate(columns):
            for i, a in col:
                rows[i].append((j, float(a)))
        ub = list(upper_bounds) if upper_bounds is not None else []
        return cls(list(map(float, objective)), rows, list(map(float, row_bounds)), ub)


@dataclass(slots=True)
class LpResult:
    status: str
    primal: list[float]
    objective: float
    row_duals: list[float]
    reduced_costs: list[float] = field(default_factory=list)
    iterations: int = 0


@dataclass(slots=True)
class MilpResult:
    status: str
    primal: list[float]
    objective: float
    bound: float
    nodes: int = 0


def dump_lp(lp: LinearProgram) -> str:
    out = [f"LP {lp.n_vars} {lp.n_rows}"]
    out.append(" ".join(["max"] + [format_real(c) for c in lp.objective_coeffs]))
    out.append(" ".join(["ub"] + ["inf" if math.isinf(u) else format_real(u) for u in lp.variable_upper_bounds]))
    for row, b in zip(lp.constraint_rows, lp.row_bounds):
        out.append(" ".join(["row", format_real(b)] + [f"{j}:{format_real(a)}" for j, a in row]))
    return "\n".join(out) + "\n"


class SimplexSolver:
    """Reusable simplex context; columns may be added between solves.

    Basis entries encode structural variable ``j`` as ``j`` and the slack
    of row ``i`` as ``-(i + 1)``.
    """

    def __init__(self, lp: LinearProgram):
        m = lp.n_rows
        self.m = m
        self.b = np.array(lp.row_bounds, dtype=float)
        self.n = 0
        self.c = np.zeros(0)
        self.lb = np.zeros(0)
        self.ub = np.zeros(0)
        self.at_upper = np.zeros(0, dtype=bool)
        self.x = np.zeros(0)
        self._col_idx: list[np.ndarray] = []
        self._col_val: list[np.ndarray] = []
        self._dirty = True
        cols: list[list[tuple[int, float]]] = [[] for _ in range(lp.n_vars)]
        for i, row in enumerate(lp.constraint_rows):
            for j, a in row:
                cols[j].append((i, a))
        self.basis = [-(i + 1) for i in range(m)]
        self.pos = np.full(0, -1, dtype=np.int64)
        self.slack_pos = np.arange(m, dtype=np.int64)
        self.binv = np.eye(m)
        self.xb = np.zeros(m)
        self.iterations = 0
        self._since_refactor = 0
        self._degenerate = 0
        self.add_columns(lp.objective_coeffs, cols, lp.variable_upper_bounds)

    # -- structure ---------------------------------------------------------

    def add_columns(
        self,
        objective: Sequence[float],
        columns: Sequence[Sequence[tuple[int, float]]],
        upper_bounds: Sequence[float] | None = None,
    ) -> list[int]:
        """Append columns as nonbasic at zero; the basis stays valid."""
        k = len(columns)
        if len(objective) != k:
            raise ValueError("objective and columns differ in length")
        ub = np.full(k, math.inf) if upper_bounds is None else np.array(upper_bounds, dtype=float)
        start = self.n
        for col in columns:
            # merge duplicate row entries
            acc: dict[int, float] = {}
            for i, a in col:
                if not 0 <= i < self.m:
                    raise ValueError(f"column references unknown row {i}")
                acc[i] = acc.get(i, 0.0) + float(a)
            rows = sorted(acc)
            self._col_idx.append(np.array(rows, dtype=np.int64))
            self._col_val.append(np.array([acc[i] for i in rows], dtype=float))
        self.c = np.concatenate([self.c, np.asarray(objective, dtype=float)])
        self.lb = np.concatenate([self.lb, np.zeros(k)])
        self.ub = np.concatenate([self.ub, ub])
        self.at_upper = np.concatenate([self.at_upper, np.zeros(k, dtype=bool)])
        self.x = np.concatenate([self.x, np.zeros(k)])
        self.pos = np.concatenate([self.pos, np.full(k, -1, dtype=np.int64)])
        self.n += k
        self._dirty = True
        return list(range(start, self.n))

    def _entries(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self._dirty:
            if self.n:
                self._ent_row = np.concatenate(self._col_idx) if self._col_idx else np.zeros(0, np.int64)
                self._ent_val = np.concatenate(self._col_val)
                lens = [len(a) for a in self._col_idx]
                self._ent_col = np.repeat(np.arange(self.n, dtype=np.int64), lens)
            else:
                self._ent_row = np.zeros(0, np.int64)
                self._ent_val = np.zeros(0)
                self._ent_col = np.zeros(0, np.int64)
            self._dirty = False
        return self._ent_row, self._ent_col, self._ent_val

    def set_bounds(self, j: int, lower: float, upper: float) -> None:
        if lower > upper:
            raise ValueError("lower bound exceeds upper bound")
        self.lb[j] = lower
        self.ub[j] = upper
        if self.pos[j] < 0:
            if math.isinf(upper):
                self.at_upper[j] = False
            self.x[j] = self.ub[j] if self.at_upper[j] else self.lb[j]

    def set_all_bounds(self, lower: np.ndarray, upper: np.ndarray) -> None:
        self.lb = np.array(lower, dtype=float)
        self.ub = np.array(upper, dtype=float)
        self.at_upper &= np.isfinite(self.ub)

    def snapshot(self) -> tuple[tuple[int, ...], np.ndarray]:
        return tuple(self.basis), self.at_upper.copy()

    def restore(self, snap: tuple[tuple[int, ...], np.ndarray]) -> None:
        basis, at_upper = snap
        self.basis = list(basis)
        self.at_upper = np.concatenate([at_upper, np.zeros(self.n - len(at_upper), dtype=bool)])
        self.pos[:] = -1
        self.slack_pos[:] = -1
        for r, v in enumerate(self.basis):
            if v >= 0:
                self.pos[v] = r
            else:
                self.slack_pos[-v - 1] = r
        self.at_upper &= np.isfinite(self.ub)
        self._refactor()

    # -- linear algebra ----------------------------------------------------

    def _column(self, v: int) -> np.ndarray:
        col = np.zeros(self.m)
        if v >= 0:
            col[self._col_idx[v]] = self._col_val[v]
        else:
            col[-v - 1] = 1.0
        return col

    def _refactor(self) -> None:
        if self.m:
            bmat = np.column_stack([self._column(v) for v in self.basis])
            self.binv = np.linalg.inv(bmat)
        self._since_refactor = 0
        self._recompute_primal()

    def _recompute_primal(self) -> None:
        nb = self.pos < 0
        self.x[nb] = np.where(self.at_upper[nb], self.ub[nb], self.lb[nb])
        ent_row, ent_col, ent_val = self._entries()
        xn = np.where(nb, self.x, 0.0)
        rhs = self.b - np.bincount(ent_row, weights=ent_val * xn[ent_col], minlength=self.m)
        self.xb = self.binv @ rhs if self.m else np.zeros(0)
        self._scatter_basic()

    def _scatter_basic(self) -> None:
        for r, v in enumerate(self.basis):
            if v >= 0:
                self.x[v] = self.xb[r]

    def _basic_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.zeros(self.m)
        hi = np.full(self.m, math.inf)
        for r, v in enumerate(self.basis):
            if v >= 0:
                lo[r] = self.lb[v]
                hi[r] = self.ub[v]
        return lo, hi

    def _duals(self, cb: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Row prices and structural reduced costs for basic costs ``cb``."""
        y = cb @ self.binv if self.m else np.zeros(0)
        ent_row, ent_col, ent_val = self._entries()
        ya = np.bincount(ent_col, weights=ent_val * y[ent_row], minlength=self.n)
        return y, ya

    # -- simplex -----------------------------------------------------------

    def _choose_entering(self, d: np.ndarray, d_slack: np.ndarray, bland: bool) -> tuple[int, float] | None:
        nonbasic = self.pos < 0
        movable = self.ub > self.lb
        up = nonbasic & movable & ~self.at_upper & (d > DUAL_TOL)
        down = nonbasic & movable & self.at_upper & (d < -DUAL_TOL)
        elig = up | down
        s_elig = (self.slack_pos < 0) & (d_slack > DUAL_TOL)
        if bland:
            js = np.flatnonzero(elig)
            if js.size:
                j = int(js[0])
                return j, (1.0 if up[j] else -1.0)
            iss = np.flatnonzero(s_elig)
            if iss.size:
                return -(int(iss[0]) + 1), 1.0
            return None
        best: tuple[int, float] | None = None
        best_val = 0.0
        if elig.any():
            score = np.where(elig, np.abs(d), -1.0)
            j = int(np.argmax(score))
            best, best_val = (j, 1.0 if up[j] else -1.0), score[j]
        if s_elig.any():
            score = np.where(s_elig, d_slack, -1.0)
            i = int(np.argmax(score))
            if score[i] > best_val:
                best = (-(i + 1), 1.0)
        return best

    def _var_bounds(self, v: int) -> tuple[float, float]:
        if v >= 0:
            return float(self.lb[v]), float(self.ub[v])
        return 0.0, math.inf

    def _iterate(self, phase1: bool) -> str:
        """Run simplex iterations; returns 'optimal', 'unbounded' or 'infeasible'."""
        m = self.m
        while True:
            if self._since_refactor >= REFACTOR_EVERY:
                self._refactor()
            lo, hi = self._basic_bounds()
            below = self.xb < lo - PRIMAL_TOL
            above = self.xb > hi + PRIMAL_TOL
            if phase1:
                if not (below.any() or above.any()):
                    return "optimal"
                cb = below.astype(float) - above.astype(float)
                y, ya = self._duals(cb)
                d = -ya
            else:
                cb = np.array([self.c[v] if v >= 0 else 0.0 for v in self.basis])
                y, ya = self._duals(cb)
                d = self.c - ya
                below = np.zeros(m, dtype=bool)
                above = np.zeros(m, dtype=bool)
            d_slack = -y
            bland = self._degenerate >= BLAND_AFTER
            pick = self._choose_entering(d, d_slack, bland)
            if pick is None:
                return "infeasible" if phase1 else "optimal"
            q, sgn = pick
            alpha = self.binv @ self._column(q) if q < 0 else (
                self.binv[:, self._col_idx[q]] @ self._col_val[q]
            )
            delta = -sgn * alpha
            t = np.full(m, math.inf)
            hit_upper = np.zeros(m, dtype=bool)
            dec = delta < -PIVOT_TOL
            inc = delta > PIVOT_TOL
            feas = ~(below | above)
            # decreasing basics stop at their lower bound (or at the upper
            # bound they currently violate)
            sel = dec & feas
            t[sel] = (self.xb[sel] - lo[sel]) / -delta[sel]
            sel = dec & above
            t[sel] = (self.xb[sel] - hi[sel]) / -delta[sel]
            hit_upper[sel] = True
            sel = inc & feas & np.isfinite(hi)
            t[sel] = (hi[sel] - self.xb[sel]) / delta[sel]
            hit_upper[sel] = True
            sel = inc & below
            t[sel] = (lo[sel] - self.xb[sel]) / delta[sel]
            np.maximum(t, 0.0, out=t)
            lq, uq = self._var_bounds(q)
            t_flip = uq - lq
            tmin = float(t.min()) if m else math.inf
            if t_flip <= tmin:
                if math.isinf(t_flip):
                    return "unbounded"
                # bound flip: no basis change
                step = t_flip
                self.xb += delta * step
                self.at_upper[q] = not self.at_upper[q]
                self.x[q] = self.ub[q] if self.at_upper[q] else self.lb[q]
                self._scatter_basic()
                self.iterations += 1
                continue
            ties = np.flatnonzero(t <= tmin + 1e-12)
            if bland:
                codes = [self.basis[r] for r in ties]
                order = [(v if v >= 0 else self.n + (-v - 1), r) for v, r in zip(codes, ties)]
                r = int(min(order)[1])
            else:
                r = int(ties[np.argmax(np.abs(delta[ties]))])
            step = tmin
            if step <= 1e-12:
                self._degenerate += 1
            self.xb += delta * step
            leaving = self.basis[r]
            new_val = (self.x[q] if q >= 0 else 0.0) + sgn * step
            # pivot
            piv = alpha[r]
            row_r = self.binv[r] / piv
            self.binv -= np.outer(alpha, row_r)
            self.binv[r] = row_r
            self.xb[r] = new_val
            self.basis[r] = q
            if q >= 0:
                self.pos[q] = r
                self.at_upper[q] = False
            else:
                self.slack_pos[-q - 1] = r
            if leaving >= 0:
                self.pos[leaving] = -1
                self.at_upper[leaving] = bool(hit_upper[r])
                self.x[leaving] = self.ub[leaving] if hit_upper[r] else self.lb[leaving]
            else:
                self.slack_pos[-leaving - 1] = -1
            self._scatter_basic()
            self.iterations += 1
            self._since_refactor += 1

    def solve(self) -> LpResult:
        self._refactor()
        self._degenerate = 0
        status = self._iterate(phase1=True)
        if status == "infeasible":
            return LpResult("infeasible", self.x.tolist(), math.nan, [0.0] * self.m, [], self.iterations)
        self._degenerate = 0
        status = self._iterate(phase1=False)
        self._refactor()
        # a final pass absorbs any drift from the product-form updates
        status = self._iterate(phase1=True)
        if status != "infeasible":
            status = self._iterate(phase1=False)
        if status == "unbounded":
            return LpResult("unbounded", self.x.tolist(), math.inf, [0.0] * self.m, [], self.iterations)
        if status == "infeasible":
            return LpResult("infeasible", self.x.tolist(), math.nan, [0.0] * self.m, [], self.iterations)
        cb = np.array([self.c[v] if v >= 0 else 0.0 for v in self.basis])
        y, ya = self._duals(cb)
        y = np.where((y < 0) & (y > -1e-9), 0.0, y)
        d = self.c - ya
        obj = float(self.c @ self.x)
        return LpResult("optimal", self.x.tolist(), obj, y.tolist(), d.tolist(), self.iterations)


def solve_lp(lp: LinearProgram) -> LpResult:
    return SimplexSolver(lp).solve()


class _Rounder:
    """Round-down-and-fill heuristic for pure binary programs."""

    def __init__(self, lp: LinearProgram):
        n = lp.n_vars
        self.c = np.array(lp.objective_coeffs, dtype=float)
        self.b = np.array(lp.row_bounds, dtype=float)
        self.ub = np.array(lp.variable_upper_bounds, dtype=float)
        cols: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        for i, row in enumerate(lp.constraint_rows):
            for j, a in row:
                cols[j].append((i, a))
        self.cols = cols
        self.rows = np.array([i for col in cols for i, _ in col], dtype=np.int64)
        self.vals = np.array([a for col in cols for _, a in col], dtype=float)
        self.owner = np.repeat(np.arange(n, dtype=np.int64), [len(col) for col in cols])
        self.order = [j for j in sorted(range(n), key=lambda j: (-self.c[j], j)) if self.c[j] > 0]

    def activity(self, x: np.ndarray) -> np.ndarray:
        return np.bincount(self.rows, weights=self.vals * x[self.owner], minlength=len(self.b))

    def feasible(self, x: np.ndarray) -> bool:
        return bool(np.all(self.activity(x) <= self.b + 1e-9))

    def __call__(self, x: Sequence[float]) -> list[float] | None:
        cand = np.clip(np.floor(np.asarray(x, dtype=float) + INT_TOL), 0.0, 1.0)
        slack = self.b - self.activity(cand)
        if np.any(slack < -1e-9):
            return None
        slack = slack.tolist()
        chosen = cand.tolist()
        for j in self.order:
            if chosen[j] >= 1.0 or self.ub[j] < 1.0:
                continue
            col = self.cols[j]
            if all(slack[i] - a >= -1e-9 for i, a in col):
                chosen[j] = 1.0
                for i, a in col:
                    slack[i] -= a
        return chosen


class _PairBrancher:
    """Row-pair branching for pure 0/1 packing programs.

    In an integer solution two rows are either covered by one common
    column or not.  The first child forbids columns that cover exactly one
    of the rows, the second forbids columns that cover both.  A pair is
    only used when both children cut off the current fractional point.
    """

    def __init__(self, lp: LinearProgram):
        n = lp.n_vars
        col_rows: list[list[int]] = [[] for _ in range(n)]
        for i, row in enumerate(lp.constraint_rows):
            for j, _ in row:
                col_rows[j].append(i)
        self.col_rows = [tuple(sorted(set(r))) for r in col_rows]
        self.row_cols = [np.unique(np.array([j for j, _ in row], dtype=np.int64))
                         for row in lp.constraint_rows]

    @staticmethod
    def applies(lp: LinearProgram, binary: Sequence[bool]) -> bool:
        return (
            all(binary)
            and all(b == 1.0 for b in lp.row_bounds)
            and all(a == 1.0 for row in lp.constraint_rows for _, a in row)
        )

    def choose(self, x: np.ndarray) -> tuple[int, int] | None:
        act: dict[int, float] = {}
        pair: dict[tuple[int, int], float] = {}
        for j in np.flatnonzero(x > INT_TOL).tolist():
            v = x[j]
            rows = self.col_rows[j]
            for r in rows:
                act[r] = act.get(r, 0.0) + v
            for k, a in enumerate(rows):
                for b in rows[k + 1:]:
                    pair[(a, b)] = pair.get((a, b), 0.0) + v
        best = None
        for (a, b), s in pair.items():
            if INT_TOL < s < 1.0 - INT_TOL and act[a] + act[b] - 2.0 * s > INT_TOL:
                key = (abs(s - 0.5), a, b)
                if best is None or key < best:
                    best = key
        return None if best is None else (best[1], best[2])

    def children(self, a: int, b: int) -> tuple[np.ndarray, np.ndarray]:
        """Columns to fix at zero in the together and the separate child."""
        ca, cb = self.row_cols[a], self.row_cols[b]
        return np.setxor1d(ca, cb, assume_unique=True), np.intersect1d(ca, cb, assume_unique=True)


def solve_milp(
    lp: LinearProgram,
    binary_mask: Sequence[bool] | None = None,
    time_limit: float | None = None,
    initial: Sequence[float] | None = None,
    pair_branching: bool = False,
) -> MilpResult:
    """Best-first branch and bound on the most fractional binary variable.

    With ``pair_branching`` a pure 0/1 packing program branches on row
    pairs instead (see :class:`_PairBrancher`), falling back to the most
    fractional variable when no suitable pair exists.

    ``initial`` is an optional feasible point used as the first incumbent.
    """
    n = lp.n_vars
    binary = list(binary_mask) if binary_mask is not None else [True] * n
    if len(binary) != n:
        raise ValueError("binary_mask has the wrong length")
    start = time.monotonic()
    deadline = None if time_limit is None else start + max(time_limit, 0.0)
    root_ub = [min(u, 1.0) if bi else u for u, bi in zip(lp.variable_upper_bounds, binary)]
    work = LinearProgram(list(lp.objective_coeffs), lp.constraint_rows, list(lp.row_bounds), root_ub)
    solver = SimplexSolver(work)
    root = solver.solve()
    if root.status == "infeasible":
        return MilpResult("infeasible", [0.0] * n, math.nan, math.nan, 1)
    if root.status == "unbounded":
        raise ValueError("MILP relaxation is unbounded")
    zero = [0.0] * n
    rounder = _Rounder(lp)
    zero_ok = rounder.feasible(np.zeros(n))
    inc_x: list[float] | None = zero if zero_ok else None
    inc_obj = 0.0 if zero_ok else -math.inf

    if initial is not None:
        start_x = np.asarray(initial, dtype=float)
        if len(start_x) != n:
            raise ValueError("initial point has the wrong length")
        if rounder.feasible(start_x) and np.all(start_x <= np.asarray(root_ub) + 1e-9) and np.all(start_x >= 0):
            val = math.fsum(c * v for c, v in zip(lp.objective_coeffs, start_x.tolist()))
            if val > inc_obj:
                inc_x, inc_obj = start_x.tolist(), val

    if time_limit is not None and time_limit <= 0:
        status = "feasible" if inc_x is not None else "infeasible"
        return MilpResult(status, inc_x or zero, inc_obj, root.objective, 1)

    heur = rounder(root.primal) if all(binary) else None
    if heur is not None:
        val = math.fsum(c * v for c, v in zip(lp.objective_coeffs, heur))
        if val > inc_obj:
            inc_x, inc_obj = heur, val

    def improves(bound: float) -> bool:
        return bound > inc_obj + 1e-9 * max(1.0, abs(inc_obj))

    pairs = _PairBrancher(lp) if pair_branching and _PairBrancher.applies(lp, binary) else None
    bmask = np.asarray(binary, dtype=bool)
    root_ub_a = np.asarray(root_ub, dtype=float)
    counter = 0
    heap: list = []
    heapq.heappush(heap, (-root.objective, counter, {}, None))
    nodes = 0
    timed_out = False
    while heap:
        neg_bound, _, fixes, snap = heapq.heappop(heap)
        if not improves(-neg_bound):
            continue
        if deadline is not None and time.monotonic() > deadline:
            heapq.heappush(heap, (neg_bound, -1, fixes, snap))
            timed_out = True
            break
        nodes += 1
        if snap is None:
            res = root
        else:
            lo = np.zeros(n)
            hi = np.array(root_ub, dtype=float)
            for j, (a, b) in fixes.items():
                lo[j], hi[j] = a, b
            solver.set_all_bounds(lo, hi)
            solver.restore(snap)
            res = solver.solve()
        if res.status != "optimal" or not improves(res.objective):
            continue
        x = res.primal
        xa = np.asarray(x)
        f = xa - np.floor(xa)
        dist = np.where(bmask & (f > INT_TOL) & (f < 1.0 - INT_TOL), np.abs(f - 0.5), 2.0)
        # argmin returns the lowest index among ties
        frac_j = int(np.argmin(dist)) if n else -1
        if n == 0 or dist[frac_j] >= 2.0:
            frac_j = -1
        if frac_j < 0:
            sol = [float(round(v)) if binary[j] else v for j, v in enumerate(x)]
            val = math.fsum(c * v for c, v in zip(lp.objective_coeffs, sol))
            if val > inc_obj:
                inc_x, inc_obj = sol, val
            continue
        heur = rounder(x) if all(binary) and nodes % HEURISTIC_EVERY == 0 else None
        if heur is not None:
            val = math.fsum(c * v for c, v in zip(lp.objective_coeffs, heur))
            if val > inc_obj:
                inc_x, inc_obj = heur, val
        # reduced-cost fixing: moving a nonbasic binary off its bound costs
        # at least |d_j| in this subtree, which rules it out when the node
        # bound minus that cost cannot beat the incumbent
        if inc_x is not None:
            d = np.asarray(res.reduced_costs)
            cut = inc_obj - res.objective - 1e-9 * max(1.0, abs(inc_obj))
            at0 = bmask & (xa <= INT_TOL) & (d <= cut)
            at1 = bmask & (xa >= 1.0 - INT_TOL) & (-d <= cut)
            fixes = dict(fixes)
            for j in np.flatnonzero(at0 & (root_ub_a > 0.0)).tolist():
                if j not in fixes:
                    fixes[j] = (0.0, 0.0)
            for j in np.flatnonzero(at1).tolist():
                if j not in fixes:
                    fixes[j] = (1.0, 1.0)
        # the solver still holds this node's optimal basis
        child_snap = solver.snapshot()
        pair = pairs.choose(xa) if pairs is not None else None
        if pair is not None:
            for zero_cols in pairs.children(*pair):
                nf = dict(fixes)
                ok = True
                for j in zero_cols.tolist():
                    cur = nf.get(j)
                    if cur is not None and cur[0] > 0.0:
                        ok = False
                        break
                    nf[j] = (0.0, 0.0)
                if ok:
                    counter += 1
                    heapq.heappush(heap, (-res.objective, counter, nf, child_snap))
            continue
        for lo, hi in ((0.0, 0.0), (1.0, 1.0)):
            counter += 1
            nf = dict(fixes)
            nf[frac_j] = (lo, hi)
            heapq.heappush(heap, (-res.objective, counter, nf, child_snap))
    if inc_x is None:
        return MilpResult("infeasible", zero, math.nan, math.nan, nodes)
    open_bounds = [-nb for nb, _, _, _ in heap if improves(-nb)]
    if timed_out and open_bounds:
        return MilpResult("feasible", inc_x, inc_obj, max(inc_obj, max(open_bounds)), nodes)
    return MilpResult("optimal", inc_x, inc_obj, inc_obj, nodes)
