"""Makespan plus allocation cost: LP(t) family and slot rounding.

For a threshold ``t`` the LP only allows cells with ``p_ij <= t`` and
minimizes ``sum c_ij x_ij + T`` where ``T`` bounds every machine load and is
at least ``t``. Rounding the best such solution gives an integral schedule
with makespan at most ``T + t <= 2T`` and cost at most the fractional cost,
so ``M/2 + C`` never exceeds the integral optimum of ``M + C``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import Assignment, FractionalAssignment, SchedulingInstance, cost, frac_str, makespan
from .errors import InvariantError
from .lp import LinearProgram, lp_solve, max_weight_bipartite_matching


@dataclass(frozen=True)
class LpTSolution:
    x: FractionalAssignment
    T: Fraction
    t: Fraction
    value: Fraction

    def to_json(self) -> dict:
        return {
            "t": frac_str(self.t),
            "T": frac_str(self.T),
            "value": frac_str(self.value),
            "x": [[frac_str(v) for v in row] for row in self.x.x],
        }


def lp_t(inst: SchedulingInstance, t) -> Optional[LpTSolution]:
    """Solve LP(t) exactly; ``None`` when it is infeasible."""
    t = Fraction(t)
    k, m = inst.k, inst.m
    cells = [(i, j) for i in range(k) for j in range(m) if inst.p[i][j] <= t]
    col = {cell: n for n, cell in enumerate(cells)}
    n_T = len(cells)
    lp = LinearProgram(n_T + 1, sense="min")
    lp.objective = [inst.c[i][j] for i, j in cells] + [Fraction(1)]
    lp.bounds = [(0, None)] * n_T + [(t, None)]
    for j in range(m):
        terms = {col[(i, j)]: 1 for i in range(k) if (i, j) in col}
        if not terms:
            return None
        lp.add_sparse(terms, "=", 1)
    for i in range(k):
        terms = {col[(i, j)]: inst.p[i][j] for j in range(m) if (i, j) in col}
        terms[n_T] = -1
        lp.add_sparse(terms, "<=", 0)
    res = lp_solve(lp)
    if not res.optimal:
        return None
    x = [[Fraction(0)] * m for _ in range(k)]
    for (i, j), n in col.items():
        x[i][j] = res.point[n]
    return LpTSolution(FractionalAssignment(x), res.point[n_T], t, res.value)


def _slots(inst: SchedulingInstance, x) -> list[tuple[int, dict]]:
    """Fill each machine's unit slots with its jobs in non-increasing p order."""
    out = []
    for i in range(inst.k):
        jobs = [j for j in range(inst.m) if x[i][j] > 0]
        jobs.sort(key=lambda j: (-inst.p[i][j], j))
        cur: dict = {}
        room = Fraction(1)
        for j in jobs:
            left = x[i][j]
            while left > 0:
                take = min(left, room)
                cur[j] = cur.get(j, Fraction(0)) + take
                left -= take
                room -= take
                if room == 0:
                    out.append((i, cur))
                    cur, room = {}, Fraction(1)
        if cur:
            out.append((i, cur))
    return out


def st_round(inst: SchedulingInstance, sol: LpTSolution) -> Assignment:
    """Round a feasible LP(t) solution to an integral schedule.

    Guarantees makespan at most ``T + t`` and cost at most ``C(x)``; both are
    re-checked exactly before returning.
    """
    x = sol.x.x
    slots = _slots(inst, x)
    if not slots:
        raise InvariantError("no slots built from a feasible LP(t) solution")
    weights = [[None] * len(slots) for _ in range(inst.m)]
    for s, (i, fill) in enumerate(slots):
        for j in fill:
            weights[j][s] = -inst.c[i][j]
    match = max_weight_bipartite_matching(weights, perfect=True)
    if match is None:
        raise InvariantError("slot graph has no job-saturating matching")
    jobs = [None] * inst.m
    for j, s in match.pairs:
        jobs[j] = slots[s][0]
    a = Assignment.from_jobs(inst.k, jobs)
    if makespan(inst, a) > sol.T + sol.t:
        raise InvariantError("rounded makespan exceeds T + t")
    if cost(inst, a) > cost(inst, sol.x):
        raise InvariantError("rounded cost exceeds fractional cost")
    return a


@dataclass(frozen=True)
class MakespanResult:
    assignment: Assignment
    fractional: LpTSolution


def best_lp_t(inst: SchedulingInstance) -> LpTSolution:
    best: Optional[LpTSolution] = None
    for t in inst.distinct_p():
        sol = lp_t(inst, t)
        if sol is not None and (best is None or sol.value < best.value):
            best = sol
    if best is None:
        raise InvariantError("LP(t) infeasible even at t = max p")
    return best


def makespan_pipeline(inst: SchedulingInstance) -> MakespanResult:
    frac = best_lp_t(inst)
    return MakespanResult(st_round(inst, frac), frac)


def solve_makespan_with_costs(inst: SchedulingInstance) -> Assignment:
    """Integral schedule with ``M/2 + C`` at most the optimal ``M + C``."""
    return makespan_pipeline(inst).assignment


def min_cost_only(inst: SchedulingInstance) -> Assignment:
    """Every job to its cheapest machine (lowest index on ties)."""
    jobs = []
    for j in range(inst.m):
        col = [inst.c[i][j] for i in range(inst.k)]
        jobs.append(col.index(min(col)))
    return Assignment.from_jobs(inst.k, jobs)

