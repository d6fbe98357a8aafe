"""Max-min fairness plus allocation cost.

Two algorithms live here:

* a configuration-LP pipeline: pick the best threshold ``T`` among powers
  of two, keep the big-job part of the LP solution as a bipartite graph,
  make it acyclic, round it to a matching with exact marginals, and fill
  unmatched machines with sampled small configurations;
* a matching algorithm with ``m - k`` dummy machines whose output satisfies
  ``(m - k + 1) F(A) + C(A) >= OPT``.

Both are compared against ``greedy_v``, the assignment maximizing cost alone.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional

import mpmath
import networkx as nx

from .core import Assignment, FractionalAssignment, SchedulingInstance, cost, fairness, frac_str
from .errors import CapacityError, InvariantError
from .lp import LinearProgram, lp_solve, max_weight_bipartite_matching

CONFIG_JOB_CAP = 16
SMALL, BIG = "small", "big"


@dataclass(frozen=True)
class Configuration:
    machine: int
    jobs: tuple
    kind: str


# ---------------------------------------------------------------------------
# Configurations and the configuration LP


def is_big(p: Fraction, T: Fraction, k: int) -> bool:
    """``p >= T / (sqrt(k) * max(1, ln(k)^3))``."""
    if T <= 0:
        return True
    if k <= 2:
        # ln(2)^3 < 1, so the guard applies and the test is p * sqrt(k) >= T.
        return p * p * k >= T * T
    with mpmath.workprec(256):
        lhs = mpmath.mpf(p.numerator) / p.denominator * mpmath.sqrt(k) * mpmath.log(k) ** 3
        return lhs >= mpmath.mpf(T.numerator) / T.denominator


def enumerate_configs(inst: SchedulingInstance, i: int, T) -> list[Configuration]:
    """Valid configurations of machine ``i`` at threshold ``T``.

    Small configurations are job sets with load at least ``T``. When every
    cost on the machine is non-positive only minimal sets are kept, since a
    superset can never have a better cost; otherwise every valid set is kept.
    Big configurations are singletons of big jobs, listed separately even when
    the same singleton is also small.
    """
    if inst.m > CONFIG_JOB_CAP:
        raise CapacityError(f"configuration enumeration is capped at m <= {CONFIG_JOB_CAP}; got m = {inst.m}")
    T = Fraction(T)
    p, c = inst.p[i], inst.c[i]
    minimal_only = all(v <= 0 for v in c)
    out = []
    for size in range(inst.m + 1):
        for S in combinations(range(inst.m), size):
            load = sum((p[j] for j in S), Fraction(0))
            if load < T:
                continue
            if minimal_only and any(load - p[j] >= T for j in S):
                continue
            out.append(Configuration(i, S, SMALL))
    for j in range(inst.m):
        if is_big(p[j], T, inst.k):
            out.append(Configuration(i, (j,), BIG))
    return out


@dataclass(frozen=True)
class ConfigLpSolution:
    T: Fraction
    weights: tuple  # (Configuration, Fraction) pairs with positive weight
    objective: Fraction

    def aggregate(self, k: int, m: int, kinds=(SMALL, BIG)) -> list[list[Fraction]]:
        x = [[Fraction(0)] * m for _ in range(k)]
        for conf, w in self.weights:
            if conf.kind in kinds:
                for j in conf.jobs:
                    x[conf.machine][j] += w
        return x

    def fractional(self, k: int, m: int) -> FractionalAssignment:
        return FractionalAssignment(self.aggregate(k, m))

    def to_json(self) -> dict:
        return {
            "T": frac_str(self.T),
            "objective": frac_str(self.objective),
            "configs": [
                {"machine": cf.machine, "jobs": list(cf.jobs), "kind": cf.kind, "weight": frac_str(w)}
                for cf, w in self.weights
            ],
        }


def clp(inst: SchedulingInstance, T) -> Optional[ConfigLpSolution]:
    T = Fraction(T)
    configs = [cf for i in range(inst.k) for cf in enumerate_configs(inst, i, T)]
    if not configs or any(not any(cf.machine == i for cf in configs) for i in range(inst.k)):
        return None
    n = len(configs)
    lp = LinearProgram(n, sense="max")
    lp.objective = [sum((inst.c[cf.machine][j] for j in cf.jobs), Fraction(0)) for cf in configs]
    for i in range(inst.k):
        lp.add_sparse({q: 1 for q, cf in enumerate(configs) if cf.machine == i}, "=", 1)
    for j in range(inst.m):
        terms = {q: 1 for q, cf in enumerate(configs) if j in cf.jobs}
        if terms:
            lp.add_sparse(terms, "<=", 1)
    res = lp_solve(lp)
    if not res.optimal:
        return None
    weights = tuple((cf, w) for cf, w in zip(configs, res.point) if w > 0)
    return ConfigLpSolution(T, weights, res.value)


def _floor_log2(q: Fraction) -> int:
    e = q.numerator.bit_length() - q.denominator.bit_length()
    # Now 2^(e-1) < q < 2^(e+1); settle the exact floor.
    while Fraction(2) ** e > q:
        e -= 1
    while Fraction(2) ** (e + 1) <= q:
        e += 1
    return e


def threshold_grid(inst: SchedulingInstance) -> list[Fraction]:
    """``0`` plus every power of two that can bracket a positive optimal fairness."""
    grid = [Fraction(0)]
    positive = [v for row in inst.p for v in row if v > 0]
    if not positive:
        return grid
    top = sum((max(inst.p[i][j] for i in range(inst.k)) for j in range(inst.m)), Fraction(0))
    for e in range(_floor_log2(min(positive)), _floor_log2(top) + 1):
        grid.append(Fraction(2) ** e)
    return grid


def select_fractional(inst: SchedulingInstance) -> tuple[Fraction, ConfigLpSolution]:
    """Argmax over the threshold grid of ``2T + CLP(T)``; ties go to the larger ``T``."""
    best = None
    for T in threshold_grid(inst):
        sol = clp(inst, T)
        if sol is None:
            continue
        score = 2 * T + sol.objective
        if best is None or score >= best[0]:
            best = (score, sol)
    if best is None:
        # CLP(0) always admits the empty configuration, so this is unreachable.
        raise InvariantError("configuration LP infeasible at T = 0")
    return best[1].T, best[1]


# ---------------------------------------------------------------------------
# Edge graph, cycle removal, dependent matching


@dataclass
class EdgeGraph:
    k: int
    m: int
    weights: dict  # (machine, job) -> Fraction, only positive entries
    costs: dict  # (machine, job) -> Fraction

    def mass(self) -> tuple[list[Fraction], list[Fraction]]:
        mm = [Fraction(0)] * self.k
        mj = [Fraction(0)] * self.m
        for (i, j), w in self.weights.items():
            mm[i] += w
            mj[j] += w
        return mm, mj

    def total_cost(self) -> Fraction:
        return sum((w * self.costs[e] for e, w in self.weights.items()), Fraction(0))

    def nx_graph(self) -> nx.Graph:
        g = nx.Graph()
        for (i, j) in sorted(self.weights):
            if self.weights[(i, j)] > 0:
                g.add_edge(("M", i), ("J", j))
        return g

    def is_forest(self) -> bool:
        return nx.is_forest(self.nx_graph()) if self.weights else True

    def copy(self) -> EdgeGraph:
        return EdgeGraph(self.k, self.m, dict(self.weights), dict(self.costs))


def edge_graph(inst: SchedulingInstance, sol: ConfigLpSolution) -> EdgeGraph:
    """Big-configuration mass per (machine, job) cell.

    Only big configurations contribute, so each machine's mass is its total
    big weight and never exceeds one.
    """
    x = sol.aggregate(inst.k, inst.m, kinds=(BIG,))
    w = {(i, j): x[i][j] for i in range(inst.k) for j in range(inst.m) if x[i][j] > 0}
    c = {(i, j): inst.c[i][j] for i in range(inst.k) for j in range(inst.m)}
    return EdgeGraph(inst.k, inst.m, w, c)


def _edge_key(u, v):
    return (u[1], v[1]) if u[0] == "M" else (v[1], u[1])


def remove_cycles(g: EdgeGraph) -> EdgeGraph:
    """Shift weight around cycles until the graph is a forest.

    Each shift moves ``eps`` from the cheaper alternating half of a cycle to
    the more expensive half, so cost never drops and node masses are fixed.
    """
    g = g.copy()
    while True:
        graph = g.nx_graph()
        try:
            cyc = nx.find_cycle(graph)
        except nx.NetworkXNoCycle:
            return g
        edges = [_edge_key(u, v) for u, v in cyc]
        odd, even = edges[0::2], edges[1::2]
        if sum(g.costs[e] for e in odd) < sum(g.costs[e] for e in even):
            odd, even = even, odd
        eps = min(g.weights[e] for e in even)
        before = len(g.weights)
        for e in odd:
            g.weights[e] += eps
        for e in even:
            g.weights[e] -= eps
            if g.weights[e] == 0:
                del g.weights[e]
        if len(g.weights) >= before:
            raise InvariantError("cycle shift removed no edge")


def bernoulli(rng: random.Random, prob: Fraction) -> bool:
    """Exact rational coin flip."""
    if prob <= 0:
        return False
    if prob >= 1:
        return True
    return rng.randrange(prob.denominator) < prob.numerator


class MatchingSampler:
    """Random matching of a forest with ``Pr[e in M] = x_e`` exactly.

    Dependent rounding along maximal paths of fractional edges: each round
    moves alternating edges up and down by amounts chosen so the expected
    change is zero, which keeps every marginal, and so at least one edge
    becomes integral. Internal path vertices keep their degree, so a vertex
    of mass at most one ends up with at most one edge. Weights are held as
    integers over a common denominator so every step is exact.
    """

    def __init__(self, g: EdgeGraph):
        mm, mj = g.mass()
        if any(v > 1 for v in mm) or any(v > 1 for v in mj):
            raise InvariantError("node mass above one; no matching has these marginals")
        if not g.is_forest():
            raise InvariantError("sample_matching needs an acyclic graph")
        self.edges = sorted(g.weights)
        den = 1
        for w in g.weights.values():
            den = math.lcm(den, w.denominator)
        self.den = den
        self.start = [int(g.weights[e] * den) for e in self.edges]
        index = {e: q for q, e in enumerate(self.edges)}
        self.adj: dict = {}
        for (i, j), q in index.items():
            self.adj.setdefault(("M", i), []).append((("J", j), q))
            self.adj.setdefault(("J", j), []).append((("M", i), q))

    def sample(self, rng: random.Random) -> dict:
        """Returns ``machine -> job``."""
        x = list(self.start)
        D = self.den
        adj = self.adj
        frac = {q for q, v in enumerate(x) if 0 < v < D}
        while frac:
            # A leaf of the fractional forest starts a maximal path.
            q0 = min(frac)
            i, j = self.edges[q0]
            start = None
            for node in (("M", i), ("J", j)):
                if sum(1 for _, q in adj[node] if q in frac) == 1:
                    start = node
                    break
            if start is None:
                # Walk to a leaf first; the forest guarantees one exists.
                prev, cur = ("M", i), ("J", j)
                while True:
                    nxt = [(v, q) for v, q in adj[cur] if q in frac and v != prev]
                    if not nxt:
                        start = cur
                        break
                    prev, cur = cur, nxt[0][0]
            path = []
            prev, cur = None, start
            while True:
                nxt = [(v, q) for v, q in adj[cur] if q in frac and v != prev]
                if not nxt:
                    break
                v, q = nxt[0]
                path.append(q)
                prev, cur = cur, v
            odd, even = path[0::2], path[1::2]
            up = min([D - x[q] for q in odd] + [x[q] for q in even])
            down = min([x[q] for q in odd] + [D - x[q] for q in even])
            step = up if rng.randrange(up + down) < down else -down
            for q in odd:
                x[q] += step
            for q in even:
                x[q] -= step
            for q in path:
                if x[q] == 0 or x[q] == D:
                    frac.discard(q)
        return {self.edges[q][0]: self.edges[q][1] for q, v in enumerate(x) if v == D}


def sample_matching(g: EdgeGraph, rng: random.Random) -> dict:
    """One draw from :class:`MatchingSampler`; returns ``machine -> job``."""
    return MatchingSampler(g).sample(rng)


# ---------------------------------------------------------------------------
# Full randomized pipeline


def greedy_v(inst: SchedulingInstance) -> Assignment:
    """Each job to its highest-cost machine if that cost is non-negative, else discarded."""
    jobs = []
    for j in range(inst.m):
        col = [inst.c[i][j] for i in range(inst.k)]
        best = max(col)
        jobs.append(col.index(best) if best >= 0 else None)
    return Assignment.from_jobs(inst.k, jobs)


@dataclass(frozen=True)
class AsFractional:
    """Everything the randomized rounding needs, computed deterministically."""

    T: Fraction
    clp: ConfigLpSolution
    graph: EdgeGraph  # acyclic
    small: tuple  # per machine: tuple of (jobs, weight) small configurations
    sampler: MatchingSampler = field(compare=False, repr=False, default=None)

    def __post_init__(self) -> None:
        if self.sampler is None:
            object.__setattr__(self, "sampler", MatchingSampler(self.graph))

    def fractional(self, k: int, m: int) -> FractionalAssignment:
        """Big edge weights after cycle removal plus small-configuration mass."""
        x = [[Fraction(0)] * m for _ in range(k)]
        for (i, j), w in self.graph.weights.items():
            x[i][j] += w
        for i, confs in enumerate(self.small):
            for jobs, w in confs:
                for j in jobs:
                    x[i][j] += w
        return FractionalAssignment(x)


def as_prepare(inst: SchedulingInstance) -> AsFractional:
    T, sol = select_fractional(inst)
    g = remove_cycles(edge_graph(inst, sol))
    small = [[] for _ in range(inst.k)]
    for cf, w in sol.weights:
        if cf.kind == SMALL:
            small[cf.machine].append((cf.jobs, w))
    return AsFractional(T, sol, g, tuple(tuple(s) for s in small))


def _exact_choice(rng: random.Random, items: list):
    """Pick an item from (item, probability) pairs whose probabilities sum to one."""
    den = 1
    for _, q in items:
        den = math.lcm(den, q.denominator)
    u = rng.randrange(den)
    acc = 0
    for item, q in items:
        acc += q.numerator * (den // q.denominator)
        if u < acc:
            return item
    raise InvariantError("probabilities do not sum to one")


def as_round(inst: SchedulingInstance, prep: AsFractional, rng: random.Random) -> Assignment:
    match = prep.sampler.sample(rng)
    owner: list = [None] * inst.m
    for i, j in match.items():
        owner[j] = i
    claims: dict = {}
    for i in range(inst.k):
        if i in match:
            continue
        confs = prep.small[i]
        mass = sum((w for _, w in confs), Fraction(0))
        if mass == 0:
            continue
        # Pr[i unmatched] = 1 - big mass = small mass, so each configuration
        # ends up selected with probability exactly its LP weight.
        chosen = _exact_choice(rng, [(jobs, w / mass) for jobs, w in confs])
        for j in chosen:
            claims.setdefault(j, []).append(i)
    for j, who in sorted(claims.items()):
        if owner[j] is None:
            owner[j] = who[rng.randrange(len(who))]
    return Assignment.from_jobs(inst.k, owner)


def cost_split_disjunction(inst: SchedulingInstance, x: FractionalAssignment, beta=2, gamma=Fraction(1, 2)) -> tuple[bool, bool]:
    """The two cases of the cost-splitting argument, evaluated exactly on ``x``.

    ``C+`` collects cells with positive cost and ``C-`` the rest. Returns
    (``beta F + C- >= gamma (beta F + C)``, ``C+ >= (1 - gamma)(beta F + C)``).
    """
    beta, gamma = Fraction(beta), Fraction(gamma)
    F = fairness(inst, x)
    cp = sum((inst.c[i][j] * x.x[i][j] for i in range(inst.k) for j in range(inst.m) if inst.c[i][j] > 0), Fraction(0))
    cm = sum((inst.c[i][j] * x.x[i][j] for i in range(inst.k) for j in range(inst.m) if inst.c[i][j] <= 0), Fraction(0))
    total = beta * F + cp + cm
    return beta * F + cm >= gamma * total, cp >= (1 - gamma) * total


@dataclass(frozen=True)
class FairnessResult:
    assignment: Assignment
    branch: str
    T: Fraction
    objective: Fraction  # certificate: CLP objective or best (m-k+1)T + C
    F: Fraction
    C: Fraction

    def to_json(self) -> dict:
        return {
            "branch": self.branch,
            "T": frac_str(self.T),
            "objective": frac_str(self.objective),
            "F": frac_str(self.F),
            "C": frac_str(self.C),
            "jobs": self.assignment.jobs(),
        }


def as_solve(inst: SchedulingInstance, rng: random.Random, prep: AsFractional | None = None) -> FairnessResult:
    prep = prep or as_prepare(inst)
    y = as_round(inst, prep, rng)
    v = greedy_v(inst)
    fy, cy = fairness(inst, y), cost(inst, y)
    fv, cv = fairness(inst, v), cost(inst, v)
    if fy + cy >= fv + cv:
        return FairnessResult(y, "rounded", prep.T, prep.clp.objective, fy, cy)
    return FairnessResult(v, "greedy_v", prep.T, prep.clp.objective, fv, cv)


# ---------------------------------------------------------------------------
# Dummy-machine matching algorithm


def _best_nonneg_machine(inst: SchedulingInstance, j: int) -> Optional[int]:
    col = [inst.c[i][j] for i in range(inst.k)]
    best = max(col)
    return col.index(best) if best >= 0 else None


def bd_candidate(inst: SchedulingInstance, T) -> Optional[Assignment]:
    """Max-weight matching with every real machine matched to a job of size at least ``T``.

    ``None`` when no such matching exists. Jobs matched to dummy machines go
    to their highest non-negative-cost machine or are discarded.
    """
    T = Fraction(T)
    k, m = inst.k, inst.m
    left = k + (m - k)
    weights = [[None] * m for _ in range(left)]
    for j in range(m):
        dummy_w = max(Fraction(0), max(inst.c[i][j] for i in range(k)))
        for i in range(k):
            if inst.p[i][j] >= T:
                weights[i][j] = inst.c[i][j]
        for d in range(k, left):
            weights[d][j] = dummy_w
    match = max_weight_bipartite_matching(weights, perfect=True)
    if match is None:
        return None
    jobs: list = [None] * m
    for l, j in match.pairs:
        jobs[j] = l if l < k else _best_nonneg_machine(inst, j)
    return Assignment.from_jobs(k, jobs)


def bd_solve_detailed(inst: SchedulingInstance) -> FairnessResult:
    k, m = inst.k, inst.m
    v = greedy_v(inst)
    fv, cv = fairness(inst, v), cost(inst, v)
    if m < k:
        return FairnessResult(v, "greedy_v", Fraction(0), cv, fv, cv)
    factor = m - k + 1
    best = None
    for T in inst.distinct_p():
        a = bd_candidate(inst, T)
        if a is None:
            continue
        score = factor * T + cost(inst, a)
        if best is None or score > best[0]:
            best = (score, T, a)
    if best is None:
        raise InvariantError("no candidate threshold admits a machine-saturating matching")
    score, T, a = best
    fa, ca = fairness(inst, a), cost(inst, a)
    if fa < T:
        raise InvariantError("matched assignment has fairness below its threshold")
    if fv + cv >= factor * fa + ca:
        return FairnessResult(v, "greedy_v", T, score, fv, cv)
    return FairnessResult(a, "matching", T, score, fa, ca)


def bd_solve(inst: SchedulingInstance) -> Assignment:
    """Assignment with ``(m - k + 1) F + C`` at least the optimal ``F + C``."""
    return bd_solve_detailed(inst).assignment
