"""Brute-force certifiers: exact scheduling optima and tiny mechanism-design optima."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import lcm
from typing import Iterator, Optional

from .core import Assignment, SchedulingInstance
from .errors import CapacityError, InvariantError, StructuralError
from .lp import LinearProgram, lp_solve

GOOP_CAP = 10**7
BMED_CAP = 10**6

MAKESPAN = "makespan"
FAIRNESS = "fairness"


def outcomes(k: int, m: int, tag: str) -> Iterator[tuple]:
    """All valid job maps: machine per job, plus ``None`` (discard) for fairness."""
    if tag == MAKESPAN:
        choices = list(range(k))
    elif tag == FAIRNESS:
        choices = list(range(k)) + [None]
    else:
        raise StructuralError(f"unknown objective tag {tag!r}")
    return product(choices, repeat=m)


def outcome_count(k: int, m: int, tag: str) -> int:
    return (k if tag == MAKESPAN else k + 1) ** m


@dataclass(frozen=True)
class BruteResult:
    value: Fraction
    assignment: Assignment


def _scaled(inst: SchedulingInstance) -> tuple[int, list, list]:
    den = 1
    for row in inst.p + inst.c:
        for v in row:
            den = lcm(den, v.denominator)
    P = [[int(v * den) for v in row] for row in inst.p]
    C = [[int(v * den) for v in row] for row in inst.c]
    return den, P, C


def brute_goop(inst: SchedulingInstance, tag: str, weight=1) -> BruteResult:
    """Exact optimum of ``weight*M + C`` (min) or ``weight*F + C`` (max).

    Ties keep the first assignment in enumeration order. Arithmetic runs on
    integers after clearing denominators.
    """
    if outcome_count(inst.k, inst.m, tag) > GOOP_CAP:
        raise CapacityError(f"{outcome_count(inst.k, inst.m, tag)} assignments exceed the cap {GOOP_CAP}")
    weight = Fraction(weight)
    wn, wd = weight.numerator, weight.denominator
    den, P, C = _scaled(inst)
    k, m = inst.k, inst.m
    minimize = tag == MAKESPAN
    best_v = None
    best_jobs = None
    for jobs in outcomes(k, m, tag):
        loads = [0] * k
        cst = 0
        for j, i in enumerate(jobs):
            if i is not None:
                loads[i] += P[i][j]
                cst += C[i][j]
        obj = max(loads) if minimize else min(loads)
        v = wn * obj + wd * cst
        if best_v is None or (v < best_v if minimize else v > best_v):
            best_v, best_jobs = v, jobs
    return BruteResult(Fraction(best_v, den * wd), Assignment.from_jobs(k, best_jobs))


# ---------------------------------------------------------------------------
# Tiny mechanism-design instances


def _type_value(types_i, t: int, jobs: tuple, i: int) -> Fraction:
    return sum((types_i[t][j] for j, mach in enumerate(jobs) if mach == i), Fraction(0))


def _objective(inst, profile, jobs: tuple) -> Fraction:
    loads = [_type_value(inst.types[i], profile[i], jobs, i) for i in range(inst.k)]
    return max(loads) if inst.objective == MAKESPAN else min(loads)


def brute_bmed(inst) -> Fraction:
    """Exact optimal truthful objective over all randomized mechanisms.

    Variables are per-profile outcome distributions ``q(s, x)``; interim
    values, prices and ``O`` are tied to them linearly and the BIC and IR
    constraints are added as rows. Every profile (including zero-probability
    ones) gets a distribution so misreports are always defined.
    """
    tag = inst.objective
    profiles = list(product(*[range(len(ts)) for ts in inst.types]))
    outs = list(outcomes(inst.k, inst.m, tag))
    if len(profiles) * len(outs) > BMED_CAP:
        raise CapacityError(f"{len(profiles) * len(outs)} profile-outcome pairs exceed the cap {BMED_CAP}")
    sizes = [len(ts) for ts in inst.types]
    nq = len(profiles) * len(outs)
    col: dict = {}
    n = nq
    for i in range(inst.k):
        for t in range(sizes[i]):
            for tp in range(sizes[i]):
                col[("pi", i, t, tp)] = n
                n += 1
    for i in range(inst.k):
        for t in range(sizes[i]):
            col[("p", i, t)] = n
            n += 1
    col["O"] = n
    n += 1
    sense = "min" if tag == MAKESPAN else "max"
    obj = [0] * n
    obj[col["O"]] = 1
    lp = LinearProgram(n, objective=obj, sense=sense)
    lp.bounds = [(0, None)] * nq + [(None, None)] * (n - nq)

    def qcol(si: int, xi: int) -> int:
        return si * len(outs) + xi

    def pr(s) -> Fraction:
        out = Fraction(1)
        for i, t in enumerate(s):
            out *= inst.probs[i][t]
        return out

    def pr_others(s, i) -> Fraction:
        out = Fraction(1)
        for l, t in enumerate(s):
            if l != i:
                out *= inst.probs[l][t]
        return out

    for si in range(len(profiles)):
        lp.add_sparse({qcol(si, xi): 1 for xi in range(len(outs))}, "=", 1)
    for i in range(inst.k):
        for t in range(sizes[i]):
            for tp in range(sizes[i]):
                terms = {col[("pi", i, t, tp)]: Fraction(1)}
                for si, s in enumerate(profiles):
                    if s[i] != tp:
                        continue
                    wt = pr_others(s, i)
                    if wt == 0:
                        continue
                    for xi, x in enumerate(outs):
                        v = wt * _type_value(inst.types[i], t, x, i)
                        if v:
                            terms[qcol(si, xi)] = terms.get(qcol(si, xi), 0) - v
                lp.add_sparse(terms, "=", 0)
    terms = {col["O"]: Fraction(1)}
    for si, s in enumerate(profiles):
        wt = pr(s)
        if wt == 0:
            continue
        for xi, x in enumerate(outs):
            v = wt * _objective(inst, s, x)
            if v:
                terms[qcol(si, xi)] = -v
    lp.add_sparse(terms, ">=" if sense == "min" else "<=", 0)
    for i in range(inst.k):
        for t in range(sizes[i]):
            a, pa = col[("pi", i, t, t)], col[("p", i, t)]
            lp.add_sparse({a: 1, pa: -1}, ">=", 0)
            for tp in range(sizes[i]):
                if tp != t:
                    b, pb = col[("pi", i, t, tp)], col[("p", i, tp)]
                    lp.add_sparse({a: 1, pa: -1, b: -1, pb: 1}, ">=", 0)
    res = lp_solve(lp)
    if not res.optimal:
        raise InvariantError(f"exact mechanism-design program is {res.status}")
    return res.value


def implicit_form_of(rule: dict, inst, distribution, prices: Optional[dict] = None):
    """Exact implicit form of an explicit rule under an enumerable distribution.

    ``rule[s]`` is an :class:`Assignment` or a list of ``(Assignment, prob)``.
    Interim values condition on the bidder's own report. ``prices[(i, t)]``
    gives interim prices (zero when omitted).
    """
    from .bmed import ImplicitForm

    sizes = [len(ts) for ts in inst.types]
    dist = [(tuple(s), Fraction(q)) for s, q in distribution]
    marg = [[sum((q for s, q in dist if s[i] == t), Fraction(0)) for t in range(sizes[i])] for i in range(inst.k)]
    O = Fraction(0)
    pi = [[[Fraction(0)] * sizes[i] for _ in range(sizes[i])] for i in range(inst.k)]
    for s, q in dist:
        lottery = rule[s]
        if isinstance(lottery, Assignment):
            lottery = [(lottery, Fraction(1))]
        for a, lam in lottery:
            jobs = tuple(a.jobs())
            O += q * lam * _objective(inst, s, jobs)
            for i, tp in enumerate(s):
                if marg[i][tp] == 0:
                    continue
                for t in range(sizes[i]):
                    pi[i][t][tp] += q * lam / marg[i][tp] * _type_value(inst.types[i], t, jobs, i)
    prices = prices or {}
    p = tuple(tuple(Fraction(prices.get((i, t), 0)) for t in range(sizes[i])) for i in range(inst.k))
    return ImplicitForm(O, tuple(tuple(map(tuple, mat)) for mat in pi), p)
