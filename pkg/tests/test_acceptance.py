"""One test per acceptance criterion; each prints a PASS/FAIL summary line."""

from __future__ import annotations

import math
import random
import time
from fractions import Fraction as F
from itertools import product

from bimech.bmed import BmedInstance, Direction, GoopHandle, bmed_reduce, sample_dprime, verify_mechanism, virtual_objective
from bimech.core import SchedulingInstance, cost, fairness, makespan
from bimech.geometry import EllipsoidConfig, Halfspace, WsoHandle, dot, ellipsoid_optimize_with_wso, wso
from bimech.goop_fairness import (
    MatchingSampler,
    as_prepare,
    as_round,
    bd_solve,
    remove_cycles,
    select_fractional,
    cost_split_disjunction,
)
from bimech.goop_makespan import lp_t, solve_makespan_with_costs, st_round
from bimech.oracle import FAIRNESS, MAKESPAN, brute_bmed, brute_goop, implicit_form_of
from tests.oracles import rand_bmed, rand_frac, rand_rule
from tests.synthetic import POLYTOPES, make_algorithm, min_over_hull_with_halfspace, scaled_vertices
from tests.test_goop_fairness import _random_graph


def report(n, ok, detail):
    print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def instances(seed, count, kmax, mmax):
    rng = random.Random(seed)
    for _ in range(count):
        k, m = rng.randint(1, kmax), rng.randint(1, mmax)
        p = [[rand_frac(rng, 0, 1, 12) for _ in range(m)] for _ in range(k)]
        c = [[rand_frac(rng, -1, 1, 12) for _ in range(m)] for _ in range(k)]
        yield SchedulingInstance.from_lists(p, c)


def three_sigma(p, n):
    return 3 * math.sqrt(max(p * (1 - p), 1e-12) / n) + 1e-9


def test_criterion_1_makespan_factor():
    t0 = time.time()
    bad = 0
    for inst in instances(1, 200, 3, 6):
        a = solve_makespan_with_costs(inst)
        if F(1, 2) * makespan(inst, a) + cost(inst, a) > brute_goop(inst, MAKESPAN).value:
            bad += 1
    report(1, bad == 0, f"{bad}/200 violations of M/2 + C <= OPT in {time.time() - t0:.1f}s")


def test_criterion_2_st_contract():
    bad = total = 0
    for inst in instances(1, 200, 3, 6):
        for t in inst.distinct_p():
            sol = lp_t(inst, t)
            if sol is None:
                continue
            total += 1
            a = st_round(inst, sol)
            if makespan(inst, a) > sol.T + sol.t or cost(inst, a) > cost(inst, sol.x):
                bad += 1
    report(2, bad == 0, f"{bad}/{total} rounded LP(t) solutions break makespan <= T + t or cost <= C(x)")


def test_criterion_3_bd_factor():
    t0 = time.time()
    bad = 0
    for inst in instances(3, 200, 3, 6):
        a = bd_solve(inst)
        factor = max(inst.m - inst.k + 1, 1)
        if factor * fairness(inst, a) + cost(inst, a) < brute_goop(inst, FAIRNESS).value:
            bad += 1
    report(3, bad == 0, f"{bad}/200 violations of (m-k+1)F + C >= OPT in {time.time() - t0:.1f}s")


def test_criterion_4_fractional_certificate():
    rng = random.Random(4)
    notes = []
    literal_bad = threshold_bad = disjunction_bad = 0
    insts = list(instances(4, 50, 3, 8))
    preps = [as_prepare(i) for i in insts]
    for inst, prep in zip(insts, preps):
        T, sol = select_fractional(inst)
        x = sol.fractional(inst.k, inst.m)
        opt = brute_goop(inst, FAIRNESS).value
        if 2 * fairness(inst, x) + cost(inst, x) < opt:
            literal_bad += 1
        if 2 * T + sol.objective < opt:
            threshold_bad += 1
        if not any(cost_split_disjunction(inst, prep.fractional(inst.k, inst.m), gamma=F(1, 2))):
            disjunction_bad += 1
    notes.append(f"literal 2F(x*)+C(x*) >= OPT fails on {literal_bad}/50")
    notes.append(f"2T*+CLP(T*) >= OPT fails on {threshold_bad}/50")
    notes.append(f"disjunction fails on {disjunction_bad}/50")

    # cycle removal: exact invariants
    cycle_bad = 0
    for _ in range(40):
        g = _random_graph(rng, rng.randint(2, 4), rng.randint(2, 5))
        h = remove_cycles(g)
        if not (h.is_forest() and h.mass() == g.mass() and h.total_cost() >= g.total_cost()):
            cycle_bad += 1
    notes.append(f"cycle removal breaks invariants on {cycle_bad}/40")

    # marginals and E[y] <= x on the instance with the most fractional edges
    n = 100_000
    inst, prep = max(zip(insts, preps), key=lambda ip: (len(ip[1].graph.weights), sum(map(len, ip[1].small))))
    forest = max((remove_cycles(_random_graph(rng, 3, 5)) for _ in range(20)), key=lambda g: len(g.weights))
    marg_bad = n_edges = 0
    srng = random.Random(44)
    for g in (prep.graph, forest):
        sampler = MatchingSampler(g)
        hits = {e: 0 for e in g.weights}
        for _ in range(n):
            for i, j in sampler.sample(srng).items():
                hits[(i, j)] += 1
        n_edges += len(hits)
        marg_bad += sum(abs(h / n - float(g.weights[e])) > three_sigma(float(g.weights[e]), n) for e, h in hits.items())
    y = [[0] * inst.m for _ in range(inst.k)]
    for _ in range(n):
        for j, i in enumerate(as_round(inst, prep, srng).jobs()):
            if i is not None:
                y[i][j] += 1
    x = prep.fractional(inst.k, inst.m).x
    ey_bad = sum(
        y[i][j] / n > float(x[i][j]) + three_sigma(float(x[i][j]), n) for i in range(inst.k) for j in range(inst.m)
    )
    notes.append(f"matching marginals outside 3 sigma: {marg_bad}/{n_edges}")
    notes.append(f"E[y_ij] > x_ij + 3 sigma: {ey_bad}/{inst.k * inst.m}")

    ok = literal_bad == threshold_bad == disjunction_bad == cycle_bad == marg_bad == ey_bad == 0
    report(4, ok, "; ".join(notes))


def test_criterion_5_wso_soundness():
    t0 = time.time()
    problems = []
    rng = random.Random(5)
    for name, verts in sorted(POLYTOPES.items()):
        d = len(verts[0])
        for kind in ("exact", "perturbed"):
            for engine in ("exact", "ellipsoid"):
                A = make_algorithm(verts, kind)
                cfg = EllipsoidConfig(engine=engine)
                targets = scaled_vertices(verts, A.alpha)
                for _ in range(8):
                    y = [rand_frac(rng, -1, 2, 6) for _ in range(d)]
                    out = wso(y, A, cfg)
                    if out.accepted:
                        combo = [sum(l * p[q] for l, p in zip(out.weights, out.points)) for q in range(d)]
                        if any(abs(a - b) > F(1, 2**64) for a, b in zip(combo, y)) or any(l < 0 for l in out.weights):
                            problems.append(f"{name}/{kind}/{engine}: bad decomposition")
                    elif out.halfspace.contains(y) or not all(out.halfspace.contains(v) for v in targets):
                        problems.append(f"{name}/{kind}/{engine}: unsound halfspace")
    for name, kind, engine in product(sorted(POLYTOPES), ("exact", "perturbed"), ("exact", "ellipsoid")):
        verts = POLYTOPES[name]
        d = len(verts[0])
        A = make_algorithm(verts, kind)
        cfg = EllipsoidConfig(engine=engine)
        c = [F(1)] + [F(0)] * (d - 1)
        q = [F(2)] + [F(1)] * (d - 1)
        b = F(6, 5) * A.alpha
        Q = lambda x, q=q, b=b: None if dot(q, x) >= b else Halfspace(q, b)
        r = ellipsoid_optimize_with_wso(c, Q, WsoHandle(A, cfg), cfg, (-4, 4), F(1, 10**7), [(-4, 4)] * d)
        opt = min_over_hull_with_halfspace(c, scaled_vertices(verts, A.alpha), q, b)
        if r.value > opt + F(1, 10**6):
            problems.append(f"{name}/{kind}/{engine}: value {float(r.value)} above OPT {float(opt)}")
    elapsed = time.time() - t0
    ok = not problems and elapsed < 300
    report(5, ok, f"{'; '.join(problems) or 'all halfspaces sound, decompositions exact, optimum within 1e-6'} in {elapsed:.1f}s")


def test_criterion_6_truthful_makespan():
    t0 = time.time()
    rng = random.Random(5)
    rt = lambda: F(rng.randint(1, 10), 10)
    types = [[[rt(), rt()], [rt(), rt()]] for _ in range(2)]
    inst = BmedInstance(2, 2, types, [[F(1, 3), F(2, 3)], [F(1, 2), F(1, 2)]], MAKESPAN)
    eps = F(1, 20)
    opt = brute_bmed(inst)
    res = bmed_reduce(inst, GoopHandle("makespan"), eps, seed=1)
    rep = verify_mechanism(res.mechanism, inst, 100_000, seed=2)
    bound = 2 * float(opt) + float(eps) + 3 * rep.objective_sigma
    ok = rep.mean_objective <= bound and rep.max_regret <= float(eps) + 3 * rep.regret_sigma and rep.ir_violations == 0
    report(
        6,
        ok,
        f"E[M]={rep.mean_objective:.4f} vs 2*OPT+eps+3s={bound:.4f}, regret {rep.max_regret:.4g}, "
        f"IR violations {rep.ir_violations}, {time.time() - t0:.1f}s",
    )


def test_criterion_7_truthful_fairness():
    t0 = time.time()
    rng = random.Random(6)
    rt = lambda: F(rng.randint(1, 10), 10)
    types = [[[rt() for _ in range(3)] for _ in range(2)] for _ in range(2)]
    inst = BmedInstance(2, 3, types, [[F(1, 3), F(2, 3)], [F(1, 2), F(1, 2)]], FAIRNESS)
    eps = F(1, 20)
    opt = brute_bmed(inst)
    res = bmed_reduce(inst, GoopHandle("fairness-bd"), eps, seed=1)
    rep = verify_mechanism(res.mechanism, inst, 100_000, seed=2)
    bound = float(opt) / (inst.m - inst.k + 1) - float(eps) - 3 * rep.objective_sigma
    ok = rep.mean_objective >= bound and rep.max_regret <= float(eps) + 3 * rep.regret_sigma and rep.ir_violations == 0
    report(
        7,
        ok,
        f"E[F]={rep.mean_objective:.4f} vs OPT/(m-k+1)-eps-3s={bound:.4f}, regret {rep.max_regret:.4g}, "
        f"IR violations {rep.ir_violations}, {time.time() - t0:.1f}s",
    )


def test_criterion_8_virtual_objective_identity():
    rng = random.Random(8)
    bad = 0
    for n in range(100):
        objective = MAKESPAN if n % 2 else FAIRNESS
        inst = rand_bmed(rng, 2, 2, [rng.randint(1, 2), rng.randint(1, 3)], objective)
        dist = sample_dprime(inst, 30, seed=n)
        rule = rand_rule(rng, inst, [s for s, _ in dist.support], lottery=bool(n % 3))
        w = Direction.from_vector(inst, [rand_frac(rng, -1, 1, 6) for _ in range(inst.pi_dim)])
        form = implicit_form_of(rule, inst, dist.support)
        expected = F(0)
        for s, q in dist.support:
            outs = rule[s] if isinstance(rule[s], list) else [(rule[s], F(1))]
            for a, lam in outs:
                expected += q * lam * virtual_objective(w, s, a, inst, dist)
        if form.dot(w) != expected:
            bad += 1
    report(8, bad == 0, f"{bad}/100 pairs where pi.w differs from the expected virtual objective")
