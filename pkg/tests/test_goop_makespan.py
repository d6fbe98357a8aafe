from __future__ import annotations

from fractions import Fraction as F
from itertools import product

from hypothesis import given, settings, strategies as st

from bimech.core import Assignment, FractionalAssignment, SchedulingInstance, cost, makespan, modified_makespan
from bimech.goop_makespan import LpTSolution, lp_t, makespan_pipeline, solve_makespan_with_costs, st_round
from bimech.oracle import brute_goop
from tests.oracles import rand_frac


def random_instance(rng, k, m):
    p = [[rand_frac(rng) for _ in range(m)] for _ in range(k)]
    c = [[rand_frac(rng, -1, 1) for _ in range(m)] for _ in range(k)]
    return SchedulingInstance.from_lists(p, c)


def test_lp_t_trivial():
    i = SchedulingInstance.from_lists([[1]])
    s = lp_t(i, 1)
    assert s.x.x == ((1,),) and s.T == 1 and s.value == 1
    assert lp_t(i, F(1, 2)) is None


def test_lp_t_invariants_and_bound(rng):
    for _ in range(20):
        i = random_instance(rng, 2, 3)
        s = lp_t(i, max(i.distinct_p()))
        x = s.x.x
        for j in range(3):
            assert sum(x[q][j] for q in range(2)) == 1
        for q in range(2):
            assert sum(i.p[q][j] * x[q][j] for j in range(3)) <= s.T
        assert s.T >= s.t
        assert s.value == cost(i, s.x) + s.T
        # T >= t is forced, so the integral comparison is against max(M(y), t) + C(y).
        bound = min(
            max(makespan(i, Assignment.from_jobs(2, jobs)), s.t) + cost(i, Assignment.from_jobs(2, jobs))
            for jobs in product(range(2), repeat=3)
        )
        assert s.value <= bound


def test_st_round_integral_input_unchanged():
    i = SchedulingInstance.from_lists([[1, 2], [3, 1]], [[0, 1], [1, 0]])
    sol = LpTSolution(FractionalAssignment([[1, 0], [0, 1]]), F(1), F(1), F(1))
    assert st_round(i, sol) == Assignment([[1, 0], [0, 1]])


def test_st_round_half_split():
    i = SchedulingInstance.from_lists([[1, 1], [1, 1]])
    h = F(1, 2)
    sol = LpTSolution(FractionalAssignment([[h, h], [h, h]]), F(1), F(1), F(1))
    a = st_round(i, sol)
    assert makespan(i, a) <= 2 and cost(i, a) <= 0


def test_st_contract_on_many_instances(rng):
    for _ in range(100):
        i = random_instance(rng, rng.randint(1, 3), rng.randint(1, 5))
        for t in i.distinct_p():
            s = lp_t(i, t)
            if s is None:
                continue
            a = st_round(i, s)
            assert makespan(i, a) <= s.T + s.t
            assert cost(i, a) <= cost(i, s.x)


def test_single_machine_takes_everything():
    i = SchedulingInstance.from_lists([[F(1, 3), F(1, 2)]], [[1, -1]])
    a = solve_makespan_with_costs(i)
    assert a == Assignment([[1, 1]])


def test_symmetric_two_by_two():
    i = SchedulingInstance.from_lists([[1, 1], [1, 1]])
    a = solve_makespan_with_costs(i)
    assert makespan(i, a) in (1, 2) and F(1, 2) * makespan(i, a) <= 1


def test_lp_value_below_opt_and_end_to_end(rng):
    for _ in range(60):
        i = random_instance(rng, rng.randint(1, 3), rng.randint(1, 5))
        res = makespan_pipeline(i)
        opt = brute_goop(i, "makespan").value
        x = res.fractional.x
        assert modified_makespan(i, x) + cost(i, x) <= opt
        a = res.assignment
        assert F(1, 2) * makespan(i, a) + cost(i, a) <= opt


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(1, 4), st.randoms(use_true_random=False))
def test_property_half_makespan(k, m, r):
    i = random_instance(r, k, m)
    a = solve_makespan_with_costs(i)
    assert F(1, 2) * makespan(i, a) + cost(i, a) <= brute_goop(i, "makespan").value


def test_brute_goop_matches_direct_evaluation(rng):
    from itertools import product as prod
    for _ in range(15):
        i = random_instance(rng, rng.randint(1, 3), rng.randint(1, 4))
        direct = min(
            makespan(i, Assignment.from_jobs(i.k, js)) + cost(i, Assignment.from_jobs(i.k, js))
            for js in prod(range(i.k), repeat=i.m)
        )
        res = brute_goop(i, "makespan")
        assert res.value == direct
        assert makespan(i, res.assignment) + cost(i, res.assignment) == direct
