from __future__ import annotations

import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from bimech.core import (
    Assignment,
    FractionalAssignment,
    SchedulingInstance,
    cost,
    denormalize,
    fairness,
    makespan,
    modified_makespan,
    normalize,
    read_instance,
)
from bimech.errors import StructuralError
from tests.oracles import rand_frac


def inst(p, c=None):
    return SchedulingInstance.from_lists(p, c)


def test_makespan_single_machine():
    assert makespan(inst([[F(1, 2), F(1, 2)]]), Assignment([[1, 1]])) == 1


def test_makespan_unassigned_job_is_infinite():
    assert makespan(inst([[1], [1]]), Assignment([[0], [0]])) == math.inf


def test_makespan_matches_row_sums(rng):
    for _ in range(20):
        p = [[rand_frac(rng) for _ in range(3)] for _ in range(2)]
        jobs = [rng.randrange(2) for _ in range(3)]
        a = Assignment.from_jobs(2, jobs)
        rows = [sum((p[i][j] for j in range(3) if jobs[j] == i), F(0)) for i in range(2)]
        assert makespan(inst(p), a) == max(rows)


def test_fairness_examples():
    assert fairness(inst([[1, 0], [0, 1]]), Assignment([[1, 0], [0, 1]])) == 1
    assert fairness(inst([[1]]), Assignment([[0]])) == 0
    assert fairness(inst([[1], [1]]), Assignment([[1], [1]])) == -math.inf


def test_cost_examples(rng):
    assert cost(inst([[1, 1]]), Assignment([[1, 1]])) == 0
    assert cost(inst([[1, 1]], [[1, -1]]), Assignment([[1, 1]])) == 0
    p = [[rand_frac(rng) for _ in range(4)] for _ in range(3)]
    c = [[rand_frac(rng, -1, 1) for _ in range(4)] for _ in range(3)]
    x = [[rng.randint(0, 1) for _ in range(4)] for _ in range(3)]
    expect = F(0)
    for i in range(3):
        for j in range(4):
            if x[i][j]:
                expect += c[i][j]
    assert cost(inst(p, c), Assignment(x)) == expect


def test_modified_makespan():
    i = inst([[1], [F(1, 10)]])
    x = FractionalAssignment([[F(1, 10)], [F(9, 10)]])
    assert modified_makespan(i, x) == 1
    assert modified_makespan(inst([[1, 1]]), FractionalAssignment([[0, 0]])) == math.inf


def test_dimension_mismatch():
    with pytest.raises(StructuralError):
        makespan(inst([[1, 1]]), Assignment([[1]]))
    with pytest.raises(StructuralError):
        SchedulingInstance(k=2, m=1, p=[[1]], c=[[0]])


def test_instance_invariants():
    with pytest.raises(StructuralError):
        inst([[-1]])
    with pytest.raises(StructuralError):
        SchedulingInstance(k=1, m=1, p=[[2]], c=[[0]], normalized=True)


def test_normalize_roundtrip():
    i = inst([[4, 2], [1, 8]])
    n = normalize(i)
    assert n.normalized and max(max(r) for r in n.p) == 1
    a = Assignment([[1, 0], [0, 1]])
    assert denormalize(n, makespan(n, a)) == makespan(i, a)


def test_json_roundtrip(tmp_path):
    i = inst([[F(1, 3), 2]], [[F(-1, 7), 0]])
    path = tmp_path / "i.json"
    import json

    path.write_text(json.dumps(i.to_json()))
    assert read_instance(path) == i
    assert i.to_json()["p"][0][0] == "1/3"


@st.composite
def instance_and_assignment(draw):
    k = draw(st.integers(1, 3))
    m = draw(st.integers(1, 4))
    fr = st.fractions(min_value=0, max_value=1, max_denominator=10)
    p = [[draw(fr) for _ in range(m)] for _ in range(k)]
    jobs = [draw(st.integers(0, k - 1)) for _ in range(m)]
    return inst(p), Assignment.from_jobs(k, jobs)


@settings(max_examples=60, deadline=None)
@given(instance_and_assignment())
def test_modified_equals_makespan_on_integral(data):
    i, a = data
    assert modified_makespan(i, a) == makespan(i, a)


@settings(max_examples=60, deadline=None)
@given(instance_and_assignment(), st.randoms(use_true_random=False))
def test_evaluators_permutation_invariant(data, r):
    i, a = data
    perm = list(range(i.k))
    r.shuffle(perm)
    ip = i.permuted(perm)
    ap = Assignment([a.x[q] for q in perm])
    assert makespan(ip, ap) == makespan(i, a)
    assert fairness(ip, ap) == fairness(i, a)
    assert cost(ip, ap) == cost(i, a)


@settings(max_examples=60, deadline=None)
@given(instance_and_assignment())
def test_adding_job_to_busiest_is_monotone(data):
    i, a = data
    # Move a job onto the busiest machine: makespan cannot decrease.
    loads = [sum(i.p[q][j] * a.x[q][j] for j in range(i.m)) for q in range(i.k)]
    busiest = loads.index(max(loads))
    jobs = a.jobs()
    for j in range(i.m):
        if jobs[j] != busiest:
            moved = list(jobs)
            moved[j] = busiest
            assert makespan(i, Assignment.from_jobs(i.k, moved)) >= makespan(i, a)
            break
    # Add a discarded job to the least-busy machine: fairness cannot decrease.
    least = loads.index(min(loads))
    dropped = list(jobs)
    dropped[0] = None
    before = fairness(i, Assignment.from_jobs(i.k, dropped))
    dropped[0] = least
    assert fairness(i, Assignment.from_jobs(i.k, dropped)) >= before
