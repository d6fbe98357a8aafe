from __future__ import annotations

import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from bimech.errors import StructuralError
from bimech.lp import LinearProgram, lp_solve, max_weight_bipartite_matching
from tests.oracles import all_matchings_best, rand_frac, vertex_enumeration_min


def test_min_with_bounds_rows():
    lp = LinearProgram(1, [([1], ">=", 3), ([1], "<=", 10)], [1], "min")
    r = lp_solve(lp)
    assert r.status == "optimal" and r.point == [3] and r.value == 3


def test_max_simple():
    lp = LinearProgram(2, [([1, 1], "<=", 1)], [1, 1], "max")
    assert lp_solve(lp).value == 1


def test_infeasible_and_unbounded():
    assert lp_solve(LinearProgram(1, [([1], "<=", -1)], [1])).status == "infeasible"
    assert lp_solve(LinearProgram(1, [], [1], "max")).status == "unbounded"


def test_empty_program():
    with pytest.raises(StructuralError):
        lp_solve(LinearProgram(0))


def test_free_and_upper_bounds():
    lp = LinearProgram(2, [([1, 1], ">=", -5)], [1, 2], "min", bounds=[(None, None), (-1, 4)])
    r = lp_solve(lp)
    assert r.value == -6 and r.point == [-4, -1]
    lp = LinearProgram(1, [], [1], "max", bounds=[(None, F(7, 2))])
    assert lp_solve(lp).value == F(7, 2)


def _random_lp(rng, n=4, m=6):
    rows = []
    for _ in range(m):
        rows.append(([rand_frac(rng, -2, 2) for _ in range(n)], rand_frac(rng, 0, 3)))
    c = [rand_frac(rng, -2, 2) for _ in range(n)]
    return c, rows


def test_random_lp_vs_vertex_enumeration(rng):
    n = 4
    for _ in range(25):
        c, rows = _random_lp(rng, n)
        box = [([F(-1) if q == j else F(0) for q in range(n)], F(0)) for j in range(n)]
        box += [([F(1) if q == j else F(0) for q in range(n)], F(5)) for j in range(n)]
        lp = LinearProgram(n, [(a, "<=", b) for a, b in rows], c, "min", bounds=[(0, 5)] * n)
        res = lp_solve(lp)
        assert res.status == "optimal"
        for a, b in rows:
            assert sum(x * y for x, y in zip(a, res.point)) <= b
        assert res.value == vertex_enumeration_min(c, rows + box)


def test_row_permutation_invariance(rng):
    for _ in range(10):
        c, rows = _random_lp(rng, 3, 5)
        cons = [(a, "<=", b) for a, b in rows]
        v1 = lp_solve(LinearProgram(3, cons, c, "max", bounds=[(0, 3)] * 3)).value
        rng.shuffle(cons)
        v2 = lp_solve(LinearProgram(3, cons, c, "max", bounds=[(0, 3)] * 3)).value
        assert v1 == v2


def test_degenerate_equalities():
    # Redundant equality rows leave an artificial in the basis at level zero.
    lp = LinearProgram(2, [([1, 1], "=", 1), ([2, 2], "=", 2), ([1, 0], ">=", 0)], [1, -1])
    r = lp_solve(lp)
    assert r.value == -1 and r.point == [0, 1]


def test_matching_examples():
    m = max_weight_bipartite_matching([[5]])
    assert m.pairs == [(0, 0)] and m.weight == 5
    m = max_weight_bipartite_matching([[1, 0], [0, 1]])
    assert m.pairs == [(0, 0), (1, 1)] and m.weight == 2


def test_matching_vs_enumeration(rng):
    for _ in range(30):
        w = [[rand_frac(rng, -1, 3) if rng.random() > 0.2 else None for _ in range(6)] for _ in range(4)]
        assert max_weight_bipartite_matching(w).weight == all_matchings_best(w)


def test_matching_tie_break_is_lexicographic():
    m = max_weight_bipartite_matching([[1, 1], [1, 1]])
    assert m.pairs == [(0, 0), (1, 1)]
    m = max_weight_bipartite_matching([[1, 1, 1]])
    assert m.pairs == [(0, 0)]


def test_perfect_matching():
    m = max_weight_bipartite_matching([[-1, None], [-5, -2]], perfect=True)
    assert m.pairs == [(0, 0), (1, 1)] and m.weight == -3
    assert max_weight_bipartite_matching([[1, None], [2, None]], perfect=True) is None


def _assignment_lp_value(w):
    L, R = len(w), len(w[0])
    n = L * R
    lp = LinearProgram(n, objective=[w[l][r] if w[l][r] is not None else 0 for l in range(L) for r in range(R)], sense="max")
    bounds = []
    for l in range(L):
        for r in range(R):
            bounds.append((0, 0) if w[l][r] is None else (0, None))
    lp.bounds = bounds
    for l in range(L):
        lp.add_sparse({l * R + r: 1 for r in range(R)}, "<=", 1)
    for r in range(R):
        lp.add_sparse({l * R + r: 1 for l in range(L)}, "<=", 1)
    return lp_solve(lp).value


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 3).flatmap(
        lambda L: st.integers(1, 4).flatmap(
            lambda R: st.lists(
                st.lists(st.one_of(st.none(), st.fractions(-2, 3, max_denominator=6)), min_size=R, max_size=R),
                min_size=L,
                max_size=L,
            )
        )
    )
)
def test_matching_equals_assignment_lp(w):
    assert max_weight_bipartite_matching(w).weight == max(_assignment_lp_value(w), 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["min", "max"]))
def test_duals_certify_optimality(seed, sense):
    rng = random.Random(seed)
    n = rng.randint(1, 4)
    cons = []
    for _ in range(rng.randint(1, 5)):
        rel = rng.choice(["<=", ">=", "="])
        cons.append(([rand_frac(rng, -2, 2) for _ in range(n)], rel, rand_frac(rng, -3, 3)))
    c = [rand_frac(rng, -2, 2) for _ in range(n)]
    res = lp_solve(LinearProgram(n, cons, c, sense, bounds=[(0, None)] * n))
    if not res.optimal:
        return
    u = res.duals
    assert len(u) == len(cons)
    assert sum(v * b for v, (_, _, b) in zip(u, cons)) == res.value
    flip = 1 if sense == "min" else -1
    for v, (_, rel, _) in zip(u, cons):
        if rel == "<=":
            assert flip * v <= 0
        elif rel == ">=":
            assert flip * v >= 0
    for j in range(n):
        reduced = c[j] - sum(v * a[j] for v, (a, _, _) in zip(u, cons))
        assert flip * reduced >= 0
