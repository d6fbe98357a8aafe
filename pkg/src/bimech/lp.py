"""Exact rational linear programming and max-weight bipartite matching.

The simplex is a dense two-phase tableau over exact rationals (gmpy2 ``mpq``
internally, ``Fraction`` at the interface). Pivoting falls back to Bland's
rule on degenerate steps, so it never cycles and its output is a
deterministic vertex.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Optional, Sequence

from gmpy2 import mpq

from .errors import StructuralError

LE, EQ, GE = "<=", "=", ">="
_RELS = {"<=": LE, "≤": LE, "=": EQ, "==": EQ, ">=": GE, "≥": GE}

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass
class LinearProgram:
    """min/max objective·x subject to rows and per-variable bounds.

    ``bounds[j]`` is ``(lo, hi)`` with ``None`` meaning unbounded on that
    side. Variables default to ``x >= 0`` when no bounds are given.
    """

    n_vars: int
    constraints: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    sense: str = "min"
    bounds: Optional[list] = None

    def add(self, coeffs, rel: str, rhs) -> None:
        self.constraints.append((coeffs, rel, rhs))

    def add_sparse(self, terms: dict, rel: str, rhs) -> None:
        row = [ZERO] * self.n_vars
        for j, v in terms.items():
            row[j] += Fraction(v)
        self.constraints.append((row, rel, rhs))


@dataclass
class LpResult:
    status: str
    point: Optional[list] = None
    value: Optional[Fraction] = None
    duals: Optional[list] = None  # one per constraint row: d(value)/d(rhs)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _validate(lp: LinearProgram):
    n = lp.n_vars
    if n <= 0:
        raise StructuralError("linear program has no variables")
    obj = [Fraction(v) for v in lp.objective] if lp.objective else [ZERO] * n
    if len(obj) != n:
        raise StructuralError("objective length does not match n_vars")
    rows = []
    for coeffs, rel, rhs in lp.constraints:
        if rel not in _RELS:
            raise StructuralError(f"unknown relation {rel!r}")
        if len(coeffs) != n:
            raise StructuralError("constraint length does not match n_vars")
        rows.append(([Fraction(v) for v in coeffs], _RELS[rel], Fraction(rhs)))
    bounds = lp.bounds if lp.bounds is not None else [(ZERO, None)] * n
    if len(bounds) != n:
        raise StructuralError("bounds length does not match n_vars")
    bounds = [(None if lo is None else Fraction(lo), None if hi is None else Fraction(hi)) for lo, hi in bounds]
    if lp.sense not in ("min", "max"):
        raise StructuralError(f"unknown sense {lp.sense!r}")
    return obj, rows, bounds


def lp_solve(lp: LinearProgram) -> LpResult:
    obj, rows, bounds = _validate(lp)
    n = lp.n_vars

    for lo, hi in bounds:
        if lo is not None and hi is not None and lo > hi:
            return LpResult("infeasible")

    # Substitute x_j = off_j + sum(sign * y) over y >= 0 columns.
    cols: list[list[tuple[int, int]]] = []  # per original var: (new col, sign)
    offset = [ZERO] * n
    extra_rows = []
    n_new = 0
    for j, (lo, hi) in enumerate(bounds):
        if lo is not None:
            offset[j] = lo
            cols.append([(n_new, 1)])
            if hi is not None:
                extra_rows.append((n_new, hi - lo))
            n_new += 1
        elif hi is not None:
            offset[j] = hi
            cols.append([(n_new, -1)])
            n_new += 1
        else:
            cols.append([(n_new, 1), (n_new + 1, -1)])
            n_new += 2

    def transform(coeffs):
        out = [ZERO] * n_new
        shift = ZERO
        for j, a in enumerate(coeffs):
            if a:
                shift += a * offset[j]
                for col, s in cols[j]:
                    out[col] += a if s > 0 else -a
        return out, shift

    std_rows = []
    for coeffs, rel, rhs in rows:
        a, shift = transform(coeffs)
        std_rows.append((a, rel, rhs - shift))
    for col, width in extra_rows:
        a = [ZERO] * n_new
        a[col] = ONE
        std_rows.append((a, LE, width))

    c, c_shift = transform(obj)
    if lp.sense == "max":
        c = [-v for v in c]

    status, y, u = _simplex(n_new, std_rows, c)
    if status != "optimal":
        return LpResult(status)
    x = []
    for j in range(n):
        v = offset[j]
        for col, s in cols[j]:
            v += y[col] if s > 0 else -y[col]
        x.append(v)
    value = sum((a * b for a, b in zip(obj, x)), ZERO)
    duals = u[: len(rows)]
    if lp.sense == "max":
        duals = [-v for v in duals]
    return LpResult("optimal", x, value, duals)


def _simplex(n: int, rows, c):
    """Minimize c·y, y >= 0, subject to rows. Returns (status, y, duals)."""
    zero, one = mpq(0), mpq(1)
    norm = []
    flip = []
    for a, rel, b in rows:
        a = [mpq(v.numerator, v.denominator) for v in a]
        b = mpq(b.numerator, b.denominator)
        flip.append(b < 0)
        if b < 0:
            a = [-v for v in a]
            b = -b
            rel = {LE: GE, GE: LE, EQ: EQ}[rel]
        norm.append((a, rel, b))

    n_slack = sum(1 for _, rel, _ in norm if rel != EQ)
    n_art = sum(1 for _, rel, _ in norm if rel != LE)
    width = n + n_slack + n_art
    art_start = n + n_slack

    # Row layout: coefficients followed by the right-hand side in the last slot.
    tab: list[list] = []
    basis: list[int] = []
    s_idx, a_idx = n, art_start
    for a, rel, b in norm:
        row = a + [zero] * (n_slack + n_art) + [b]
        if rel == LE:
            row[s_idx] = one
            basis.append(s_idx)
            s_idx += 1
        elif rel == GE:
            row[s_idx] = -one
            s_idx += 1
            row[a_idx] = one
            basis.append(a_idx)
            a_idx += 1
        else:
            row[a_idx] = one
            basis.append(a_idx)
            a_idx += 1
        tab.append(row)
    # The initial unit column of each row; its final reduced cost is -dual.
    unit = list(basis)

    if n_art:
        cost1 = [zero] * art_start + [one] * n_art
        st = _run(tab, basis, cost1, width)
        assert st == "optimal"
        if sum((tab[r][-1] for r in range(len(tab)) if basis[r] >= art_start), zero) > 0:
            return "infeasible", None, None
        # Drive remaining (zero-level) artificials out of the basis.
        r = 0
        while r < len(tab):
            if basis[r] >= art_start:
                row = tab[r]
                enter = next((j for j in range(art_start) if row[j] != 0), None)
                if enter is None:
                    del tab[r], basis[r]
                    continue
                _pivot(tab, basis, r, enter)
            r += 1
        # Artificial columns stay (for duals) but may not re-enter.
        width = art_start

    cost2 = [mpq(v.numerator, v.denominator) for v in c]
    final: list = []
    st = _run(tab, basis, cost2, width, final)
    if st != "optimal":
        return st, None, None
    y = [ZERO] * n
    for r, bv in enumerate(basis):
        if bv < n:
            v = tab[r][-1]
            y[bv] = Fraction(int(v.numerator), int(v.denominator))
    duals = []
    for r, col in enumerate(unit):
        v = -final[col]
        v = Fraction(int(v.numerator), int(v.denominator))
        duals.append(-v if flip[r] else v)
    return "optimal", y, duals


def _pivot(tab, basis, r, e):
    prow = tab[r]
    piv = prow[e]
    if piv != 1:
        inv = 1 / piv
        for j, v in enumerate(prow):
            if v:
                prow[j] = v * inv
    nz = [j for j, v in enumerate(prow) if v]
    for i, row in enumerate(tab):
        if i == r:
            continue
        f = row[e]
        if f:
            for j in nz:
                row[j] -= f * prow[j]
    basis[r] = e


def _run(tab, basis, cost, width, final=None):
    """Primal simplex on a tableau already in basic form.

    Entering columns follow the most negative reduced cost, switching to
    Bland's rule during degenerate pivots.

    The reduced-cost row rides along as an extra tableau row so it is
    updated by the same pivots.
    """
    obj = list(cost) + [mpq(0)] * ((len(tab[0]) if tab else len(cost) + 1) - len(cost))
    for r, bv in enumerate(basis):
        f = obj[bv]
        if f:
            row = tab[r]
            for j, v in enumerate(row):
                if v:
                    obj[j] -= f * v
    tab.append(obj)
    try:
        m = len(tab) - 1
        degenerate = False
        while True:
            if degenerate:
                enter = next((j for j in range(width) if obj[j] < 0), None)
            else:
                enter = None
                for j in range(width):
                    if obj[j] < 0 and (enter is None or obj[j] < obj[enter]):
                        enter = j
            if enter is None:
                if final is not None:
                    final[:] = obj
                return "optimal"
            leave = None
            best = None
            for r in range(m):
                a = tab[r][enter]
                if a > 0:
                    ratio = tab[r][-1] / a
                    if best is None or ratio < best or (ratio == best and basis[r] < basis[leave]):
                        best, leave = ratio, r
            if leave is None:
                return "unbounded"
            # Bland's rule while pivots are degenerate rules out cycling.
            degenerate = best == 0
            # The objective row is not in ``basis``; give it a placeholder.
            basis.append(-1)
            _pivot(tab, basis, leave, enter)
            basis.pop()
    finally:
        tab.pop()


# ---------------------------------------------------------------------------
# Bipartite matching


@dataclass
class Matching:
    pairs: list
    weight: Fraction


def _hungarian_min(cost: list[list[Fraction]]) -> list[int]:
    """Square min-cost assignment with potentials; returns row -> column."""
    n = len(cost)
    INF = None
    u = [ZERO] * (n + 1)
    v = [ZERO] * (n + 1)
    p = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = INF
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = cost[i0 - 1][j - 1] - u[i0] - v[j]
                    if minv[j] is None or cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if delta is None or minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    out = [-1] * n
    for j in range(1, n + 1):
        if p[j]:
            out[p[j] - 1] = j - 1
    return out


def max_weight_bipartite_matching(weights: Sequence[Sequence], perfect: bool = False) -> Optional[Matching]:
    """Maximum-weight matching of an L×R weight matrix; ``None`` entries are forbidden edges.

    Among optimal matchings the one containing the lexicographically earliest
    edges (in row-major order) is returned. Without ``perfect`` only
    positive-weight edges are reported. With ``perfect`` every left node must
    be matched; returns ``None`` when that is impossible.
    """
    L = len(weights)
    if L == 0 or any(len(row) == 0 for row in weights):
        raise StructuralError("matching needs at least one node on each side")
    R = len(weights[0])
    if any(len(row) != R for row in weights):
        raise StructuralError("ragged weight matrix")
    w = [[None if v is None else Fraction(v) for v in row] for row in weights]
    if perfect and L > R:
        return None

    big = ZERO
    if perfect:
        big = 2 * sum((abs(v) for row in w for v in row if v is not None), ZERO) + 1
    eff = [[ZERO] * R for _ in range(L)]
    for l in range(L):
        for r in range(R):
            v = w[l][r]
            if v is None:
                continue
            eff[l][r] = v + big if perfect else max(v, ZERO)

    # Exact perturbation favouring earlier edges; never overturns a strict
    # difference because any two distinct totals differ by at least 1/D.
    den = 1
    for row in eff:
        for v in row:
            den = lcm(den, v.denominator)
    n_edges = L * R
    eps = Fraction(1, den * (1 << (n_edges + 1)))
    pert = [[ZERO] * R for _ in range(L)]
    for l in range(L):
        for r in range(R):
            if eff[l][r] > 0:
                pert[l][r] = eff[l][r] + eps * (1 << (n_edges - 1 - (l * R + r)))

    n = max(L, R)
    cost = [[ZERO] * n for _ in range(n)]
    for l in range(L):
        for r in range(R):
            cost[l][r] = -pert[l][r]
    assign = _hungarian_min(cost)

    pairs = []
    for l in range(L):
        r = assign[l]
        if r < R and eff[l][r] > 0:
            pairs.append((l, r))
    if perfect and len(pairs) < L:
        return None
    total = sum((w[l][r] for l, r in pairs), ZERO)
    return Matching(pairs, total)
