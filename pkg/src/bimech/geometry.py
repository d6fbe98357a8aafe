"""Ellipsoid method, weird separation oracle (WSO), and convex decomposition.

A WSO is built from an approximate linear optimizer ``A`` for a polytope
``P``. It either accepts a point ``y`` together with an explicit convex
decomposition of ``y`` over scaled outputs ``A^beta_S(w)``, or returns a
halfspace ``{x : w.x >= t}`` that contains ``alpha P`` and excludes ``y``.

Two engines run the inner search over ``(w, t)``:

* ``ellipsoid``: central/deep-cut ellipsoid in mpmath arithmetic. Each
  candidate ``(w, t)`` is converted to exact rationals before ``A`` is
  queried, so every emitted halfspace and decomposition is exact.
* ``exact``: a cutting-plane loop solving the inner problem as an exact LP
  over the outputs collected so far. It accepts exactly when ``y`` lies in
  their convex hull.

Points are sequences of ``Fraction``; the ellipsoid internals use ``mpf``.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import mpmath

from .errors import DomainError, InfeasibleError, InvariantError, NonConvergenceError, PrecisionError, StructuralError
from .lp import LinearProgram, lp_solve

DEFAULT_PRECISION = 256


def default_precision() -> int:
    raw = os.environ.get("BIMECH_PRECISION")
    if not raw:
        return DEFAULT_PRECISION
    try:
        bits = int(raw)
    except ValueError as exc:
        raise StructuralError(f"BIMECH_PRECISION must be an integer, got {raw!r}") from exc
    if bits < 53:
        raise StructuralError("BIMECH_PRECISION must be at least 53 bits")
    return bits


def to_fraction(x) -> Fraction:
    """Exact value of an mpf (or int/Fraction)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if not mpmath.isfinite(x):
        raise PrecisionError(f"non-finite value {x}")
    sign, man, exp, _ = mpmath.mpf(x)._mpf_
    man = -int(man) if sign else int(man)
    return Fraction(man * (1 << exp)) if exp >= 0 else Fraction(man, 1 << -exp)


def snap(x, bits: int) -> Fraction:
    """Nearest point of the grid ``2^-bits`` to an mpf."""
    return Fraction(int(mpmath.nint(x * mpmath.mpf(2) ** bits)), 1 << bits)


def to_mpf(q: Fraction):
    return mpmath.mpf(q.numerator) / q.denominator


def dot(a, b):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def bit_complexity(y: Sequence[Fraction]) -> int:
    return sum(Fraction(v).numerator.bit_length() + Fraction(v).denominator.bit_length() for v in y)


def digest(point) -> str:
    text = ",".join(str(Fraction(v)) for v in point)
    return hashlib.sha1(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Halfspace:
    """The set ``{x : w.x >= t}``."""

    w: tuple
    t: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "w", tuple(Fraction(v) for v in self.w))
        object.__setattr__(self, "t", Fraction(self.t))
        if all(v == 0 for v in self.w):
            raise StructuralError("halfspace direction is zero")

    def contains(self, x) -> bool:
        return dot(self.w, [Fraction(v) for v in x]) >= self.t

    def slack(self, x) -> Fraction:
        return dot(self.w, [Fraction(v) for v in x]) - self.t


# ---------------------------------------------------------------------------
# Approximate optimizers


class OptimizationAlgorithm:
    """An ``(alpha, beta, S)`` optimizer wrapped for WSO use.

    ``fn(w)`` returns a point of dimension ``dim``. For ``sense="min"`` the
    contract is ``A^beta_S(w).w <= alpha * min_{x in P} x.w``; for ``"max"``
    the inequality and the ``min`` flip. Maximizers are driven through
    ``A(-w)``, which is a minimizer for the same ``P`` with the same
    ``alpha`` and ``beta``, so the WSO logic is written once.

    ``bound`` is an upper bound on ``|A^beta_S(w)_i|``; it sizes the inner
    ellipsoid. Every query is logged in ``history`` as
    ``(direction passed to fn, A^beta_S output)``.
    """

    def __init__(self, fn: Callable, dim: int, alpha=1, beta=1, S=(), sense: str = "min", bound=1):
        if sense not in ("min", "max"):
            raise StructuralError(f"unknown sense {sense!r}")
        self.fn = fn
        self.dim = dim
        self.alpha = Fraction(alpha)
        self.beta = Fraction(beta)
        self.S = frozenset(S)
        self.sense = sense
        self.bound = Fraction(bound)
        self.queries = 0
        self.history: list = []
        self._cache: dict = {}
        self._pool: dict = {}

    def raw(self, w) -> tuple:
        w = tuple(Fraction(v) for v in w)
        if w in self._cache:
            return self._cache[w]
        out = tuple(Fraction(v) for v in self.fn(w))
        if len(out) != self.dim:
            raise StructuralError("optimizer output has the wrong dimension")
        self.queries += 1
        self._cache[w] = out
        return out

    def scaled(self, w) -> tuple:
        """``A^beta_S`` of the minimization-oriented algorithm at ``w``."""
        fed = tuple(Fraction(v) for v in w)
        if self.sense == "max":
            fed = tuple(-v for v in fed)
        out = self.raw(fed)
        pt = tuple(self.beta * v if q in self.S else v for q, v in enumerate(out))
        self.history.append((fed, pt))
        self._pool.setdefault(pt, fed)
        return pt

    def pool(self) -> tuple[list, list]:
        """Distinct logged outputs and one direction that produced each."""
        pts = list(self._pool)
        return pts, [self._pool[p] for p in pts]


# ---------------------------------------------------------------------------
# Convex hull helpers (exact)


def hull_weights(y: Sequence, points: Sequence[Sequence]) -> Optional[list[Fraction]]:
    """Exact convex weights reproducing ``y`` from ``points``, or ``None``.

    The LP returns a vertex, so at most ``d + 1`` weights are nonzero.
    """
    if not points:
        return None
    d = len(y)
    n = len(points)
    lp = LinearProgram(n, objective=[0] * n, sense="min")
    lp.add([1] * n, "=", 1)
    for q in range(d):
        lp.add([Fraction(p[q]) for p in points], "=", Fraction(y[q]))
    res = lp_solve(lp)
    return res.point if res.optimal else None


def caratheodory(y: Sequence, generators: Sequence[Sequence]) -> list[Fraction]:
    """Convex weights over ``generators`` with at most ``d + 1`` nonzero entries."""
    if any(len(g) != len(y) for g in generators):
        raise StructuralError("generator dimension does not match the point")
    lam = hull_weights(y, generators)
    if lam is None:
        raise DomainError("point is not in the convex hull of the generators")
    return lam


def nearest_hull_weights(y: Sequence, points: Sequence[Sequence]) -> tuple[list[Fraction], Fraction]:
    """Convex weights minimizing the max-norm residual ``|sum l p - y|``."""
    d, n = len(y), len(points)
    lp = LinearProgram(n + 1, objective=[0] * n + [1], sense="min")
    lp.add([1] * n + [0], "=", 1)
    for q in range(d):
        row = [Fraction(p[q]) for p in points]
        lp.add(row + [-1], "<=", Fraction(y[q]))
        lp.add([-v for v in row] + [-1], "<=", -Fraction(y[q]))
    res = lp_solve(lp)
    return res.point[:n], res.point[n]


# ---------------------------------------------------------------------------
# Ellipsoid


@dataclass
class EllipsoidConfig:
    """Ellipsoid and WSO parameters; ``None`` fields get the documented defaults.

    ``delta`` defaults to ``2^-(L+20)`` with ``L`` the bit complexity of the
    queried point; ``N`` defaults to ``ceil(8 n (n+1) (L + log2 R + 20))`` for
    an ``n``-dimensional ellipsoid. Both are engineering choices.
    """

    N: Optional[int] = None
    delta: Optional[Fraction] = None
    R: Optional[Fraction] = None
    precision: int = field(default_factory=default_precision)
    engine: str = "ellipsoid"
    max_queries: Optional[int] = None
    max_rounds: int = 10_000
    log_path: Optional[str] = None

    def __post_init__(self) -> None:
        if self.N is not None and self.N < 1:
            raise StructuralError("N must be positive")
        if self.delta is not None and Fraction(self.delta) <= 0:
            raise StructuralError("delta must be positive")
        if self.R is not None and Fraction(self.R) <= 0:
            raise StructuralError("R must be positive")
        if self.engine not in ("ellipsoid", "exact"):
            raise StructuralError(f"unknown engine {self.engine!r}")


def default_N(n: int, L: int, R) -> int:
    return math.ceil(8 * n * (n + 1) * (L + math.log2(max(float(R), 1.0)) + 20))


class _QueryLog:
    def __init__(self, path: Optional[str]):
        self.path = path
        self.lines: list[str] = []

    def add(self, iteration: int, point, outcome: str) -> None:
        self.lines.append(f"{iteration}\t{digest(point)}\t{outcome}")

    def flush(self) -> None:
        if self.path:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write("".join(line + "\n" for line in self.lines))
            self.lines = []


@dataclass
class EllipsoidResult:
    feasible: bool
    point: Optional[list]  # exact rationals of the accepted center
    iterations: int
    log: list


class _Stop(Exception):
    """Raised by an oracle to end an ellipsoid run with a certificate."""

    def __init__(self, payload=None):
        super().__init__()
        self.payload = payload


def ellipsoid_feasibility(
    oracle: Callable,
    dim: int,
    cfg: EllipsoidConfig,
    center: Optional[Sequence] = None,
    N: Optional[int] = None,
    R=None,
    log: Optional[_QueryLog] = None,
    precision: Optional[int] = None,
) -> EllipsoidResult:
    """Search for a point the oracle accepts, starting from a ball of radius ``R``.

    ``oracle(x)`` gets exact rationals and returns ``None`` to accept or a
    :class:`Halfspace` that contains the target set but not ``x``. The run
    declares infeasibility after ``N`` cuts or when a deep cut leaves nothing.
    Centers are snapped to the grid ``2^-(precision/4)`` before each query so
    oracle inputs keep a bounded bit size.
    """
    R = Fraction(R if R is not None else (cfg.R if cfg.R is not None else 1))
    N = N if N is not None else (cfg.N if cfg.N is not None else default_N(dim, 0, R))
    own_log = log is None
    log = log or _QueryLog(cfg.log_path)
    bits = max(cfg.precision // 4, 16)
    with mpmath.workprec(precision or cfg.precision):
        c = [to_mpf(Fraction(v)) for v in center] if center is not None else [mpmath.mpf(0)] * dim
        r2 = to_mpf(R) ** 2
        P = [[r2 if a == b else mpmath.mpf(0) for b in range(dim)] for a in range(dim)]
        try:
            for it in range(1, N + 1):
                x = [snap(v, bits) for v in c]
                h = oracle(x)
                if h is None:
                    log.add(it, x, "accept")
                    return EllipsoidResult(True, x, it, log.lines)
                log.add(it, x, "cut")
                # Keep {g.z <= hh} with g = -w, hh = -t.
                g = [-to_mpf(v) for v in h.w]
                hh = -to_mpf(h.t)
                if not _cut(c, P, g, hh):
                    return EllipsoidResult(False, None, it, log.lines)
                if not all(mpmath.isfinite(v) for v in c):
                    raise PrecisionError("ellipsoid center became non-finite")
            return EllipsoidResult(False, None, N, log.lines)
        finally:
            if own_log:
                log.flush()


def _cut(c, P, g, h) -> bool:
    """Deep-cut update keeping ``{z : g.z <= h}``; False when nothing is left."""
    n = len(c)
    Pg = [sum((P[a][b] * g[b] for b in range(n)), mpmath.mpf(0)) for a in range(n)]
    gPg = sum((g[a] * Pg[a] for a in range(n)), mpmath.mpf(0))
    if gPg <= 0:
        raise PrecisionError("ellipsoid matrix lost positive definiteness")
    s = mpmath.sqrt(gPg)
    alpha = (sum((g[a] * c[a] for a in range(n)), mpmath.mpf(0)) - h) / s
    if alpha >= 1:
        return False
    if alpha <= mpmath.mpf(-1) / n:
        return True  # too shallow to shrink the ellipsoid
    if n == 1:
        r = s / abs(g[0])
        lo, hi = c[0] - r, c[0] + r
        bound = h / g[0]
        if g[0] > 0:
            hi = min(hi, bound)
        else:
            lo = max(lo, bound)
        c[0] = (lo + hi) / 2
        P[0][0] = ((hi - lo) / 2) ** 2
        return hi > lo
    tau = (1 + n * alpha) / (n + 1)
    sigma = 2 * (1 + n * alpha) / ((n + 1) * (1 + alpha))
    scale = mpmath.mpf(n * n) / (n * n - 1) * (1 - alpha * alpha)
    for a in range(n):
        c[a] -= tau * Pg[a] / s
    for a in range(n):
        for b in range(n):
            P[a][b] = scale * (P[a][b] - sigma * Pg[a] * Pg[b] / gPg)
    return True


# ---------------------------------------------------------------------------
# Weird separation oracle


@dataclass
class WsoOutcome:
    accepted: bool
    halfspace: Optional[Halfspace] = None
    directions: list = field(default_factory=list)  # as passed to the optimizer
    points: list = field(default_factory=list)  # matching A^beta_S outputs
    weights: list = field(default_factory=list)
    residual: Fraction = Fraction(0)
    queries: int = 0


def _accept(y, A: OptimizationAlgorithm, queries: int, precision: int, exact_only: bool) -> WsoOutcome:
    pts, dirs = A.pool()
    lam = hull_weights(y, pts)
    residual = Fraction(0)
    if lam is None:
        if exact_only or not pts:
            raise PrecisionError("accepted point has no exact decomposition", directions=dirs)
        lam, residual = nearest_hull_weights(y, pts)
        # one step of the grid that ellipsoid centers are snapped to
        if residual > Fraction(1, 2 ** max(precision // 4, 16)):
            raise PrecisionError(f"decomposition residual {float(residual):.3g} above tolerance", directions=dirs)
    keep = [q for q, v in enumerate(lam) if v > 0]
    return WsoOutcome(
        True,
        directions=[dirs[q] for q in keep],
        points=[pts[q] for q in keep],
        weights=[lam[q] for q in keep],
        residual=residual,
        queries=queries,
    )


def wso(y: Sequence, A: OptimizationAlgorithm, cfg: EllipsoidConfig) -> WsoOutcome:
    """Accept ``y`` with a decomposition, or return a halfspace containing ``alpha P``."""
    y = [Fraction(v) for v in y]
    if len(y) != A.dim:
        raise StructuralError("point dimension does not match the optimizer")
    if cfg.engine == "exact":
        return _wso_exact(y, A, cfg)
    return _wso_ellipsoid(y, A, cfg)


def _wso_exact(y, A: OptimizationAlgorithm, cfg: EllipsoidConfig) -> WsoOutcome:
    d = A.dim
    start = A.queries
    cap = cfg.max_queries or cfg.max_rounds
    if not A.history:
        A.scaled([Fraction(0)] * d)
    while True:
        pts, dirs = A.pool()
        K = len(pts)
        # l1 distance from y to conv(pool): lambda on the simplex, y = sum lambda a + r+ - r-.
        # Its duals (t, -w) solve  max t - y.w  s.t.  t <= a.w for pooled a, w in [-1, 1]^d.
        lp = LinearProgram(K + 2 * d, objective=[0] * K + [1] * (2 * d))
        lp.add([1] * K + [0] * (2 * d), "=", 1)
        for q in range(d):
            row = [a[q] for a in pts] + [0] * (2 * d)
            row[K + q] = -1
            row[K + d + q] = 1
            lp.add(row, "=", y[q])
        res = lp_solve(lp)
        if not res.optimal:
            raise InvariantError(f"inner WSO program is {res.status}")
        if res.value == 0:
            lam = res.point[:K]
            keep = [q for q in range(K) if lam[q] > 0]
            return WsoOutcome(
                True,
                directions=[dirs[q] for q in keep],
                points=[pts[q] for q in keep],
                weights=[lam[q] for q in keep],
                residual=Fraction(0),
                queries=A.queries - start,
            )
        t = res.duals[0]
        w = [-v for v in res.duals[1:]]
        a = A.scaled(w)
        if A.queries - start > cap:
            raise NonConvergenceError(f"WSO used more than {cap} optimizer queries", cfg.log_path)
        if t <= dot(a, w):
            return WsoOutcome(False, halfspace=Halfspace(w, t), queries=A.queries - start)
        if a in pts:
            raise InvariantError("optimizer repeated an output that the inner program already excludes")


def _wso_ellipsoid(y, A: OptimizationAlgorithm, cfg: EllipsoidConfig) -> WsoOutcome:
    d = A.dim
    L = bit_complexity(y)
    delta = Fraction(cfg.delta) if cfg.delta is not None else Fraction(1, 2 ** (L + 20))
    t_span = sum((abs(v) for v in y), Fraction(0)) + delta + d * A.bound + 1
    R = Fraction(cfg.R) if cfg.R is not None else Fraction(math.isqrt(int(d + t_span**2) + 1) + 1)
    n = d + 1
    N = cfg.N if cfg.N is not None else default_N(n, L, R)
    cap = cfg.max_queries if cfg.max_queries is not None else N + 2 * d
    start = A.queries
    log = _QueryLog(cfg.log_path)
    state = {"pool": len(A.pool()[0])}

    def check_hull():
        pts, _ = A.pool()
        if len(pts) != state["pool"]:
            state["pool"] = len(pts)
            if hull_weights(y, pts) is not None:
                raise _Stop()

    def inner(z):
        w, t = z[:d], z[d]
        for q in range(d):
            if w[q] > 1:
                return Halfspace([-1 if r == q else 0 for r in range(n)], -1)
            if w[q] < -1:
                return Halfspace([1 if r == q else 0 for r in range(n)], -1)
        if t < dot(y, w) + delta:
            return Halfspace([-v for v in y] + [1], delta)
        a = A.scaled(w)
        if A.queries - start > cap:
            raise InvariantError("WSO exceeded its query budget")
        if t <= dot(a, w):
            raise _Stop((w, t))
        check_hull()
        return Halfspace(list(a) + [-1], 0)

    try:
        # Coordinate directions first: cheap hull certificates for interior points.
        for q in range(d):
            for sgn in (1, -1):
                A.scaled([sgn if r == q else 0 for r in range(d)])
        state["pool"] = -1
        check_hull()
        # delta must stay resolvable: widen the working precision when needed.
        prec = max(cfg.precision, 2 * (delta.denominator.bit_length() + 40))
        ellipsoid_feasibility(inner, n, cfg, center=[0] * n, N=N, R=R, log=log, precision=prec)
    except _Stop as stop:
        log.flush()
        if stop.payload is not None:
            w, t = stop.payload
            return WsoOutcome(False, halfspace=Halfspace(w, t), queries=A.queries - start)
        return _accept(y, A, A.queries - start, cfg.precision, exact_only=True)
    log.flush()
    # N cuts without a feasible (w, t): the oracle says yes; decompose within precision.
    return _accept(y, A, A.queries - start, cfg.precision, exact_only=False)


class WsoHandle:
    """``y -> WsoOutcome`` bound to an optimizer and a configuration."""

    def __init__(self, A: OptimizationAlgorithm, cfg: EllipsoidConfig):
        self.A = A
        self.cfg = cfg
        self.calls = 0
        self.last: Optional[WsoOutcome] = None

    def __call__(self, y) -> WsoOutcome:
        self.calls += 1
        self.last = wso(y, self.A, self.cfg)
        return self.last


# ---------------------------------------------------------------------------
# Optimization with a WSO


@dataclass
class OptimizeResult:
    point: list
    value: Fraction
    directions: list
    points: list
    weights: list
    probes: int = 0


def _lift(h: Halfspace, dims: Sequence[int], d: int) -> Halfspace:
    w = [Fraction(0)] * d
    for q, v in zip(dims, h.w):
        w[q] = v
    return Halfspace(w, h.t)


def _box_cut(x, box):
    for q, (lo, hi) in enumerate(box):
        if x[q] < lo:
            return Halfspace([1 if r == q else 0 for r in range(len(box))], lo)
        if x[q] > hi:
            return Halfspace([-1 if r == q else 0 for r in range(len(box))], -hi)
    return None


def ellipsoid_optimize_with_wso(
    c: Sequence,
    Q: Callable,
    W: WsoHandle,
    cfg: EllipsoidConfig,
    value_range: tuple,
    tol,
    box: Sequence[tuple],
    free: Sequence[int] = (),
) -> OptimizeResult:
    """Binary search on ``C`` with an ellipsoid feasibility run per probe.

    Each probe looks for ``x`` in ``box`` with ``c.x <= C``, ``Q(x)`` accepting
    and the WSO accepting. The point from the last feasible probe is returned
    with the WSO's decomposition of it. Coordinates in ``free`` are seen by
    ``Q`` but not by the WSO.
    """
    c = [Fraction(v) for v in c]
    if W.A.beta != 1 and any(v != 0 for q, v in enumerate(c) if q not in W.A.S):
        raise StructuralError("objective must be supported on S")
    d = len(c)
    box = [(Fraction(lo), Fraction(hi)) for lo, hi in box]
    center = [(lo + hi) / 2 for lo, hi in box]
    half = max(hi - lo for lo, hi in box) / 2
    R = Fraction(math.isqrt(d) + 1) * half + 1
    N = cfg.N if cfg.N is not None else default_N(d, 64, R)
    lo, hi = Fraction(value_range[0]), Fraction(value_range[1])
    tol = Fraction(tol)
    log = _QueryLog(cfg.log_path)
    wso_dims = [q for q in range(d) if q not in set(free)]

    def probe(C):
        found = {}

        def oracle(x):
            cut = _box_cut(x, box)
            if cut is not None:
                return cut
            if dot(c, x) > C:
                return Halfspace([-v for v in c], -C)
            hq = Q(x)
            if hq is not None:
                return hq
            out = W([x[q] for q in wso_dims])
            if out.accepted:
                found["outcome"] = out
                return None
            return _lift(out.halfspace, wso_dims, d)

        res = ellipsoid_feasibility(oracle, d, cfg, center=center, N=N, R=R, log=log)
        return (res.point, found["outcome"]) if res.feasible else None

    probes = 1
    best = probe(hi)
    if best is None:
        log.flush()
        raise InfeasibleError("no accepted point with objective at most the top of the value range")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        probes += 1
        got = probe(mid)
        if got is None:
            lo = mid
        else:
            best, hi = got, mid
    log.flush()
    x, out = best
    return OptimizeResult(x, dot(c, x), out.directions, out.points, out.weights, probes)


def cutting_plane_optimize(
    c: Sequence,
    Q: Callable,
    W: WsoHandle,
    box: Sequence[tuple],
    max_rounds: int = 10_000,
    sense: str = "min",
    free: Sequence[int] = (),
) -> OptimizeResult:
    """Exact counterpart of :func:`ellipsoid_optimize_with_wso`.

    Repeatedly solves ``min c.x`` over the box intersected with every cut
    returned so far by ``Q`` and the WSO. Both only return halfspaces that
    contain ``alpha P`` intersected with ``Q``, so the first point accepted by
    both has ``c.x`` at most the optimum over that set.
    Coordinates in ``free`` are passed to ``Q`` but not to the WSO.
    Each round is logged to ``W.cfg.log_path`` when one is set.
    """
    c = [Fraction(v) for v in c]
    d = len(c)
    box = [(Fraction(lo), Fraction(hi)) for lo, hi in box]
    cuts: list[Halfspace] = []
    wso_dims = [q for q in range(d) if q not in set(free)]
    log = _QueryLog(W.cfg.log_path)
    try:
        for r in range(max_rounds):
            lp = LinearProgram(d, objective=c, sense=sense)
            lp.bounds = box
            for h in cuts:
                lp.add(list(h.w), ">=", h.t)
            res = lp_solve(lp)
            if not res.optimal:
                raise InfeasibleError(f"cut region is {res.status}")
            x = res.point
            hq = Q(x)
            if hq is not None:
                log.add(r, x, "q-cut")
                cuts.append(hq)
                continue
            out = W([x[q] for q in wso_dims])
            if out.accepted:
                log.add(r, x, "accept")
                return OptimizeResult(x, res.value, out.directions, out.points, out.weights, len(cuts))
            log.add(r, x, "wso-cut")
            cuts.append(_lift(out.halfspace, wso_dims, d))
    finally:
        log.flush()
    raise NonConvergenceError(f"cutting-plane search did not converge in {max_rounds} rounds", W.cfg.log_path)
