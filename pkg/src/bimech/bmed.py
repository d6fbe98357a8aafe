"""Bayesian mechanism design on top of the scheduling GOOP solvers.

Bidders are machines. A type is an ``m``-vector of processing times and its
value for an outcome is the total processing time it receives. An implicit
form is the vector ``[O, pi, p]`` with ``pi`` laid out bidder by bidder as
``pi_i(t, t')`` in row-major order over ``(t, t')`` and ``p`` as ``p_i(t)``.

Interim quantities under an empirical distribution ``D'`` condition on the
bidder's own report: ``pi_i(t, t') = E[t(A(s)) | s_i = t']`` for profiles
``s`` drawn from ``D'``. For a product distribution this is the usual
definition, and it is what makes the virtual-objective identity exact.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .core import Assignment, SchedulingInstance, fairness, frac_str, makespan, to_fraction
from .errors import DomainError, StructuralError
from .geometry import (
    EllipsoidConfig,
    Halfspace,
    OptimizationAlgorithm,
    WsoHandle,
    cutting_plane_optimize,
    ellipsoid_optimize_with_wso,
)
from .goop_fairness import bd_solve, greedy_v
from .goop_makespan import min_cost_only, solve_makespan_with_costs
from .oracle import FAIRNESS, MAKESPAN

O_MAX = Fraction(1)

Profile = tuple


@dataclass(frozen=True)
class BmedInstance:
    k: int
    m: int
    types: tuple  # types[i][t] is an m-tuple of processing times
    probs: tuple  # probs[i][t]
    objective: str = MAKESPAN

    def __post_init__(self) -> None:
        if self.k < 1 or self.m < 1:
            raise StructuralError("k and m must be positive")
        if self.objective not in (MAKESPAN, FAIRNESS):
            raise StructuralError(f"unknown objective {self.objective!r}")
        types = tuple(tuple(tuple(to_fraction(v) for v in t) for t in ts) for ts in self.types)
        probs = tuple(tuple(to_fraction(v) for v in ps) for ps in self.probs)
        if len(types) != self.k or len(probs) != self.k:
            raise StructuralError("need one type list and one distribution per bidder")
        for ts, ps in zip(types, probs):
            if not ts or len(ts) != len(ps):
                raise StructuralError("type list and probability vector must be nonempty and aligned")
            if any(len(t) != self.m for t in ts):
                raise StructuralError("every type needs one processing time per job")
            if any(v < 0 or v > 1 for t in ts for v in t):
                raise StructuralError("processing times must lie in [0, 1]")
            if any(q < 0 for q in ps) or sum(ps) != 1:
                raise StructuralError("probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "types", types)
        object.__setattr__(self, "probs", probs)

    @property
    def sizes(self) -> list[int]:
        return [len(ts) for ts in self.types]

    @property
    def sense(self) -> str:
        return "min" if self.objective == MAKESPAN else "max"

    @property
    def dim(self) -> int:
        return 1 + sum(n * n for n in self.sizes) + sum(self.sizes)

    @property
    def pi_dim(self) -> int:
        return 1 + sum(n * n for n in self.sizes)

    def pi_index(self, i: int, t: int, tp: int) -> int:
        n = self.sizes
        return 1 + sum(s * s for s in n[:i]) + t * n[i] + tp

    def p_index(self, i: int, t: int) -> int:
        return self.pi_dim + sum(self.sizes[:i]) + t

    def profiles(self) -> list[Profile]:
        return list(product(*[range(n) for n in self.sizes]))

    def prob(self, profile: Profile) -> Fraction:
        out = Fraction(1)
        for i, t in enumerate(profile):
            out *= self.probs[i][t]
        return out

    def distribution(self) -> list[tuple[Profile, Fraction]]:
        """The prior D as an explicit list, zero-probability profiles dropped."""
        return [(s, self.prob(s)) for s in self.profiles() if self.prob(s) > 0]

    def processing(self, profile: Profile) -> list:
        return [self.types[i][t] for i, t in enumerate(profile)]

    def value(self, i: int, t: int, a: Assignment) -> Fraction:
        """``t(x)``: processing time bidder ``i`` of type ``t`` receives."""
        row = a.x[i]
        return sum((v for v, x in zip(self.types[i][t], row) if x), Fraction(0))

    def objective_value(self, profile: Profile, a: Assignment) -> Fraction:
        inst = SchedulingInstance.from_lists(self.processing(profile))
        return makespan(inst, a) if self.objective == MAKESPAN else fairness(inst, a)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "m": self.m,
            "objective": self.objective,
            "bidders": [
                {"types": [[frac_str(v) for v in t] for t in ts], "probs": [frac_str(q) for q in ps]}
                for ts, ps in zip(self.types, self.probs)
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> BmedInstance:
        try:
            bidders = doc["bidders"]
            return cls(
                k=int(doc["k"]),
                m=int(doc["m"]),
                types=[b["types"] for b in bidders],
                probs=[b["probs"] for b in bidders],
                objective=doc.get("objective", MAKESPAN),
            )
        except (KeyError, TypeError) as exc:
            raise StructuralError(f"malformed mechanism-design instance: {exc}") from exc


# ---------------------------------------------------------------------------
# Implicit forms and directions


@dataclass(frozen=True)
class ImplicitForm:
    O: Fraction
    pi: tuple  # pi[i][t][t']
    p: tuple  # p[i][t]

    def vector(self) -> list[Fraction]:
        out = [self.O]
        for mat in self.pi:
            for row in mat:
                out.extend(row)
        for row in self.p:
            out.extend(row)
        return out

    @classmethod
    def from_vector(cls, inst: BmedInstance, vec: Sequence) -> ImplicitForm:
        vec = [Fraction(v) for v in vec]
        if len(vec) not in (inst.dim, inst.pi_dim):
            raise StructuralError("implicit-form vector has the wrong length")
        if len(vec) == inst.pi_dim:
            vec = vec + [Fraction(0)] * (inst.dim - inst.pi_dim)
        n = inst.sizes
        pi = tuple(
            tuple(tuple(vec[inst.pi_index(i, t, tp)] for tp in range(n[i])) for t in range(n[i])) for i in range(inst.k)
        )
        p = tuple(tuple(vec[inst.p_index(i, t)] for t in range(n[i])) for i in range(inst.k))
        return cls(vec[0], pi, p)

    def dot(self, w: Direction) -> Fraction:
        return sum((a * b for a, b in zip(self.vector(), w.vector())), Fraction(0))

    def to_json(self) -> dict:
        return {
            "O": frac_str(self.O),
            "pi": [[[frac_str(v) for v in row] for row in mat] for mat in self.pi],
            "p": [[frac_str(v) for v in row] for row in self.p],
        }


@dataclass(frozen=True)
class Direction:
    w_O: Fraction
    w: tuple  # w[i][t][t']

    def vector(self) -> list[Fraction]:
        out = [self.w_O]
        for mat in self.w:
            for row in mat:
                out.extend(row)
        return out

    @classmethod
    def from_vector(cls, inst: BmedInstance, vec: Sequence) -> Direction:
        vec = [Fraction(v) for v in vec][: inst.pi_dim]
        if len(vec) != inst.pi_dim:
            raise StructuralError("direction vector has the wrong length")
        n = inst.sizes
        w = tuple(
            tuple(tuple(vec[inst.pi_index(i, t, tp)] for tp in range(n[i])) for t in range(n[i])) for i in range(inst.k)
        )
        return cls(vec[0], w)

    def clipped(self) -> Direction:
        clip = lambda v: max(Fraction(-1), min(Fraction(1), v))
        return Direction(clip(self.w_O), tuple(tuple(tuple(clip(v) for v in r) for r in mat) for mat in self.w))

    def to_json(self) -> list[str]:
        return [frac_str(v) for v in self.vector()]


# ---------------------------------------------------------------------------
# Empirical distribution


@dataclass(frozen=True)
class DPrime:
    """Uniform distribution over ``n`` sampled profiles, stored as exact weights."""

    support: tuple  # ((profile, weight), ...) sorted by profile
    n: int

    def marginal(self, i: int, t: int) -> Fraction:
        return sum((q for s, q in self.support if s[i] == t), Fraction(0))

    def to_json(self) -> dict:
        return {"n": self.n, "support": [[list(s), frac_str(q)] for s, q in self.support]}

    @classmethod
    def from_json(cls, doc: dict) -> DPrime:
        return cls(tuple((tuple(s), Fraction(q)) for s, q in doc["support"]), int(doc["n"]))


def default_samples(inst: BmedInstance, eps) -> int:
    return math.ceil(64 * inst.k * max(inst.sizes) / Fraction(eps) ** 2)


def _draw(rng: random.Random, probs: Sequence[Fraction]) -> int:
    den = math.lcm(*[q.denominator for q in probs])
    r = rng.randrange(den)
    acc = 0
    for t, q in enumerate(probs):
        acc += int(q * den)
        if r < acc:
            return t
    raise AssertionError("probabilities do not sum to one")


def sample_dprime(inst: BmedInstance, n: int, seed: int) -> DPrime:
    """``n`` i.i.d. profiles from the prior, as an exact empirical distribution."""
    if n < 1:
        raise StructuralError("need at least one sample")
    rng = random.Random(seed)
    counts: dict = {}
    for _ in range(n):
        s = tuple(_draw(rng, inst.probs[i]) for i in range(inst.k))
        counts[s] = counts.get(s, 0) + 1
    return DPrime(tuple((s, Fraction(c, n)) for s, c in sorted(counts.items())), n)


def prior_as_dprime(inst: BmedInstance) -> DPrime:
    """The prior itself in ``DPrime`` form (for exact small-support runs)."""
    return DPrime(tuple(inst.distribution()), 0)


# ---------------------------------------------------------------------------
# Virtual objective and the GOOP adapter


def _marginals(inst: BmedInstance, dist: DPrime) -> list[list[Fraction]]:
    return [[dist.marginal(i, t) for t in range(inst.sizes[i])] for i in range(inst.k)]


def virtual_costs(inst: BmedInstance, w: Direction, profile: Profile, marg) -> list[list[Fraction]]:
    """``c_ij = sum_t w_i(t, t'_i) / Pr[t'_i] * t[j]`` for reported profile ``t'``."""
    c = []
    for i, tp in enumerate(profile):
        pr = marg[i][tp]
        if pr <= 0:
            raise DomainError(f"type {tp} of bidder {i} has zero probability")
        row = [Fraction(0)] * inst.m
        for t in range(inst.sizes[i]):
            coef = w.w[i][t][tp] / pr
            if coef:
                for j in range(inst.m):
                    row[j] += coef * inst.types[i][t][j]
        c.append(row)
    return c


def virtual_objective(w: Direction, profile: Profile, a: Assignment, inst: BmedInstance, dist: DPrime) -> Fraction:
    marg = _marginals(inst, dist)
    c = virtual_costs(inst, w, profile, marg)
    extra = sum((c[i][j] for i in range(inst.k) for j in range(inst.m) if a.x[i][j]), Fraction(0))
    return w.w_O * inst.objective_value(profile, a) + extra


@dataclass(frozen=True)
class GoopHandle:
    """Which GOOP solver backs the mechanism, with its ``(alpha, beta)``."""

    variant: str  # "makespan" or "fairness-bd"

    def __post_init__(self) -> None:
        if self.variant not in ("makespan", "fairness-bd"):
            raise StructuralError(f"unsupported GOOP variant {self.variant!r}")

    def check(self, inst: BmedInstance) -> None:
        want = MAKESPAN if self.variant == "makespan" else FAIRNESS
        if inst.objective != want:
            raise StructuralError(f"{self.variant} solver does not match objective {inst.objective}")
        if self.variant == "fairness-bd" and inst.m < inst.k:
            raise DomainError("the dummy-machine solver needs m >= k")

    def alpha(self, inst: BmedInstance) -> Fraction:
        return Fraction(1)

    def beta(self, inst: BmedInstance) -> Fraction:
        return Fraction(1, 2) if self.variant == "makespan" else Fraction(inst.m - inst.k + 1)

    def allocate(self, inst: BmedInstance, w_O: Fraction, profile: Profile, c) -> Assignment:
        sched = SchedulingInstance.from_lists(inst.processing(profile), c)
        if self.variant == "makespan":
            if w_O > 0:
                return solve_makespan_with_costs(sched.with_costs([[v / w_O for v in row] for row in c]))
            return min_cost_only(sched)
        if w_O > 0:
            return bd_solve(sched.with_costs([[v / w_O for v in row] for row in c]))
        return greedy_v(sched)


@dataclass
class AdapterOutput:
    form: ImplicitForm
    rule: dict  # profile -> Assignment


def goop_adapter(w: Direction, inst: BmedInstance, dist: DPrime, handle: GoopHandle) -> AdapterOutput:
    """The ``(alpha, beta, {O})`` optimizer over implicit forms under ``dist``.

    For minimization ``w`` is minimized against; for maximization it is
    maximized against. The ``O`` coordinate is reported unscaled.
    """
    marg = _marginals(inst, dist)
    n = inst.sizes
    w_O = w.w_O
    if inst.sense == "max" and w_O < 0:
        w_eff = Fraction(0)
    else:
        w_eff = w_O
    rule = {}
    O = Fraction(0)
    pi = [[[Fraction(0)] * n[i] for _ in range(n[i])] for i in range(inst.k)]
    for s, q in dist.support:
        c = virtual_costs(inst, w, s, marg)
        a = handle.allocate(inst, w_eff, s, c)
        rule[s] = a
        O += q * inst.objective_value(s, a)
        for i, tp in enumerate(s):
            share = q / marg[i][tp]
            for t in range(n[i]):
                pi[i][t][tp] += share * inst.value(i, t, a)
    if w_O < 0:
        O = O_MAX / handle.beta(inst) if inst.sense == "min" else Fraction(0)
    p = tuple(tuple(Fraction(0) for _ in range(n[i])) for i in range(inst.k))
    return AdapterOutput(ImplicitForm(O, tuple(tuple(map(tuple, mat)) for mat in pi), p), rule)


# ---------------------------------------------------------------------------
# Truthfulness constraints


def truthfulness_oracle(inst: BmedInstance, vec: Sequence) -> Optional[Halfspace]:
    """First violated BIC or IR inequality as a halfspace, else ``None``."""
    vec = [Fraction(v) for v in vec]
    d = inst.dim
    for i in range(inst.k):
        for t in range(inst.sizes[i]):
            a, pa = inst.pi_index(i, t, t), inst.p_index(i, t)
            if vec[a] - vec[pa] < 0:
                w = [0] * d
                w[a], w[pa] = 1, -1
                return Halfspace(w, 0)
            for tp in range(inst.sizes[i]):
                if tp == t:
                    continue
                b, pb = inst.pi_index(i, t, tp), inst.p_index(i, tp)
                if vec[a] - vec[pa] - vec[b] + vec[pb] < 0:
                    w = [0] * d
                    w[a], w[pa], w[b], w[pb] = 1, -1, -1, 1
                    return Halfspace(w, 0)
    return None


# ---------------------------------------------------------------------------
# Mechanisms


@dataclass
class Mechanism:
    inst: BmedInstance
    handle: GoopHandle
    dist: DPrime
    directions: list  # Direction per support entry
    weights: list  # Fraction per support entry
    target: ImplicitForm  # solved implicit form; pricing reads pi_i(t,t) and p_i(t)
    seed: int = 0
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if len(self.directions) != len(self.weights) or not self.weights:
            raise StructuralError("mechanism needs one weight per direction")
        if any(v < 0 for v in self.weights) or sum(self.weights) != 1:
            raise StructuralError("mechanism weights must be a probability vector")
        self._marg = _marginals(self.inst, self.dist)

    def allocation(self, j: int, profile: Profile) -> Assignment:
        key = (j, profile)
        if key not in self._cache:
            w = self.directions[j]
            w_eff = Fraction(0) if (self.inst.sense == "max" and w.w_O < 0) else w.w_O
            c = virtual_costs(self.inst, w, profile, self._marg)
            self._cache[key] = self.handle.allocate(self.inst, w_eff, profile, c)
        return self._cache[key]

    def price(self, i: int, reported: int, a: Assignment) -> Fraction:
        """Ex-post IR price: reported value minus the target interim utility."""
        t = reported
        return self.inst.value(i, t, a) - (self.target.pi[i][t][t] - self.target.p[i][t])

    def pick(self, rng: random.Random) -> int:
        den = math.lcm(*[q.denominator for q in self.weights])
        r = rng.randrange(den)
        acc = 0
        for j, q in enumerate(self.weights):
            acc += int(q * den)
            if r < acc:
                return j
        raise AssertionError("weights do not sum to one")

    def to_json(self) -> dict:
        return {
            "instance": self.inst.to_json(),
            "goop": self.handle.variant,
            "dprime": self.dist.to_json(),
            "support": [{"direction": w.to_json(), "weight": frac_str(q)} for w, q in zip(self.directions, self.weights)],
            "target": self.target.to_json(),
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, doc: dict) -> Mechanism:
        inst = BmedInstance.from_json(doc["instance"])
        t = doc["target"]
        target = ImplicitForm(
            Fraction(t["O"]),
            tuple(tuple(tuple(Fraction(v) for v in row) for row in mat) for mat in t["pi"]),
            tuple(tuple(Fraction(v) for v in row) for row in t["p"]),
        )
        return cls(
            inst,
            GoopHandle(doc["goop"]),
            DPrime.from_json(doc["dprime"]),
            [Direction.from_vector(inst, e["direction"]) for e in doc["support"]],
            [Fraction(e["weight"]) for e in doc["support"]],
            target,
            int(doc.get("seed", 0)),
        )


def run_mechanism(mech: Mechanism, profile: Sequence[int], rng: random.Random) -> tuple[Assignment, list[Fraction]]:
    inst = mech.inst
    profile = tuple(profile)
    if len(profile) != inst.k or any(not 0 <= t < inst.sizes[i] for i, t in enumerate(profile)):
        raise DomainError(f"profile {profile} has an unknown type")
    a = mech.allocation(mech.pick(rng), profile)
    prices = [mech.price(i, t, a) for i, t in enumerate(profile)]
    return a, prices


@dataclass
class BmedResult:
    mechanism: Mechanism
    form: ImplicitForm  # solved point (O coordinate is the scaled one)
    rounds: int


def bmed_reduce(
    inst: BmedInstance,
    handle: GoopHandle,
    eps,
    seed: int,
    n_samples: Optional[int] = None,
    engine: str = "exact",
    cfg: Optional[EllipsoidConfig] = None,
    dist: Optional[DPrime] = None,
) -> BmedResult:
    """Solve the truthful implicit-form LP through the WSO and build the mechanism."""
    eps = Fraction(eps)
    if eps <= 0:
        raise StructuralError("eps must be positive")
    handle.check(inst)
    if dist is None:
        dist = sample_dprime(inst, n_samples or default_samples(inst, eps), seed)
    for i in range(inst.k):
        for t in range(inst.sizes[i]):
            if dist.marginal(i, t) == 0:
                raise DomainError(f"type {t} of bidder {i} never sampled; increase the sample count")
    alpha, beta = handle.alpha(inst), handle.beta(inst)

    def fn(wvec):
        return goop_adapter(Direction.from_vector(inst, wvec), inst, dist, handle).form.vector()[: inst.pi_dim]

    A = OptimizationAlgorithm(fn, inst.pi_dim, alpha, beta, S={0}, sense=inst.sense, bound=inst.m + O_MAX / beta + 1)
    cfg = cfg or EllipsoidConfig(engine="exact" if engine == "exact" else "ellipsoid")
    W = WsoHandle(A, cfg)
    Q = lambda x: truthfulness_oracle(inst, x)
    m = Fraction(inst.m)
    box = [(Fraction(0), O_MAX)] + [(Fraction(0), m)] * (inst.pi_dim - 1) + [(-m, m)] * (inst.dim - inst.pi_dim)
    free = list(range(inst.pi_dim, inst.dim))
    c = [Fraction(1)] + [Fraction(0)] * (inst.dim - 1)
    if engine == "exact":
        res = cutting_plane_optimize(c, Q, W, box, max_rounds=cfg.max_rounds, sense=inst.sense, free=free)
    elif engine == "ellipsoid":
        if inst.sense != "min":
            raise StructuralError("the ellipsoid engine drives minimization only")
        res = ellipsoid_optimize_with_wso(c, Q, W, cfg, (0, O_MAX), eps / 4, box, free=free)
    else:
        raise StructuralError(f"unknown engine {engine!r}")
    form = ImplicitForm.from_vector(inst, res.point)
    # Directions are recorded as fed to the underlying (min or max) algorithm.
    dirs = [Direction.from_vector(inst, w) for w in res.directions]
    mech = Mechanism(inst, handle, dist, dirs, list(res.weights), form, seed)
    return BmedResult(mech, form, res.probes)


# ---------------------------------------------------------------------------
# Verification


@dataclass
class VerifyReport:
    n_runs: int
    mean_objective: float
    objective_sigma: float
    max_regret: float
    regret_sigma: float
    regret: dict  # "(i,t,t')" -> float estimate
    exact_regret_prior: Optional[Fraction]
    exact_regret_dprime: Fraction
    ir_violations: int
    exact_objective: Optional[Fraction]

    def to_json(self) -> dict:
        # floats are written as the exact rational value of the double
        exact = lambda v: None if v is None else frac_str(Fraction(v))
        return {
            "n_runs": self.n_runs,
            "mean_objective": exact(self.mean_objective),
            "objective_sigma": exact(self.objective_sigma),
            "max_regret": exact(self.max_regret),
            "regret_sigma": exact(self.regret_sigma),
            "regret": {key: exact(v) for key, v in sorted(self.regret.items())},
            "exact_regret_prior": exact(self.exact_regret_prior),
            "exact_regret_dprime": exact(self.exact_regret_dprime),
            "ir_violations": self.ir_violations,
            "exact_objective": exact(self.exact_objective),
        }


def _utility(mech: Mechanism, j: int, i: int, true_t: int, profile: Profile) -> Fraction:
    a = mech.allocation(j, profile)
    return mech.inst.value(i, true_t, a) - mech.price(i, profile[i], a)


def exact_regret(mech: Mechanism, dist: Sequence[tuple[Profile, Fraction]]) -> Fraction:
    """Largest interim gain from misreporting, computed exactly over ``dist``."""
    inst = mech.inst
    worst = Fraction(0)
    for i in range(inst.k):
        for t in range(inst.sizes[i]):
            rows = [(s, q) for s, q in dist if s[i] == t]
            mass = sum((q for _, q in rows), Fraction(0))
            if mass == 0:
                continue
            util = {}
            for tp in range(inst.sizes[i]):
                tot = Fraction(0)
                for s, q in rows:
                    rep = s[:i] + (tp,) + s[i + 1 :]
                    for j, lam in enumerate(mech.weights):
                        if lam:
                            tot += q * lam * _utility(mech, j, i, t, rep)
                util[tp] = tot / mass
            worst = max(worst, max(util.values()) - util[t])
    return worst


def verify_mechanism(mech: Mechanism, inst: BmedInstance, n_runs: int, seed: int, exact_cap: int = 4096) -> VerifyReport:
    """Monte Carlo over the true prior: objective, BIC regret and ex-post IR."""
    if n_runs < 1:
        raise StructuralError("need at least one run")
    prior = inst.distribution()
    n_prof = len(prior)
    n_dir = len(mech.weights)
    # exact per-(direction, profile) tables, then vectorized sampling
    profs = [s for s, _ in prior]
    index = {s: q for q, s in enumerate(inst.profiles())}
    all_profiles = inst.profiles()
    obj = np.zeros((n_dir, len(all_profiles)))
    ir_bad = np.zeros((n_dir, len(all_profiles)), dtype=bool)
    for j in range(n_dir):
        for s in profs:
            a = mech.allocation(j, s)
            obj[j, index[s]] = float(inst.objective_value(s, a))
            ir_bad[j, index[s]] = any(_utility(mech, j, i, s[i], s) < 0 for i in range(inst.k))
    rng = np.random.default_rng(seed)
    p_prior = np.array([float(q) for _, q in prior])
    p_dir = np.array([float(q) for q in mech.weights])
    draw_s = rng.choice(n_prof, size=n_runs, p=p_prior / p_prior.sum())
    draw_j = rng.choice(n_dir, size=n_runs, p=p_dir / p_dir.sum())
    prof_idx = np.array([index[s] for s in profs])[draw_s]
    vals = obj[draw_j, prof_idx]
    ir_violations = int(ir_bad[draw_j, prof_idx].sum())

    regret: dict = {}
    worst, worst_sigma = 0.0, 0.0
    prof_arr = np.array(profs)
    for i in range(inst.k):
        for t in range(inst.sizes[i]):
            sel = prof_arr[draw_s][:, i] == t
            if not sel.any():
                continue
            js = draw_j[sel]
            ss = draw_s[sel]
            base = np.array([[float(_utility(mech, j, i, t, profs[q])) for q in range(n_prof)] for j in range(n_dir)])
            truthful = base[js, ss]
            for tp in range(inst.sizes[i]):
                if tp == t:
                    continue
                dev_tab = np.zeros((n_dir, n_prof))
                for j in range(n_dir):
                    for q, s in enumerate(profs):
                        if s[i] == t:
                            rep = s[:i] + (tp,) + s[i + 1 :]
                            dev_tab[j, q] = float(_utility(mech, j, i, t, rep))
                gain = dev_tab[js, ss] - truthful
                est = float(gain.mean())
                sig = float(gain.std(ddof=1) / math.sqrt(len(gain))) if len(gain) > 1 else 0.0
                regret[f"({i},{t},{tp})"] = est
                if est > worst:
                    worst, worst_sigma = est, sig
    exact_prior = exact_regret(mech, prior) if n_prof <= exact_cap else None
    exact_obj = None
    if n_prof <= exact_cap:
        exact_obj = sum(
            (q * lam * inst.objective_value(s, mech.allocation(j, s)) for s, q in prior for j, lam in enumerate(mech.weights)),
            Fraction(0),
        )
    return VerifyReport(
        n_runs=n_runs,
        mean_objective=float(vals.mean()),
        objective_sigma=float(vals.std(ddof=1) / math.sqrt(n_runs)) if n_runs > 1 else 0.0,
        max_regret=worst,
        regret_sigma=worst_sigma,
        regret=regret,
        exact_regret_prior=exact_prior,
        exact_regret_dprime=exact_regret(mech, list(mech.dist.support)),
        ir_violations=ir_violations,
        exact_objective=exact_obj,
    )
