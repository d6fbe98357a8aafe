"""Command-line front end.

Every command is a pure function of its input file, flags and seed; all
artifacts are JSON with rationals written as ``num/den`` strings.

Exit codes: 0 success, 1 usage or invalid input, 2 capacity, 3 nonconvergence.
"""

from __future__ import annotations

import argparse
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional

from . import BUILD_ID
from .bmed import (
    BmedInstance,
    GoopHandle,
    Mechanism,
    bmed_reduce,
    default_samples,
    verify_mechanism,
)
from .core import Assignment, SchedulingInstance, cost, dump_json, fairness, frac_str, load_json, makespan
from .errors import BimechError, CapacityError, InfeasibleError, NonConvergenceError, PrecisionError
from .geometry import EllipsoidConfig, default_precision
from .goop_fairness import as_solve, bd_solve_detailed
from .goop_makespan import makespan_pipeline
from .oracle import BMED_CAP, FAIRNESS, GOOP_CAP, MAKESPAN, brute_bmed, brute_goop

EXIT_OK, EXIT_USAGE, EXIT_CAPACITY, EXIT_NONCONVERGENCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    input: Optional[str] = None
    output: Optional[str] = None
    seed: Optional[int] = None
    eps: Optional[Fraction] = None
    n_samples: Optional[int] = None
    precision: int = field(default_factory=default_precision)
    caps: dict = field(default_factory=lambda: {"goop": GOOP_CAP, "bmed": BMED_CAP})
    threads: int = 1
    options: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        doc = asdict(self)
        doc["eps"] = None if self.eps is None else frac_str(self.eps)
        return doc


def _report(cfg: RunConfig, result: dict) -> dict:
    return {"build": BUILD_ID, "config": cfg.to_json(), "result": result}


def _emit(doc: dict, path: Optional[str]) -> None:
    text = dump_json(doc, path)
    if path is None:
        sys.stdout.write(text)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


# ---------------------------------------------------------------------------
# gen


def _rand(rng: random.Random, lo: int, hi: int, den: int) -> Fraction:
    return Fraction(rng.randint(lo * den, hi * den), den)


def _composition(rng: random.Random, n: int, den: int) -> list[Fraction]:
    """``n`` positive probabilities with denominator ``den``."""
    if n > den:
        raise UsageError("denominator bound must be at least the number of types")
    cuts = sorted(rng.sample(range(1, den), n - 1)) if n > 1 else []
    edges = [0, *cuts, den]
    return [Fraction(b - a, den) for a, b in zip(edges, edges[1:])]


def gen_scheduling(k: int, m: int, seed: int, den: int, costs: bool) -> SchedulingInstance:
    rng = random.Random(seed)
    p = [[_rand(rng, 0, 1, den) for _ in range(m)] for _ in range(k)]
    c = [[_rand(rng, -1, 1, den) for _ in range(m)] for _ in range(k)] if costs else None
    return SchedulingInstance.from_lists(p, c)


def gen_bmed(k: int, m: int, n_types: int, seed: int, den: int, objective: str) -> BmedInstance:
    rng = random.Random(seed)
    types, probs = [], []
    for _ in range(k):
        types.append([[_rand(rng, 0, 1, den) for _ in range(m)] for _ in range(n_types)])
        probs.append(_composition(rng, n_types, den))
    return BmedInstance(k, m, types, probs, objective)


def cmd_gen(args, cfg: RunConfig) -> dict:
    if args.kind == "scheduling":
        inst = gen_scheduling(args.k, args.m, args.seed, args.den, not args.no_costs)
    else:
        inst = gen_bmed(args.k, args.m, args.types, args.seed, args.den, args.objective)
    return inst.to_json()


# ---------------------------------------------------------------------------
# solve


def solve_scheduling(inst: SchedulingInstance, variant: str, seed: int) -> dict:
    if variant == "makespan":
        res = makespan_pipeline(inst)
        a = res.assignment
        return {
            "variant": variant,
            "branch": "lp-rounding",
            "jobs": a.jobs(),
            "M": frac_str(makespan(inst, a)),
            "C": frac_str(cost(inst, a)),
            "certificate": res.fractional.to_json(),
        }
    if variant == "fairness-bd":
        res = bd_solve_detailed(inst)
    else:
        res = as_solve(inst, random.Random(seed))
    return {"variant": variant, **res.to_json()}


def check_scheduling(inst: SchedulingInstance, variant: str, result: dict) -> dict:
    """Compare a solver result with the exhaustive optimum of ``O + C``."""
    tag = MAKESPAN if variant == "makespan" else FAIRNESS
    opt = brute_goop(inst, tag).value
    a = Assignment.from_jobs(inst.k, result["jobs"])
    if variant == "makespan":
        got = makespan(inst, a) / 2 + cost(inst, a)
        rule, passed = "M/2 + C <= OPT", got <= opt
    elif variant == "fairness-bd":
        got = (inst.m - inst.k + 1) * fairness(inst, a) + cost(inst, a) if inst.m >= inst.k else fairness(inst, a) + cost(inst, a)
        rule, passed = "(m-k+1)F + C >= OPT", got >= opt
    else:
        got = fairness(inst, a) + cost(inst, a)
        rule, passed = "F + C reported against OPT (no finite factor checked)", None
    return {"optimum": frac_str(opt), "achieved": frac_str(got), "rule": rule, "passed": passed}


def cmd_solve(args, cfg: RunConfig) -> dict:
    inst = SchedulingInstance.from_json(load_json(args.instance))
    out = solve_scheduling(inst, args.variant, args.seed)
    if args.verify:
        out["verify"] = check_scheduling(inst, args.variant, out)
    return out


# ---------------------------------------------------------------------------
# mechanism / verify / brute


def _ellipsoid_config(args, cfg: RunConfig) -> EllipsoidConfig:
    return EllipsoidConfig(
        engine="exact" if args.engine == "exact" else "ellipsoid",
        precision=cfg.precision,
        max_rounds=args.max_rounds,
        log_path=args.log,
    )


def cmd_mechanism(args, cfg: RunConfig) -> dict:
    inst = BmedInstance.from_json(load_json(args.instance))
    n = args.samples or default_samples(inst, args.eps)
    cfg.n_samples = n
    res = bmed_reduce(
        inst, GoopHandle(args.goop), args.eps, args.seed, n_samples=n, engine=args.engine, cfg=_ellipsoid_config(args, cfg)
    )
    return {"mechanism": res.mechanism.to_json(), "form": res.form.to_json(), "rounds": res.rounds}


def _bound(mech: Mechanism, opt: Fraction, eps: Fraction) -> dict:
    inst = mech.inst
    ratio = mech.handle.alpha(inst) / mech.handle.beta(inst)
    if inst.sense == "min":
        return {"rule": "E[O] <= (alpha/beta) OPT + eps", "bound": frac_str(ratio * opt + eps)}
    return {"rule": "E[O] >= OPT / (beta/alpha) - eps", "bound": frac_str(opt * ratio - eps)}


def cmd_verify(args, cfg: RunConfig) -> dict:
    doc = load_json(args.mechanism)
    body = doc.get("result", doc)
    mech = Mechanism.from_json(body["mechanism"] if "mechanism" in body else body)
    inst = mech.inst
    eps = args.eps
    if eps is None and doc.get("config", {}).get("eps") is not None:
        eps = Fraction(doc["config"]["eps"])
    cfg.eps = eps
    rep = verify_mechanism(mech, inst, args.runs, args.seed)
    out = {"report": rep.to_json()}
    try:
        opt = brute_bmed(inst)
    except CapacityError:
        out["brute"] = None
        return out
    cmp = {"optimum": frac_str(opt)}
    if eps is not None:
        cmp.update(_bound(mech, opt, eps))
        b = Fraction(cmp["bound"])
        if rep.exact_objective is not None:
            cmp["exact_within_bound"] = rep.exact_objective <= b if inst.sense == "min" else rep.exact_objective >= b
    out["brute"] = cmp
    return out


def cmd_brute(args, cfg: RunConfig) -> dict:
    doc = load_json(args.instance)
    if args.kind == "goop":
        inst = SchedulingInstance.from_json(doc)
        r = brute_goop(inst, args.tag)
        return {"tag": args.tag, "value": frac_str(r.value), "jobs": r.assignment.jobs()}
    inst = BmedInstance.from_json(doc)
    return {"objective": inst.objective, "value": frac_str(brute_bmed(inst))}


# ---------------------------------------------------------------------------
# bench


def _bench_one(seed: int, k_max: int, m_max: int, den: int) -> dict:
    rng = random.Random(seed)
    k, m = rng.randint(1, k_max), rng.randint(1, m_max)
    inst = gen_scheduling(k, m, seed, den, True)
    row = {"seed": seed, "k": k, "m": m}
    for variant in ("makespan", "fairness-bd"):
        res = solve_scheduling(inst, variant, seed)
        row[variant] = check_scheduling(inst, variant, res)["passed"]
    return row


def cmd_bench(args, cfg: RunConfig) -> dict:
    seeds = [args.seed + q for q in range(args.count)]
    run = lambda s: _bench_one(s, args.k, args.m, args.den)
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            rows = list(pool.map(run, seeds))
    else:
        rows = [run(s) for s in seeds]
    summary = {v: sum(1 for r in rows if r[v]) for v in ("makespan", "fairness-bd")}
    lines = [f"{'solver':<14}{'instances':>10}{'certified':>11}"]
    for v, ok in summary.items():
        lines.append(f"{v:<14}{len(rows):>10}{ok:>11}")
    sys.stderr.write("\n".join(lines) + "\n")
    return {"instances": len(rows), "certified": summary, "rows": rows}


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--threads", type=_positive, default=1, help="worker threads (default 1)")
    common.add_argument("--precision", type=int, default=None, help="ellipsoid precision bits (overrides BIMECH_PRECISION)")
    common.add_argument("-o", "--output", default=None, help="write JSON here instead of stdout")
    ap = _Parser(prog="bimech", description="Truthful scheduling mechanisms from bi-criterion solvers.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a seeded instance", parents=[common])
    g.add_argument("kind", choices=["scheduling", "bmed"])
    g.add_argument("--k", type=_positive, required=True, help="machines / bidders")
    g.add_argument("--m", type=_positive, required=True, help="jobs")
    g.add_argument("--types", type=_positive, default=2, help="types per bidder (bmed)")
    g.add_argument("--objective", choices=[MAKESPAN, FAIRNESS], default=MAKESPAN)
    g.add_argument("--den", type=_positive, default=12, help="denominator bound for every rational")
    g.add_argument("--no-costs", action="store_true", help="zero cost matrix (scheduling)")
    g.add_argument("--seed", type=int, required=True)

    s = sub.add_parser("solve", help="run a GOOP solver on a scheduling instance", parents=[common])
    s.add_argument("variant", choices=["makespan", "fairness-as", "fairness-bd"])
    s.add_argument("instance")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--verify", action="store_true", help="check against the exhaustive optimum")

    mc = sub.add_parser("mechanism", help="build a truthful mechanism for a mechanism-design instance", parents=[common])
    mc.add_argument("instance")
    mc.add_argument("--goop", choices=["makespan", "fairness-bd"], required=True)
    mc.add_argument("--eps", type=_fraction, required=True)
    mc.add_argument("--seed", type=int, required=True)
    mc.add_argument("--samples", type=_positive, default=None, help="size of the sampled type distribution")
    mc.add_argument("--engine", choices=["exact", "ellipsoid"], default="exact")
    mc.add_argument("--max-rounds", type=_positive, default=10000)
    mc.add_argument("--log", default=None, help="query log path (diagnostics on nonconvergence)")

    v = sub.add_parser("verify", help="Monte Carlo verification of a mechanism file", parents=[common])
    v.add_argument("mechanism")
    v.add_argument("--runs", type=_positive, required=True)
    v.add_argument("--seed", type=int, required=True)
    v.add_argument("--eps", type=_fraction, default=None, help="slack for the bound (default: from the file)")

    b = sub.add_parser("brute", help="exact optimum by enumeration", parents=[common])
    b.add_argument("kind", choices=["goop", "bmed"])
    b.add_argument("instance")
    b.add_argument("--tag", choices=[MAKESPAN, FAIRNESS], default=MAKESPAN)

    bn = sub.add_parser("bench", help="certify solvers on seeded instances (table on stderr)", parents=[common])
    bn.add_argument("--count", type=_positive, default=20)
    bn.add_argument("--k", type=_positive, default=3)
    bn.add_argument("--m", type=_positive, default=6)
    bn.add_argument("--den", type=_positive, default=12)
    bn.add_argument("--seed", type=int, required=True)
    return ap


COMMANDS = {
    "gen": cmd_gen,
    "solve": cmd_solve,
    "mechanism": cmd_mechanism,
    "verify": cmd_verify,
    "brute": cmd_brute,
    "bench": cmd_bench,
}


def _config(args) -> RunConfig:
    cfg = RunConfig(command=args.command, output=args.output, threads=args.threads)
    if args.precision is not None:
        cfg.precision = args.precision
    cfg.input = getattr(args, "instance", None) or getattr(args, "mechanism", None)
    cfg.seed = getattr(args, "seed", None)
    cfg.eps = getattr(args, "eps", None)
    skip = {"command", "output", "threads", "precision", "instance", "mechanism", "seed", "eps"}
    cfg.options = {key: (frac_str(v) if isinstance(v, Fraction) else v) for key, v in sorted(vars(args).items()) if key not in skip}
    return cfg


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        cfg = _config(args)
        result = COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        sys.stderr.write(f"bimech: {exc}\n")
        return EXIT_USAGE
    except CapacityError as exc:
        sys.stderr.write(f"bimech: capacity: {exc}\n")
        return EXIT_CAPACITY
    except NonConvergenceError as exc:
        where = f" (query log: {exc.log_path})" if exc.log_path else ""
        sys.stderr.write(f"bimech: did not converge: {exc}{where}\n")
        return EXIT_NONCONVERGENCE
    except (InfeasibleError, PrecisionError) as exc:
        sys.stderr.write(f"bimech: did not converge: {exc}\n")
        return EXIT_NONCONVERGENCE
    except (BimechError, ValueError, OSError) as exc:
        sys.stderr.write(f"bimech: {exc}\n")
        return EXIT_USAGE
    doc = result if args.command == "gen" else _report(cfg, result)
    _emit(doc, args.output)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
