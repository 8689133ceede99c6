"""Command line entry point: ``starcount <subcommand> [--config f.json] [--seed N] [--workers K] [--out prefix]``.

Exit codes: 0 success, 1 domain or config error, 2 capability or budget error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from .errors import CapabilityError, DomainError

# Values used when neither the command line nor the config file sets an option.
DEFAULTS = {
    "seed": 0, "workers": 1, "out": None,
    "L": None, "alpha": None, "epsilon": None, "R": 1.0, "T": None, "method": "brute",
    "kind": "S", "phi_family": "const", "c": 1.0, "p": 0.0, "qmax": 1000,
    "body": "h2", "m": 1, "n": 1, "basis": None, "support_csv": None,
    "s": None, "eta": 0.5, "family": "const", "samples": 1000, "mode": None, "grid": None,
}


def _json_arg(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"could not parse {text!r} as JSON: {exc}") from None


def _floats(text):
    return [float(v) for v in str(text).split(",")] if not isinstance(text, list) else [float(v) for v in text]


def _ints(text):
    return [int(v) for v in str(text).split(",")] if not isinstance(text, list) else [int(v) for v in text]


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise DomainError(f"missing --{name.replace('_', '-')}")


def _emit(args, payload: dict):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        with open(args.out + ".json", "w", newline="\n") as fh:
            fh.write(text + "\n")
    print(text)


def _record(query, value, boundary_sensitive, start):
    return {"query": query, "value": value, "boundary_sensitive": boundary_sensitive,
            "elapsed_ms": (time.perf_counter() - start) * 1e3}


# ------------------------------------------------------------ subcommands


def cmd_count(args):
    from .counting import CountQuery, count_M
    _need(args, "L", "epsilon", "T")
    start = time.perf_counter()
    q = CountQuery(args.L, float(args.epsilon), float(args.R), _floats(args.T))
    res = count_M(q, args.method, workers=args.workers)
    query = {"L": args.L, "epsilon": q.epsilon, "R": q.R, "T": list(q.T), "method": res.method}
    _emit(args, _record(query, res.value, res.boundary_sensitive, start))


def cmd_sum(args):
    from .counting import sum_S, sum_S_star, sum_Sigma
    _need(args, "T")
    start = time.perf_counter()
    T = _floats(args.T)
    if args.kind == "Sigma":
        _need(args, "L")
        value = sum_Sigma(args.L, T, workers=args.workers)
        query = {"kind": "Sigma", "L": args.L, "T": T}
    elif args.kind in ("S", "S_star"):
        _need(args, "alpha")
        fn = sum_S if args.kind == "S" else sum_S_star
        alpha = _floats(args.alpha)
        value = fn(alpha, T, workers=args.workers)
        query = {"kind": args.kind, "alpha": alpha, "T": T}
    else:
        raise DomainError(f"unknown sum kind {args.kind!r}")
    _emit(args, _record(query, value, False, start))


def cmd_certify(args):
    from .certify import PhiSpec, certify_phi
    _need(args, "L")
    phi = PhiSpec(args.phi_family, float(args.c), float(args.p))
    rep = certify_phi(args.L, phi, int(args.qmax), workers=args.workers)
    _emit(args, {"holds": rep.holds, "worst_q": list(rep.worst_q), "worst_ratio": rep.worst_ratio,
                 "qmax": rep.qmax, "scope": rep.scope})


def tile_table(family) -> str:
    lines = []
    for index in family.indices:
        mp = family.map_of(index)
        k = len(mp.exponents)
        if not lines:
            lines.append(",".join(["index"] + [f"exp{i}" for i in range(k)] + ["signs"]))
        label = json.dumps(index if not isinstance(index, tuple) else [list(v) if isinstance(v, tuple) else v
                                                                         for v in index])
        label = '"' + label.replace('"', '""') + '"'
        exps = [format(float(e), ".17g") for e in mp.exponents]
        signs = "".join("+" if s > 0 else "-" for s in mp.signs)
        lines.append(",".join([label] + exps + [signs]))
    return "\n".join(lines) + "\n"


def cmd_tess(args):
    from .tessellation import SlabDomainH2, StarBodyH1, partition_h1, tessellate_h2
    _need(args, "epsilon")
    if args.body == "h1":
        family = partition_h1(StarBodyH1(int(args.m), float(args.epsilon), float(args.R)))
    elif args.body == "h2":
        _need(args, "T")
        T = _floats(args.T)
        family = tessellate_h2(SlabDomainH2(len(T), float(args.epsilon), float(args.R), T))
    else:
        raise DomainError(f"unknown body {args.body!r}")
    text = tile_table(family)
    if args.out:
        with open(args.out + ".csv", "w", newline="\n") as fh:
            fh.write(text)
    sys.stdout.write(text)


def cmd_minima(args):
    from .lattice import LatticeBasis, as_matrix, exact_successive_minima
    _need(args, "basis")
    prof = exact_successive_minima(LatticeBasis(as_matrix(args.basis), {"source": "cli"}))
    _emit(args, {"minima": [float(v) for v in prof.minima],
                 "realizers": [[float(x) for x in v] for v in prof.realizers.T],
                 "minkowski_ratio": prof.minkowski_ratio()})


def cmd_weights(args):
    from .weights import build_schedule, parse_support_csv, verify_identities
    _need(args, "support_csv")
    with open(args.support_csv) as fh:
        t = parse_support_csv(fh.read(), int(args.m))
    sched = build_schedule(t)
    check = verify_identities(t, sched)
    f = lambda x: str(Fraction(x))
    _emit(args, {"k": [f(v) for v in sched.k], "alpha": [f(v) for v in sched.alpha],
                 "alpha_sj": [[f(v) for v in row] for row in sched.alpha_j],
                 "identities_hold": check.ok})


def cmd_schmidt(args):
    from .schmidt import FAMILIES, exceptional_set_estimate, moment_sum_check
    _need(args, "s")
    if args.family not in FAMILIES:
        raise DomainError(f"unknown family {args.family!r}; choose from {sorted(FAMILIES)}")
    s = _ints(args.s)
    fam = FAMILIES[args.family](len(s))
    mr = moment_sum_check(fam, s, int(args.samples), int(args.seed))
    ex = exceptional_set_estimate(fam, s, float(args.eta), int(args.samples), int(args.seed))
    _emit(args, {"family": args.family, "s": s, "mean": mr.lhs, "stderr": mr.stderr, "bound": mr.bound,
                 "ratio": mr.ratio, "exceptional_measure": ex.measure, "exceptional_allowed": ex.allowed,
                 "exceptional_within": ex.within, "pointwise_ok": ex.pointwise_ok, "cover_ok": ex.cover_ok})


def cmd_experiment(args):
    from .experiments import ExperimentConfig, emit_report, run_experiment
    _need(args, "mode")
    cfg = ExperimentConfig(args.mode, int(args.seed), args.grid or {}, int(args.workers),
                           args.out or f"results/{args.mode}")
    rep = run_experiment(cfg)
    paths = [emit_report(rep, fmt) for fmt in ("csv", "json", "gnuplot")]
    print(json.dumps({"summary": rep.summary, "files": paths}, indent=2, sort_keys=True))


COMMANDS = {
    "count": cmd_count, "sum": cmd_sum, "certify": cmd_certify, "tess": cmd_tess, "minima": cmd_minima,
    "weights": cmd_weights, "schmidt": cmd_schmidt, "experiment": cmd_experiment,
}


def _common(default):
    # Subcommands use SUPPRESS so they do not overwrite flags given before the subcommand.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=default, help="JSON file whose keys fill in unset options")
    common.add_argument("--seed", type=int, default=default)
    common.add_argument("--workers", type=int, default=default)
    common.add_argument("--out", default=default, help="output path prefix")
    return common


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="starcount", parents=[_common(None)])
    common = _common(argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("count", parents=[common], help="count points of M(L, eps, R, T)")
    c.add_argument("--L", type=_json_arg, help="matrix as JSON, e.g. [[1.618]]")
    c.add_argument("--epsilon", type=float)
    c.add_argument("--R", type=float)
    c.add_argument("--T", help="comma separated box sides")
    c.add_argument("--method", choices=["brute", "tile"])

    s = sub.add_parser("sum", parents=[common], help="reciprocal sums S, S_star, Sigma")
    s.add_argument("--kind", choices=["S", "S_star", "Sigma"])
    s.add_argument("--alpha", help="comma separated vector")
    s.add_argument("--L", type=_json_arg)
    s.add_argument("--T")

    ce = sub.add_parser("certify", parents=[common], help="finite-range bad approximability certificate")
    ce.add_argument("--L", type=_json_arg)
    ce.add_argument("--phi-family", dest="phi_family", choices=["const", "log"])
    ce.add_argument("--c", type=float)
    ce.add_argument("--p", type=float)
    ce.add_argument("--qmax", type=int)

    t = sub.add_parser("tess", parents=[common], help="dump a tile table as CSV")
    t.add_argument("--body", choices=["h1", "h2"])
    t.add_argument("--m", type=int)
    t.add_argument("--epsilon", type=float)
    t.add_argument("--R", type=float)
    t.add_argument("--T")

    mi = sub.add_parser("minima", parents=[common], help="exact successive minima of a lattice basis")
    mi.add_argument("--basis", type=_json_arg, help="square matrix as JSON; columns are the basis vectors")

    w = sub.add_parser("weights", parents=[common], help="weight schedule for a support matrix")
    w.add_argument("support_csv", nargs="?", help="CSV file of 0/1 rows")
    w.add_argument("--m", type=int)

    sc = sub.add_parser("schmidt", parents=[common], help="moment and exceptional-set checks")
    sc.add_argument("--s", help="comma separated dyadic levels")
    sc.add_argument("--eta", type=float)
    sc.add_argument("--family")
    sc.add_argument("--samples", type=int)

    e = sub.add_parser("experiment", parents=[common], help="run a seeded experiment grid")
    e.add_argument("--mode")
    return p


def resolve(args) -> argparse.Namespace:
    """Fill unset options from the config file, then from DEFAULTS."""
    cfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DomainError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise DomainError("config must be a JSON object")
    for key, default in DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, cfg.get(key, default))
    return args


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        resolve(args)
        COMMANDS[args.command](args)
    except CapabilityError as exc:
        print(f"capability error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
