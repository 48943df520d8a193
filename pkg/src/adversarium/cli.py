"""Command-line front end: ``adversarium <group> <command> [options]``.

Every command prints one report (JSON by default, CSV with ``--format
csv``) that records the tolerance, the seed and the package version.
Exit codes: 2 for unreadable input, 3 for infeasible objects, 4 when a
size budget is exceeded.
"""

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .errors import BudgetError, InfeasibleError, ParseError

EXIT_PARSE, EXIT_INFEASIBLE, EXIT_BUDGET = 2, 3, 4


def worker_count():
    """Worker cap from ``ADVERSARIUM_THREADS`` (default: CPU count)."""
    raw = os.environ.get("ADVERSARIUM_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ParseError(f"ADVERSARIUM_THREADS must be an integer, got {raw!r}") from None


def fan_out(fn, items):
    """Map ``fn`` over ``items`` on up to ``worker_count()`` threads, keeping input order."""
    items = list(items)
    workers = min(worker_count(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _read(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _bits(text, n=None, q=2):
    try:
        z = tuple(int(c, 36) for c in text.strip())
    except ValueError:
        raise ParseError(f"bad input string {text!r}") from None
    if n is not None and len(z) != n:
        raise ParseError(f"input {text!r} has length {len(z)}, expected {n}")
    if any(s >= q for s in z):
        raise ParseError(f"input {text!r} outside the alphabet of size {q}")
    return z


def _function(args):
    from .functions import make_named
    if not getattr(args, "function", None):
        raise ParseError("--function is required")
    params = {k: getattr(args, k) for k in ("n", "k", "q", "d") if getattr(args, k, None) is not None}
    if args.function in ("or", "and", "parity"):
        params = {k: v for k, v in params.items() if k == "n"}
    if args.function == "ambainis":
        params = {}
    try:
        return make_named(args.function, **params)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def _to_list(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, (list, tuple)):
        return [_to_list(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _to_list(v) for k, v in x.items()}
    return x


def render(report, fmt):
    """JSON (sorted keys) or CSV ``i,j,value``: the ``matrix`` entry row-major, otherwise fields."""
    report = _to_list(report)
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["i", "j", "value"])
    if "matrix" in report:
        for i, row in enumerate(report["matrix"]):
            for j, v in enumerate(row):
                w.writerow([i, j, repr(float(v))])
        return buf.getvalue()
    for key in sorted(report):
        val = report[key]
        if isinstance(val, list):
            for j, v in enumerate(val):
                w.writerow([key, j, v if not isinstance(v, float) else repr(v)])
        elif isinstance(val, dict):
            for j in sorted(val):
                w.writerow([key, j, val[j]])
        else:
            w.writerow([key, 0, repr(val) if isinstance(val, float) else val])
    return buf.getvalue()


# ------------------------------------------------------------ commands

def cmd_adv_ratio(args):
    from .adversary import AdversaryMatrix, adv_report, ambainis_gamma, hamming_one, relation_adversary
    if args.matrix:
        g = AdversaryMatrix.from_json(_read(args.matrix))
    elif args.function == "ambainis" or args.construction == "ambainis":
        try:
            a, b, c, d = (float(v) for v in (args.weights or "0.75,0.5,0,0").split(","))
        except ValueError:
            raise ParseError("--weights needs four comma-separated numbers") from None
        g = ambainis_gamma(a, b, c, d)
    else:
        f = _function(args)
        if args.function != "threshold":
            raise ParseError("the relation construction needs --function threshold")
        X = [x for x in f.positives if sum(x) == args.k]
        Y = [y for y in f.negatives if sum(y) == args.k - 1]
        g = relation_adversary(f, X, Y, hamming_one)
    try:
        rep = adv_report(g)
    except ValueError as exc:
        raise InfeasibleError(str(exc)) from exc
    return {"quantity": "adversary ratio", "norm": rep.norm, "masked_norms": list(rep.masked_norms),
            "ratio": rep.ratio if not rep.infinite else "inf"}


def cmd_dual_threshold(args):
    from .dual_adversary import threshold_dual
    s = threshold_dual(args.k, args.n)
    ok, worst = s.check_feasible(args.tol)
    return {"quantity": "threshold dual solution", "objective": s.objective(), "feasible": ok,
            "worst_residual": worst, "solution": s.to_dict()}


def cmd_dual_check(args):
    from .dual_adversary import DualAdversarySolution
    f = _function(args)
    s = DualAdversarySolution.from_json(_read(args.solution), f)
    ok, worst = s.check_feasible(args.tol)
    if not ok:
        raise InfeasibleError(f"solution violates the constraints (worst residual {worst:.3g})")
    return {"quantity": "dual adversary feasibility", "objective": s.objective(), "feasible": ok,
            "worst_residual": worst}


def _program(args):
    from .span_programs import SpanProgram
    return SpanProgram.from_json(_read(args.program))


def _program_function(p):
    import itertools
    from .functions import PartialFunction
    if p.q ** p.n > 4096:
        raise BudgetError(f"{p.q ** p.n} inputs exceed the enumeration budget")
    dom = tuple(itertools.product(range(p.q), repeat=p.n))
    return PartialFunction(p.n, p.q, dom, tuple(int(p.evaluate(z)) for z in dom))


def cmd_span_build(args):
    from .span_programs import maj3_program, or_program, st_connectivity_program
    if args.family == "or":
        p = or_program(args.n)
    elif args.family == "maj3":
        p = maj3_program()
    else:
        p = st_connectivity_program(args.n, 0, args.n - 1)
    return {"quantity": "span program", "program": p.to_dict()}


def cmd_span_eval(args):
    p = _program(args)
    z = _bits(args.input, p.n, p.q)
    return {"quantity": "span program evaluation", "input": list(z), "accepts": bool(p.evaluate(z))}


def cmd_span_wsize(args):
    p = _program(args)
    f = _function(args) if args.function else _program_function(p)
    w0, w1, w = p.witness_size(f, stored=not args.minimal)
    return {"quantity": "witness size", "W0": w0, "W1": w1, "wsize": w}


def cmd_span_simulate(args):
    from .quantum_sim import run_span_program
    p = _program(args)
    z = _bits(args.input, p.n, p.q)
    f = _program_function(p)
    w0, w1, _ = p.witness_size(f, stored=False)
    seeds = np.random.SeedSequence(args.seed).spawn(args.runs)
    runs = fan_out(lambda s: run_span_program(p, z, (w0, w1), rng=np.random.default_rng(s)), seeds)
    acc = sum(r.bit for r in runs)
    return {"quantity": "span program walk", "input": list(z), "runs": args.runs, "accepted": acc,
            "expected": int(p.evaluate(z)), "queries_per_run": runs[0].queries,
            "p_accept": runs[0].p_accept}


def _lg(args):
    from . import learning_graphs as L
    c = args.construction
    if c == "trivial":
        return L.trivial_lg(args.n)
    if c == "or":
        return L.or_lg(args.n)
    if c == "ksubset":
        return L.ksubset_lg(args.n, args.k, args.r)
    if c == "collision":
        return L.collision_lg(args.n, args.r)
    if c == "triangle":
        return L.triangle_lg(args.n, args.r, args.r2 or args.r, args.ell or 1)
    raise ParseError(f"unknown construction {c!r}")


def cmd_lg_complexity(args):
    from . import learning_graphs as L
    g, flow = _lg(args)
    if flow.cert is None:
        if args.construction != "collision" or args.n % 2 == 0:
            raise BudgetError("structure too large to enumerate")
        # odd collision sizes: every member avoiding [r] costs the same
        m = tuple((i, args.n - 1 - i) for i in range(args.n // 2))
        cn, cp, tot = L.complexities(g, flow, keys=[m])
    else:
        cn, cp, tot = L.complexities(g, flow)
    if args.balance:
        g = L.balanced(g, flow, keys=None if flow.cert else [m])
        cn, cp, tot = L.complexities(g, flow, keys=None if flow.cert else [m])
    return {"quantity": "learning graph complexity", "C_N": cn, "C_P": cp, "total": tot,
            "arcs": len(g.arcs), "vertices": len(g.vertices)}


def cmd_lg_dual_check(args):
    from . import learning_graphs as L
    from .functions import CertificateStructure
    if args.cert == "ksubset":
        cert = CertificateStructure.k_subset(args.n, args.k)
        builtin = lambda: L.ksubset_certificate(args.n, args.k)  # noqa: E731
    elif args.cert == "hidden-shift":
        cert = CertificateStructure.hidden_shift(args.n)
        builtin = lambda: L.hidden_shift_certificate(args.n)  # noqa: E731
    else:
        raise ParseError(f"unknown structure {args.cert!r}")
    if args.alpha == "builtin":
        a = builtin()
    else:
        try:
            a = L.DualLGCertificate.from_triples(cert, json.loads(_read(args.alpha)))
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc}") from exc
    obj, worst = L.check_dual_certificate(cert, a)
    return {"quantity": "dual learning graph certificate", "objective": obj, "constraint_max": worst,
            "normalized_objective": obj / np.sqrt(worst) if worst > 0 else obj}


def cmd_lg_simulate(args):
    from .electric_walks import lg_as_walk, lg_resistance_bound
    g, _ = _lg(args)
    f = _function(args)
    R = lg_resistance_bound(g, f)
    z = _bits(args.input, f.n, f.q)
    seeds = np.random.SeedSequence(args.seed).spawn(args.runs)
    runs = fan_out(lambda s: lg_as_walk(g, f, z, R=R, rng=np.random.default_rng(s)), seeds)
    return {"quantity": "learning graph walk", "input": list(z), "expected": int(f(z)),
            "runs": args.runs, "accepted": sum(r.bit for r in runs), "queries_per_run": runs[0].queries,
            "R": R, "W": float(np.sum(g.weights))}


def _graph(args):
    from .electric_walks import read_edge_list
    return read_edge_list(_read(args.graph))


def _vertex(g, label):
    try:
        return g.index(label)
    except KeyError as exc:
        raise ParseError(str(exc)) from exc


def _sigma_marked(g, args):
    from .electric_walks import read_sidecar
    if args.sidecar:
        return read_sidecar(g, _read(args.sidecar))
    if args.s is None or args.t is None:
        raise ParseError("give --sidecar or both --s and --t")
    return _vertex(g, args.s), {_vertex(g, args.t)}


def cmd_walk_resistance(args):
    from .electric_walks import effective_resistance
    g = _graph(args)
    sigma, marked = _sigma_marked(g, args)
    r, flow = effective_resistance(g, sigma, marked)
    return {"quantity": "effective resistance", "R": r, "flow": list(flow.values)}


def cmd_walk_hitting(args):
    from .electric_walks import hitting_time
    g = _graph(args)
    sigma, marked = _sigma_marked(g, args)
    return {"quantity": "hitting time", "H": hitting_time(g, sigma, marked)}


def cmd_walk_commute(args):
    from .electric_walks import commute_identity_check
    g = _graph(args)
    lhs, rhs = commute_identity_check(g, _vertex(g, args.s), _vertex(g, args.t))
    return {"quantity": "commute time identity", "lhs": lhs, "rhs": rhs}


def cmd_walk_run(args):
    from .electric_walks import bipartite_double, effective_resistance, electric_walk_run
    g = _graph(args)
    sigma, marked = _sigma_marked(g, args)
    g2, s2, m2 = bipartite_double(g, sigma, marked)
    R = args.R
    if R is None:
        if not m2:
            raise ParseError("--R is required when nothing is marked")
        R = effective_resistance(g2, s2, m2)[0]
    seeds = np.random.SeedSequence(args.seed).spawn(args.runs)
    runs = fan_out(lambda s: electric_walk_run(g2, s2, m2, R, rng=np.random.default_rng(s)), seeds)
    return {"quantity": "electric walk", "runs": args.runs, "accepted": sum(r.bit for r in runs),
            "steps_per_run": max(r.queries for r in runs), "R": R}


def cmd_cert_extract(args):
    from .functions import block_sensitivity, certificate_complexity, certificate_structure_of
    f = _function(args)
    if len(f.domain) > 4096:
        raise BudgetError("domain too large for certificate extraction")
    c, c0, c1 = certificate_complexity(f)
    cert = certificate_structure_of(f)
    return {"quantity": "certificate structure", "C": c, "C0": c0, "C1": c1,
            "block_sensitivity": block_sensitivity(f),
            "members": [[list(g) for g in m] for m in cert.members]}


# -------------------------------------------------------------- parser

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="64-bit seed for all sampling")
    common.add_argument("--tol", type=float, default=1e-9, help="feasibility tolerance")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="write the report here instead of stdout")

    fn = argparse.ArgumentParser(add_help=False)
    fn.add_argument("--function", help="named problem family")
    for name in ("n", "k", "q", "d"):
        fn.add_argument(f"--{name}", type=int)

    p = argparse.ArgumentParser(prog="adversarium", parents=[common],
                                description="Adversary bounds, span programs, learning graphs and walks.")
    p.add_argument("--version", action="version", version=__version__)
    groups = p.add_subparsers(dest="group", required=True)

    def leaf(sub, name, func, parents=(), **kw):
        sp = sub.add_parser(name, parents=[common, *parents], **kw)
        sp.set_defaults(func=func)
        return sp

    adv = groups.add_parser("adv").add_subparsers(dest="cmd", required=True)
    sp = leaf(adv, "ratio", cmd_adv_ratio, [fn], help="adversary ratio of a matrix or construction")
    sp.add_argument("--construction", choices=("relation", "ambainis"), default="relation")
    sp.add_argument("--weights", help="a,b,c,d for the Ambainis matrix")
    sp.add_argument("--matrix", help="adversary matrix JSON")

    dual = groups.add_parser("dual").add_subparsers(dest="cmd", required=True)
    sp = leaf(dual, "threshold", cmd_dual_threshold, help="exact threshold dual solution")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp = leaf(dual, "check", cmd_dual_check, [fn], help="check a dual solution file")
    sp.add_argument("--solution", required=True)

    span = groups.add_parser("span").add_subparsers(dest="cmd", required=True)
    sp = leaf(span, "build", cmd_span_build, help="write a named span program")
    sp.add_argument("--family", choices=("or", "maj3", "st"), required=True)
    sp.add_argument("--n", type=int, default=2)
    sp = leaf(span, "eval", cmd_span_eval)
    sp.add_argument("--program", required=True)
    sp.add_argument("--input", required=True)
    sp = leaf(span, "wsize", cmd_span_wsize, [fn])
    sp.add_argument("--program", required=True)
    sp.add_argument("--minimal", action="store_true", help="ignore stored witnesses")
    sp = leaf(span, "simulate", cmd_span_simulate)
    sp.add_argument("--program", required=True)
    sp.add_argument("--input", required=True)
    sp.add_argument("--runs", type=int, default=20)

    lg = groups.add_parser("lg").add_subparsers(dest="cmd", required=True)
    lgp = argparse.ArgumentParser(add_help=False)
    lgp.add_argument("--construction", choices=("trivial", "or", "ksubset", "collision", "triangle"),
                     required=True)
    lgp.add_argument("--r", type=int, default=1)
    lgp.add_argument("--r2", type=int)
    lgp.add_argument("--ell", type=int)
    sp = leaf(lg, "complexity", cmd_lg_complexity, [fn, lgp])
    sp.add_argument("--balance", action="store_true")
    sp = leaf(lg, "dual-check", cmd_lg_dual_check)
    sp.add_argument("--cert", choices=("ksubset", "hidden-shift"), required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--alpha", default="builtin", help="'builtin' or a JSON file of [mask, member, value]")
    sp = leaf(lg, "simulate", cmd_lg_simulate, [fn, lgp])
    sp.add_argument("--input", required=True)
    sp.add_argument("--runs", type=int, default=20)

    walk = groups.add_parser("walk").add_subparsers(dest="cmd", required=True)
    gp = argparse.ArgumentParser(add_help=False)
    gp.add_argument("--graph", required=True, help="edge list with 'u v w' lines")
    gp.add_argument("--s")
    gp.add_argument("--t")
    gp.add_argument("--sidecar", help='JSON {"sigma": {...}, "marked": [...]}')
    leaf(walk, "resistance", cmd_walk_resistance, [gp])
    leaf(walk, "hitting", cmd_walk_hitting, [gp])
    leaf(walk, "commute", cmd_walk_commute, [gp])
    sp = leaf(walk, "run", cmd_walk_run, [gp])
    sp.add_argument("--R", type=float)
    sp.add_argument("--runs", type=int, default=20)

    cert = groups.add_parser("cert").add_subparsers(dest="cmd", required=True)
    leaf(cert, "extract", cmd_cert_extract, [fn])
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.func(args)
        report.update({"version": __version__, "tolerance": args.tol, "seed": args.seed,
                       "command": f"{args.group} {args.cmd}"})
        text = render(report, args.format)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except BudgetError as exc:
        print(f"budget: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
