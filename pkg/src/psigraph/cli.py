"""Command-line entry point.

Exit codes: 0 success, 1 malformed input or unknown command, 2 validation
failure, 3 numerical invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import fileio
from .certificates import (
    E3_PRODUCT,
    E3_SYMMETRIC,
    E4_PRODUCT,
    E4_SYMMETRIC,
    CertificateMismatch,
    cycle_certificates,
    tripartite_certificates,
    hypercube_certificate,
    verify_certificate,
)
from .graph import GraphError, build_hypercube, validate
from .locc import fuzz_monotonicity, ghz_sweep, sweep_csv
from .monotones import bl_monotone, graph_spec, multi_renyi_spec, vidal_monotone
from .reflect import (
    SearchTooLarge,
    cut_count_equals_distance,
    enumerate_reflecting_cuts,
    is_edge_reflecting,
    is_parity_symmetric,
    is_vertex_reflecting,
)
from .tensor import NumericalInvariantError, evaluate_invariant, evaluate_on_density, partial_trace

EXIT_OK, EXIT_INPUT, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3


class ValidationFailed(Exception):
    """Raised after a report has been written, to set the exit code."""


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _emit(args, text: str):
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _scalar(z) -> dict | float:
    if isinstance(z, complex):
        return {"re": z.real, "im": z.imag}
    return float(z)


# -- graph ----------------------------------------------------------------------------------


def cmd_graph_check(args):
    graph = fileio.graph_from_dict(fileio.read_json(args.file))
    report = validate(graph)
    out = {"validation": report.to_dict()}
    if report.ok:
        cuts = enumerate_reflecting_cuts(graph, args.cap)
        out["parity_symmetric"] = is_parity_symmetric(graph)
        out["reflecting_cuts"] = [
            {"involution": list(c.involution), "cut_edges": list(c.cut_edges)} for c in cuts
        ]
        out["reflecting_cut_count"] = len(cuts)
        out["edge_reflecting"] = {
            str(a): bool(is_edge_reflecting(graph, a, args.cap)) for a in graph.labels
        }
        out["vertex_reflecting"] = bool(is_vertex_reflecting(graph, args.cap))
        dist = cut_count_equals_distance(graph, args.cap)
        out["cut_count_equals_distance"] = dist.ok
    _emit(args, fileio.dumps(out))
    if not report.ok:
        raise ValidationFailed("graph failed: " + ", ".join(report.failed()))


def cmd_graph_build(args):
    recipe = json.loads(args.recipe) if args.recipe else {"type": args.type}
    for key in ("n", "q"):
        if getattr(args, key) is not None:
            recipe[key] = getattr(args, key)
    if args.merge:
        recipe["merge"] = True
    graph = fileio.build_from_recipe(recipe)
    _emit(args, fileio.dumps(fileio.graph_to_dict(graph)))


# -- invariants and monotones ---------------------------------------------------------------


def cmd_invariant_eval(args):
    graph = fileio.graph_from_dict(fileio.read_json(args.graph))
    state = fileio.state_from_dict(fileio.read_json(args.state))
    z = evaluate_invariant(graph, state)
    out = {"value": _scalar(z)}
    if args.as_density is not None:
        rho = partial_trace(state, args.as_density)
        zd = evaluate_on_density(graph, args.as_density, rho)
        out["density_value"] = _scalar(zd)
        out["routes_agree"] = bool(abs(complex(zd) - complex(z)) <= 1e-10 * (1 + abs(z)))
        if not out["routes_agree"]:
            _emit(args, fileio.dumps(out))
            raise NumericalInvariantError("pure-state and density routes disagree")
    _emit(args, fileio.dumps(out))


def cmd_monotone_eval(args):
    state = fileio.state_from_dict(fileio.read_json(args.state))
    diag = {"kind": args.kind}
    if args.kind == "vidal":
        party = _ints(args.party)
        value = vidal_monotone(state, party, args.k)
        diag.update(k=args.k, party=party)
    elif args.kind == "graph":
        if not args.graph:
            raise ValueError("--graph is required for kind graph")
        graph = fileio.graph_from_dict(fileio.read_json(args.graph))
        exp = Fraction(args.exponent) if args.exponent else None
        spec = graph_spec(graph, exp)
        value = spec.evaluate(state)
        diag.update(exponent=str(spec.exponent), invariant=evaluate_invariant(graph, state))
    elif args.kind == "multirenyi":
        spec = multi_renyi_spec(state.parties)
        value = spec.evaluate(state)
        diag.update(q=state.parties, exponent=str(spec.exponent))
    else:
        ranks = _ints(args.ranks) if args.ranks else [1] * state.parties
        res = bl_monotone(state, ranks, args.restarts, args.seed)
        value = res.value
        diag.update(res.to_dict())
        diag.pop("value")
        diag.update(ranks=ranks, seed=args.seed)
    _emit(args, fileio.dumps({"value": value, "diagnostics": diag}))


# -- bounds and fuzzing ---------------------------------------------------------------------


def cmd_bounds_ghz(args):
    ns = _ints(args.ns)
    if not ns or min(ns) < 2:
        raise ValueError("--ns must list cycle sizes of at least 2")
    if args.steps < 1:
        raise ValueError("--steps must be positive")
    alphas = np.linspace(args.alpha_min, args.alpha_max, args.steps)
    if args.alpha_min == args.alpha_max:
        alphas = alphas[:1]
    rows = ghz_sweep(alphas, ns)
    _emit(args, sweep_csv(rows, ns))


def cmd_fuzz(args):
    spec_json = fileio.read_json(args.spec)
    spec = fileio.spec_from_dict(spec_json)
    dims = _ints(args.dims) if args.dims else spec_json.get("dims")
    if not dims:
        raise ValueError("local dimensions missing: pass --dims or put dims in the spec")
    report = fuzz_monotonicity(spec, dims, args.trials, args.seed)
    out = report.to_dict()
    out["dims"] = list(dims)
    _emit(args, fileio.dumps(out))
    if not report.ok:
        raise NumericalInvariantError(
            f"monotonicity violated by {-report.worst:.3e} at trial {report.worst_trial}"
        )


# -- certificates ---------------------------------------------------------------------------


def cmd_certificate_verify(args):
    graph, certs = fileio.load_certificate_file(fileio.read_json(args.file))
    reports = []
    for c in certs:
        try:
            r = verify_certificate(graph, c).to_dict()
        except CertificateMismatch as exc:
            r = {"passed": False, "error": str(exc)}
        r["label"] = c.label
        r["kind"] = c.kind
        reports.append(r)
    ok = bool(reports) and all(r["passed"] for r in reports)
    _emit(args, fileio.dumps({"passed": ok, "certificates": reports}))
    if not ok:
        raise ValidationFailed("certificate verification failed")


_HYPERCUBE_SOLUTIONS = {
    (3, "product"): E3_PRODUCT,
    (3, "symmetric"): E3_SYMMETRIC,
    (4, "product"): E4_PRODUCT,
    (4, "symmetric"): E4_SYMMETRIC,
}


def cmd_certificate_build(args):
    if args.family == "cycle":
        graph, certs = cycle_certificates(args.n, args.merge)
        certs = [certs[a] for a in sorted(certs)]
    elif args.family == "tripartite":
        graph, certs = tripartite_certificates(args.n)
        certs = [certs[a] for a in sorted(certs)]
    else:
        key = (args.q, args.solution)
        if key not in _HYPERCUBE_SOLUTIONS:
            raise ValueError("hypercube certificates exist for q=3 and q=4")
        graph = build_hypercube(args.q)
        certs = [
            hypercube_certificate(args.q, a, _HYPERCUBE_SOLUTIONS[key]) for a in graph.labels
        ]
    _emit(args, fileio.dumps(fileio.certificate_file(graph, certs)))


# -- parser ---------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="psigraph", description="Psi-graph invariants, monotones and LOCC bounds."
    )
    sub = p.add_subparsers(dest="group", required=True)

    g = sub.add_parser("graph", help="build or check psi-graphs").add_subparsers(
        dest="action", required=True
    )
    c = g.add_parser("check", help="validate a graph file and report its reflecting cuts")
    c.add_argument("file")
    c.add_argument("--cap", type=int, default=64, help="vertex cap for cut search")
    c.add_argument("--out")
    c.set_defaults(func=cmd_graph_check)
    b = g.add_parser("build", help="write a graph file from a named family")
    b.add_argument("--type", choices=["cycle", "hypercube", "tripartite"], default="cycle")
    b.add_argument("--n", type=int)
    b.add_argument("--q", type=int)
    b.add_argument("--merge", action="store_true", help="single label for the 1-cycle")
    b.add_argument("--recipe", help="JSON recipe (product, coxeter, ...) overriding --type")
    b.add_argument("--out")
    b.set_defaults(func=cmd_graph_build)

    i = sub.add_parser("invariant", help="evaluate graph invariants").add_subparsers(
        dest="action", required=True
    )
    e = i.add_parser("eval", help="contract a graph invariant on a state")
    e.add_argument("--graph", required=True)
    e.add_argument("--state", required=True)
    e.add_argument(
        "--as-density", type=int, metavar="PARTY", help="also evaluate via the reduced state"
    )
    e.add_argument("--out")
    e.set_defaults(func=cmd_invariant_eval)

    m = sub.add_parser("monotone", help="evaluate entanglement monotones").add_subparsers(
        dest="action", required=True
    )
    e = m.add_parser("eval", help="evaluate one monotone on a state")
    e.add_argument("--kind", choices=["vidal", "graph", "bl", "multirenyi"], required=True)
    e.add_argument("--state", required=True)
    e.add_argument("--k", type=int, default=1)
    e.add_argument("--party", default="0", help="comma-separated parties on one side")
    e.add_argument("--graph")
    e.add_argument("--exponent", help="rational exponent, e.g. 1/4 (graph kind)")
    e.add_argument("--ranks", help="comma-separated projector ranks (bl kind)")
    e.add_argument("--restarts", type=int, default=4)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out")
    e.set_defaults(func=cmd_monotone_eval)

    bd = sub.add_parser("bounds", help="transition probability bounds").add_subparsers(
        dest="action", required=True
    )
    e = bd.add_parser("ghz-example", help="sweep the three-qubit SLOCC deformation to CSV")
    e.add_argument("--alpha-min", type=float, default=-1.0)
    e.add_argument("--alpha-max", type=float, default=1.0)
    e.add_argument("--steps", type=int, default=81)
    e.add_argument("--ns", default="2,3,4")
    e.add_argument("--out")
    e.set_defaults(func=cmd_bounds_ghz)

    f = sub.add_parser("fuzz", help="randomised monotonicity checks").add_subparsers(
        dest="action", required=True
    )
    e = f.add_parser("monotonicity", help="random unilocal instruments against a monotone")
    e.add_argument("--spec", required=True)
    e.add_argument("--dims", help="comma-separated local dimensions")
    e.add_argument("--trials", type=int, default=1000)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out")
    e.set_defaults(func=cmd_fuzz)

    ce = sub.add_parser("certificate", help="convexity certificates").add_subparsers(
        dest="action", required=True
    )
    e = ce.add_parser("verify", help="verify every certificate in a file")
    e.add_argument("file")
    e.add_argument("--out")
    e.set_defaults(func=cmd_certificate_verify)
    e = ce.add_parser("build", help="write a certificate file for a known family")
    e.add_argument("--family", choices=["cycle", "tripartite", "hypercube"], required=True)
    e.add_argument("--n", type=int, default=3)
    e.add_argument("--q", type=int, default=3)
    e.add_argument("--merge", action="store_true")
    e.add_argument("--solution", choices=["product", "symmetric"], default="product")
    e.add_argument("--out")
    e.set_defaults(func=cmd_certificate_build)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        args.func(args)
    except NumericalInvariantError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValidationFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SearchTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GraphError, CertificateMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except KeyError as exc:
        print(f"error: missing field {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError, TypeError, IndexError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
