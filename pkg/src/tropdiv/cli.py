"""Command-line interface: reduce, rank, w^r_d, Clifford index, harmonic maps, claim verification.

Exit codes: 0 verified or true, 1 falsified with a witness, 2 parse error,
3 domain error, 4 inconclusive within the budget.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import claims as C
from .divisor import DivisorError, reduce
from .family import FamilyError, G0Spec, GnSpec, build_g0, build_gn
from .formats import (
    GraphFile,
    ParseError,
    emit_dot,
    emit_graph,
    family_spec,
    format_divisor,
    parse_divisor,
    parse_graph,
    parse_morphism,
    parse_point,
    report_dict,
    report_json,
    report_text,
)
from .harmonic import HarmonicBudget, HarmonicError, fiber_degree, is_harmonic, random_target_points, search_degree2_to_genus1
from .metric_graph import GraphError, parse_rat
from .rank import EXACT, ClaimResult, SearchBudget, graph_clifford_index, rank, wrd_value

EXIT_OK, EXIT_FALSIFIED, EXIT_PARSE, EXIT_DOMAIN, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4

SEED_ENV = "TROPDIV_SEED"


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise ParseError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


# ---------------------------------------------------------------------------
# helpers


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def _load(args) -> GraphFile:
    return parse_graph(_read(args.graph), getattr(args, "n", None))


def _names(gf: GraphFile) -> dict:
    return {p: name for name, p in gf.marks.items() if not (p.is_vertex and p.vertex == name)}


def _exit_code(result: ClaimResult) -> int:
    if result.details.get("inconclusive"):
        return EXIT_INCONCLUSIVE
    if result.verdict:
        return EXIT_OK
    if result.witnesses or result.details.get("counterexample"):
        return EXIT_FALSIFIED
    return EXIT_INCONCLUSIVE


def _emit(args, report: dict, text: str | None = None, figures=None) -> None:
    out = report_json(report) if args.json else (text if text is not None else report_text(report))
    sys.stdout.write(out)
    if args.report_dir:
        d = Path(args.report_dir)
        d.mkdir(parents=True, exist_ok=True)
        (d / "report.txt").write_text(report_text(report) if text is None else text)
        (d / "report.json").write_text(report_json(report))
        if figures:
            figures(d)


def _graph_figure(g, marks, divisor, title):
    def draw(d: Path):
        from .plotting import graph_figure

        graph_figure(g, d / "graph.png", divisor=divisor, marks=marks, title=title)

    return draw


def _first_divisor(result: ClaimResult):
    for w in result.witnesses:
        if hasattr(w, "support"):
            return w
        if isinstance(w, dict):
            for k in ("E", "divisor"):
                if hasattr(w.get(k), "support"):
                    return w[k]
    return None


def _claim_report(args, result: ClaimResult, budgets: dict, g=None, marks=None) -> int:
    report = report_dict(result, args.seed, budgets)

    def figures(d: Path):
        from .plotting import counts_figure, graph_figure

        if g is not None:
            graph_figure(g, d / "graph.png", divisor=_first_divisor(result), marks=marks, title=result.claim)
        counts = result.details.get("counts")
        if isinstance(counts, dict) and counts:
            counts_figure(counts, d / "counts.png", f"{result.claim}: candidates by outcome")

    _emit(args, report, figures=figures)
    return _exit_code(result)


def _spec_from_args(args):
    """G_n spec from --lengths/--q1/--q2/--loops overrides (graph file family if given)."""
    if getattr(args, "graph", None):
        gf = parse_graph(_read(args.graph), args.n)
        if gf.family is None:
            raise DivisorError("verification needs a graph file with a family stanza")
        spec = family_spec(gf.family, args.n)
        return spec.base if isinstance(spec, GnSpec) else spec, spec if isinstance(spec, GnSpec) else None
    kw = {}
    if args.lengths:
        kw["lengths"] = tuple(parse_rat(x) for x in args.lengths.split(","))
    if args.q1:
        kw["q1_offset"] = parse_rat(args.q1)
    if args.q2:
        kw["q2_offset"] = parse_rat(args.q2)
    base = G0Spec(**kw)
    loops = tuple(parse_rat(x) for x in args.loops.split(",")) if args.loops else ()
    return base, GnSpec(base=base, n=args.n, loop_lengths=loops)


# ---------------------------------------------------------------------------
# commands


def cmd_reduce(args) -> int:
    gf = _load(args)
    g = gf.graph
    d = parse_divisor(g, args.divisor, gf.marks)
    q = parse_point(g, args.at, gf.marks)
    out, cert = reduce(d, q)
    names = _names(gf)
    text = format_divisor(out, names) + "\n"
    report = {"input": format_divisor(d, names), "base": args.at, "reduced": format_divisor(out, names)}
    if args.certificate or args.json:
        report["certificate"] = cert.to_dict()
    if args.certificate and not args.json:
        text += json.dumps(cert.to_dict(), indent=2, sort_keys=True) + "\n"
    _emit(args, report, text=text, figures=_graph_figure(g, gf.marks, out, f"{args.at}-reduced"))
    return EXIT_OK


def cmd_rank(args) -> int:
    gf = _load(args)
    d = parse_divisor(gf.graph, args.divisor, gf.marks)
    r = rank(d)
    report = {"divisor": format_divisor(d, _names(gf)), "degree": d.degree, "rank": r, "mode": EXACT}
    _emit(args, report, text=f"{r}\n", figures=_graph_figure(gf.graph, gf.marks, d, f"rank {r}"))
    return EXIT_OK


def _budget(args) -> SearchBudget:
    return SearchBudget(seed=args.seed, grid_denominator=args.grid_denominator, random_points=args.random_points)


def cmd_wrd(args) -> int:
    gf = _load(args)
    g = gf.graph
    budget = _budget(args)
    budgets = {"grid_denominator": budget.grid_denominator, "random_points": budget.random_points}
    spec = family_spec(gf.family, args.n) if gf.family else None
    if isinstance(spec, GnSpec) and (args.r, args.d) == (1, 4) and spec.n >= 2:
        # the family construction gives the witnesses, a certified F bounds from above
        res = C.check_prop2(spec=spec, count=args.samples, seed=args.seed)
        budgets["f_samples"] = args.samples
        value = 1 if res.verdict else None
    else:
        res = wrd_value(g, args.r, args.d, budget)
        lo, hi = res.details.get("lower"), res.details.get("upper")
        value = lo if res.verdict and lo == hi else None
    claim = ClaimResult(
        f"w^{args.r}_{args.d} = {args.w}",
        res.mode,
        value == args.w,
        res.witnesses,
        res.sampling,
        dict(res.details, value=value),
    )
    if value is None:
        claim.details["inconclusive"] = True
    return _claim_report(args, claim, budgets, g, gf.marks)


def cmd_clifford(args) -> int:
    gf = _load(args)
    budget = _budget(args)
    marks = None
    spec = family_spec(gf.family, args.n) if gf.family else None
    if isinstance(spec, GnSpec):
        _, marks = build_gn(spec)
    res = graph_clifford_index(gf.graph, budget, marks=marks)
    budgets = {"grid_denominator": budget.grid_denominator, "random_points": budget.random_points}
    return _claim_report(args, res, budgets, gf.graph, gf.marks)


def cmd_harmonic_check(args) -> int:
    m = parse_morphism(_read(args.morphism))
    ok, cert = is_harmonic(m)
    if ok:
        pts = random_target_points(m.target, args.points, args.seed)
        fibers = {str(p): fiber_degree(m, p) for p in pts}
        ok = all(v == cert.degree for v in fibers.values())
        details = {"degree": cert.degree, "local_degree": cert.local_degree, "fiber_sums": cert.fiber_sums, "sampled_fibers": fibers}
    else:
        details = {"reason": cert}
    res = ClaimResult("harmonic morphism", EXACT, ok, [], f"{args.points} random target points (seed {args.seed})", details)
    report = report_dict(res, args.seed, {"points": args.points})
    _emit(args, report)
    return EXIT_OK if ok else EXIT_FALSIFIED


def cmd_harmonic_search(args) -> int:
    gf = _load(args)
    budget = HarmonicBudget(max_modifications=args.budget_mods, denominator=args.subdiv, jobs=args.jobs)
    res = search_degree2_to_genus1(gf.graph, budget)
    budgets = {"max_modifications": args.budget_mods, "denominator": args.subdiv}
    return _claim_report(args, res, budgets, gf.graph, gf.marks)


def cmd_verify(args) -> int:
    base, spec = _spec_from_args(args)
    hb = HarmonicBudget(max_modifications=args.budget_mods, denominator=args.subdiv, jobs=args.jobs)
    budgets: dict = {}
    g = marks = None
    claim = args.claim
    if claim in ("lemma1", "lemma2"):
        res = C.check_lemma1(base) if claim == "lemma1" else C.check_lemma2(base)
        budgets = {"grid_denominator": 16} if claim == "lemma1" else {}
        g, marks = build_g0(base)
    elif claim == "lemma3":
        res = C.check_lemma3()
    else:
        g, marks = build_gn(spec, allow_equal_lengths=claim == "theorem")
        if claim == "prop1":
            b = C.prop1_budget()
            res = C.check_prop1(spec=spec, budget=b)
            budgets = {"grid_denominator": b.grid_denominator, "random_points": b.random_points}
        elif claim == "prop2":
            res = C.check_prop2(spec=spec, count=args.samples, seed=args.seed)
            budgets = {"grid_denominator": 4, "f_samples": args.samples}
        elif claim == "clifford":
            res = C.check_clifford(spec=spec)
            budgets = {"grid_denominator": 4, "random_points": C.prop1_budget().random_points}
        elif claim == "theorem":
            res = C.check_theorem(spec=spec, budget=hb)
            budgets = {"max_modifications": hb.max_modifications, "denominator": hb.denominator}
        else:
            res = C.check_corollary(spec=spec, budget=hb, count=args.samples, seed=args.seed)
            budgets = {"max_modifications": hb.max_modifications, "denominator": hb.denominator, "f_samples": args.samples}
    return _claim_report(args, res, budgets, g, marks.points if marks is not None else None)


def cmd_dot(args) -> int:
    gf = _load(args)
    sys.stdout.write(emit_dot(gf.graph, Path(args.graph).stem or "G"))
    return EXIT_OK


def cmd_emit(args) -> int:
    gf = _load(args)
    sys.stdout.write(emit_graph(gf.graph, gf.marks))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help=f"random seed (default: ${SEED_ENV} or 0)")
    common.add_argument("--json", action="store_true", help="print the JSON report instead of text")
    common.add_argument("--report-dir", help="also write report.txt, report.json and PNG figures here")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for modification searches")

    graph = argparse.ArgumentParser(add_help=False)
    graph.add_argument("graph", help="graph file")
    graph.add_argument("--n", type=int, default=None, help="number of loops for a 'family gn' graph file")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--grid-denominator", type=int, default=4)
    grid.add_argument("--random-points", type=int, default=10)

    harm = argparse.ArgumentParser(add_help=False)
    harm.add_argument("--budget-mods", type=int, default=2, help="maximal number of infinite edges attached")
    harm.add_argument("--subdiv", type=int, default=8, help="attachment sites at offsets in (1/SUBDIV)Z")

    p = argparse.ArgumentParser(prog="tropdiv", description="Divisors and harmonic morphisms on metric graphs.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("reduce", parents=[common, graph], help="q-reduced representative of a divisor")
    s.add_argument("--divisor", required=True)
    s.add_argument("--at", required=True, help="base point")
    s.add_argument("--certificate", action="store_true", help="print the firing certificate")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("rank", parents=[common, graph], help="Baker-Norine rank of a divisor")
    s.add_argument("--divisor", required=True)
    s.set_defaults(func=cmd_rank)

    s = sub.add_parser("wrd", parents=[common, graph, grid], help="check w^r_d = w")
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--w", type=int, required=True)
    s.add_argument("--samples", type=int, default=50, help="random F samples on top of the grid")
    s.set_defaults(func=cmd_wrd)

    s = sub.add_parser("clifford", parents=[common, graph, grid], help="Clifford index of the graph")
    s.set_defaults(func=cmd_clifford)

    s = sub.add_parser("harmonic", help="harmonic morphisms")
    hsub = s.add_subparsers(dest="harmonic_command", required=True)
    h = hsub.add_parser("check", parents=[common], help="check a morphism file for harmonicity")
    h.add_argument("morphism", help="morphism file")
    h.add_argument("--points", type=int, default=25, help="random target points for fiber degrees")
    h.set_defaults(func=cmd_harmonic_check)
    h = hsub.add_parser("search", parents=[common, graph, harm], help="search modifications for a degree-2 map to genus 1")
    h.set_defaults(func=cmd_harmonic_search)

    s = sub.add_parser("verify", parents=[common, harm], help="run a claim check")
    s.add_argument("claim", choices=list(C.CLAIMS))
    s.add_argument("--graph", help="graph file with a family stanza (overrides the spec flags)")
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--lengths", help="edge lengths of G_0, e.g. 2,3,5")
    s.add_argument("--q1", help="offset of q1 on e1")
    s.add_argument("--q2", help="offset of q2 on e2")
    s.add_argument("--loops", help="loop lengths, e.g. 1,1")
    s.add_argument("--samples", type=int, default=50, help="random F samples for prop2")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("dot", parents=[common, graph], help="emit Graphviz DOT")
    s.set_defaults(func=cmd_dot)

    s = sub.add_parser("emit", parents=[common, graph], help="emit the graph in normalized file format")
    s.set_defaults(func=cmd_emit)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        if args.seed is None:
            args.seed = default_seed()
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (GraphError, DivisorError, FamilyError, HarmonicError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
