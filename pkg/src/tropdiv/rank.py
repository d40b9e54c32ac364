"""Rank of divisors, Clifford indices and the w^r_d invariant.

Ranks are computed against the vertex set of the finite part, which is a
rank-determining set for a model whose edges have two distinct ends:
``rank(D) >= r`` iff ``rank(D - p) >= r - 1`` for every model vertex ``p``.
Each step keeps the divisor effective by replacing ``D - p`` with the
p-reduced representative of ``D`` minus ``p``.

Existence questions over the continuum of divisors are answered in one of
three modes, recorded in every :class:`ClaimResult`:

``EXACT``
    a finite certificate settles the statement,
``SAMPLED``
    the statement was checked on a finite grid of points only,
``EXHAUSTED_WITHIN_BUDGET``
    an enumeration ran to completion within explicit budgets.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Callable, Iterable, Sequence

from .divisor import (
    Divisor,
    DivisorError,
    base_point,
    canonical,
    has_effective_representative,
    is_reduced,
    reduced,
)
from .metric_graph import GraphError, MetricGraph, Point, format_rat

EXACT = "EXACT"
SAMPLED = "SAMPLED"
EXHAUSTED = "EXHAUSTED_WITHIN_BUDGET"


@dataclass
class ClaimResult:
    claim: str
    mode: str
    verdict: bool
    witnesses: list = field(default_factory=list)
    sampling: str = ""
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "claim": self.claim,
            "mode": self.mode,
            "verdict": self.verdict,
            "witnesses": [_jsonable(w) for w in self.witnesses],
            "sampling": self.sampling,
            "details": _jsonable(self.details),
        }


def _jsonable(x):
    if isinstance(x, (Divisor, Point)):
        return str(x)
    if isinstance(x, Fraction):
        return format_rat(x)
    if isinstance(x, ClaimResult):
        return x.to_dict()
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


@dataclass(frozen=True)
class RankDeterminingSet:
    graph: MetricGraph
    points: tuple

    def __post_init__(self):
        f = self.graph.finite_part()
        cut, _ = f.refine(p for p in self.points if not p.is_vertex)
        named = {p.vertex for p in self.points if p.is_vertex}
        # complement must be a union of open intervals: every vertex of the
        # refined model must be one of the points
        for v in cut.vertices:
            if v in f.vertices and v not in named:
                raise GraphError(f"vertex {v} must belong to the rank-determining set")


def model_rds(g: MetricGraph) -> RankDeterminingSet:
    f = g.finite_part()
    return RankDeterminingSet(g, tuple(Point(vertex=v) for v in sorted(f.vertices)))


@dataclass
class SearchBudget:
    seed: int = 0
    grid_denominator: int = 4
    random_points: int = 50
    max_candidates: int | None = None


class _RankEngine:
    def __init__(self, g: MetricGraph):
        self.graph = g
        self.genus = g.finite_part().genus()
        self.base = base_point(g)
        # probing far points first rejects most non-examples sooner
        self.rds = sorted(model_rds(g).points, key=lambda p: (-g.distance(self.base, p), p.sort_key()))
        self.memo: dict = {}
        self.reductions = 0

    def class_key(self, d: Divisor):
        self.reductions += 1
        return reduced(d, self.base).key()

    def at_least(self, d: Divisor, r: int) -> bool:
        """rank(d) >= r, for effective d."""
        if r < 0:
            return True
        deg = d.degree
        if deg < r:
            return False
        if r <= deg - self.genus:
            return True
        if r == 0:
            return True
        if r == 1:
            for p in self.rds:
                self.reductions += 1
                if reduced(d, p)[p] < 1:
                    return False
            return True
        # classes repeat only deep in the recursion; memoize from r = 3 on
        key = (self.class_key(d), r) if r >= 3 else None
        hit = self.memo.get(key) if key is not None else None
        if hit is not None:
            return hit
        rest = []
        ok = True
        for p in self.rds:
            self.reductions += 1
            dp = reduced(d, p)
            # rank >= r forces r chips at p in the p-reduced representative
            if dp[p] < r:
                ok = False
                break
            rest.append(dp - p)
        if ok:
            ok = all(self.at_least(e, r - 1) for e in rest)
        if key is not None:
            self.memo[key] = ok
        return ok


def _engine(g: MetricGraph) -> _RankEngine:
    eng = g.__dict__.get("_rank_engine")
    if eng is None:
        eng = g._rank_engine = _RankEngine(g)
    return eng


def _effective(d: Divisor) -> Divisor | None:
    if d.is_effective():
        return d
    if d.degree < 0:
        return None
    neg = [p for p, k in d.items() if k < 0]
    r = reduced(d, neg[0])
    return r if r.is_effective() else None


def rank_at_least(d: Divisor, r: int) -> bool:
    e = _effective(d)
    if e is None:
        return r < 0
    return _engine(d.graph).at_least(e, r)


def rank(d: Divisor) -> int:
    e = _effective(d)
    if e is None:
        return -1
    eng = _engine(d.graph)
    if e.degree > 2 * eng.genus - 2:
        return e.degree - eng.genus
    r = max(0, e.degree - eng.genus)
    while eng.at_least(e, r + 1):
        r += 1
    return r


def riemann_roch_check(d: Divisor) -> bool:
    g = d.graph.finite_part().genus()
    k = canonical(d.graph)
    return rank(d) - rank(k - d) == d.degree - g + 1


def is_very_special(d: Divisor) -> bool:
    g = d.graph.finite_part().genus()
    return rank(d) > max(0, d.degree - g + 1)


def clifford_index(d: Divisor) -> int:
    if not is_very_special(d):
        raise DivisorError("Clifford index is only defined for very special divisors")
    return d.degree - 2 * rank(d)


# ---------------------------------------------------------------------------
# sampling


def random_points(g: MetricGraph, count: int, seed: int, max_denominator: int = 64) -> list[Point]:
    f = g.finite_part()
    rng = random.Random(seed)
    edges = sorted(f.edges, key=lambda e: e.id)
    out: list[Point] = []
    seen = set()
    guard = 0
    while len(out) < count:
        guard += 1
        if guard > 1000 * (count + 1):
            break
        e = rng.choice(edges)
        den = rng.randint(1, max_denominator)
        top = e.length * den
        hi = -(-top.numerator // top.denominator) - 1
        if hi < 1:
            continue
        off = Fraction(rng.randint(1, hi), den)
        p = f.point(e.id, off)
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def sampling_grid(g: MetricGraph, denominator: int = 4, n_random: int = 50, seed: int = 0) -> list[Point]:
    """Vertices, edge midpoints, points at offsets in (1/denominator)Z, plus seeded random points."""
    f = g.finite_part()
    pts = {f.point(v) for v in f.vertices}
    for e in f.edges:
        pts.add(f.point(e.id, e.length / 2))
        k = 1
        while Fraction(k, denominator) < e.length:
            pts.add(f.point(e.id, Fraction(k, denominator)))
            k += 1
    pts.update(random_points(g, n_random, seed))
    return sorted(pts, key=Point.sort_key)


def grid_from_budget(g: MetricGraph, budget: SearchBudget) -> list[Point]:
    return sampling_grid(g, budget.grid_denominator, budget.random_points, budget.seed)


def _describe_grid(budget: SearchBudget, size: int) -> str:
    return (
        f"grid: vertices, midpoints, offsets in (1/{budget.grid_denominator})Z, "
        f"{budget.random_points} random points (seed {budget.seed}); {size} points"
    )


# ---------------------------------------------------------------------------
# existence of g^r_d


def search_grd(g: MetricGraph, r: int, d: int, grid: Sequence[Point], max_candidates: int | None = None):
    """Look for a class of degree d and rank >= r.

    Such a class has a q-reduced representative with at least r chips at q, so
    only divisors ``r q + R`` that are q-reduced are examined, R ranging over
    multisets of grid points.  Adding chips never makes a non-reduced divisor
    reduced, which prunes the enumeration.

    Returns ``(witness or None, examined, complete)``.
    """
    q = base_point(g)
    eng = _engine(g)
    free = d - r
    pts = [p for p in grid if p != q]
    examined = 0
    base = Divisor(g, {q: r})

    def dfs(start: int, cur: Divisor, left: int):
        nonlocal examined
        if left == 0:
            examined += 1
            if max_candidates is not None and examined > max_candidates:
                raise _BudgetHit
            if eng.at_least(cur, r):
                return cur
            return None
        for i in range(start, len(pts)):
            nxt = cur + pts[i]
            if not is_reduced(nxt, q):
                continue
            hit = dfs(i, nxt, left - 1)
            if hit is not None:
                return hit
        # all remaining chips at q
        return None

    try:
        for extra_at_q in range(0, free + 1):
            cur = base + Divisor(g, {q: extra_at_q}) if extra_at_q else base
            hit = dfs(0, cur, free - extra_at_q)
            if hit is not None:
                return hit, examined, True
    except _BudgetHit:
        return None, examined, False
    return None, examined, True


class _BudgetHit(Exception):
    pass


def no_grd_exists(g: MetricGraph, r: int, d: int, budget: SearchBudget = SearchBudget(), grid=None) -> ClaimResult:
    """Claim "there is no divisor class of degree d and rank >= r"."""
    claim = f"no g^{r}_{d}"
    gen = g.finite_part().genus()
    if d < 0 or r > d:
        return ClaimResult(claim, EXACT, True, sampling="rank never exceeds degree")
    if r <= d - gen:
        w = Divisor(g, {base_point(g): d})
        return ClaimResult(claim, EXACT, False, [w], "rank >= deg - genus for every divisor")
    dr, dd = dual_pair(gen, r, d)
    if dd < d:
        # K - D has degree dd and rank dr, and D -> K - D is a bijection of classes
        res = no_grd_exists(g, dr, dd, budget, grid)
        res.claim = claim
        res.details["searched_dual"] = f"g^{dr}_{dd}"
        res.witnesses = [canonical(g) - w for w in res.witnesses]
        return res
    grid = grid if grid is not None else grid_from_budget(g, budget)
    hit, examined, complete = search_grd(g, r, d, grid, budget.max_candidates)
    if hit is not None:
        return ClaimResult(claim, EXACT, False, [hit], f"witness of rank >= {r} found on the grid", {"examined": examined})
    mode = SAMPLED if complete else EXHAUSTED
    return ClaimResult(claim, mode, True, [], _describe_grid(budget, len(grid)), {"examined": examined, "complete": complete})


# ---------------------------------------------------------------------------
# exact cell arguments


def cells(g: MetricGraph, fixed: Iterable[Point]) -> list[tuple[str, Point]]:
    """Cells of the model refined at ``fixed``: its vertices and its open edges.

    Each cell comes with a representative point (the midpoint for open edges).
    Whether ``D + y`` is w-reduced, for ``D`` supported on the fixed points and
    ``w`` a vertex of the refined model, only depends on the cell of ``y``.
    """
    f = g.finite_part()
    fixed = [p for p in fixed]
    ref_g, ref = f.refine(fixed)
    out = []
    for v in sorted(ref_g.vertices):
        p = ref.to_old(Point(vertex=v))
        out.append((f"vertex {p}", p))
    for e in sorted(ref_g.edges, key=lambda e: e.id):
        mid = ref.to_old(ref_g.point(e.id, e.length / 2))
        a = ref.to_old(Point(vertex=e.u))
        b = ref.to_old(Point(vertex=e.v))
        out.append((f"open segment ({a}, {b})", mid))
    return out


def rank_zero_by_cells(fixed: Divisor, probes: Sequence[Point]):
    """For every cell of y, look for a probe w with rank(fixed + y) = 0 certified at w.

    With F_w the w-reduced representative of ``fixed``, ``F_w + y`` being
    w-reduced and zero at w certifies ``|fixed + y - w| = empty``, so
    ``rank(fixed + y) = 0`` on the whole cell.  Returns a list of
    ``(cell, representative, probe)`` with ``probe=None`` for cells that no
    probe settles.
    """
    g = fixed.graph
    reps = {w: reduced(fixed, w) for w in probes}
    anchors = set(probes) | {Point(vertex=v) for v in g.finite_part().vertices}
    for f in reps.values():
        anchors |= set(f.support())
    out = []
    for label, y in cells(g, anchors):
        found = None
        for w in probes:
            d = reps[w] + y
            if w == y or d[w] != 0:
                continue
            if is_reduced(d, w):
                found = w
                break
        out.append((label, y, found))
    return out


def no_g12_exact(g: MetricGraph) -> ClaimResult:
    """Exact decision of whether a g^1_2 exists.

    Every class of degree 2 and rank >= 1 contains ``b + y`` for the base
    vertex ``b`` and some point ``y``.  Cells of ``y`` are excluded with
    :func:`rank_zero_by_cells`; surviving vertex cells are checked directly.
    """
    b = base_point(g)
    probes = [Point(vertex=v) for v in sorted(g.finite_part().vertices)]
    fixed = Divisor(g, {b: 1})
    table = rank_zero_by_cells(fixed, probes)
    survivors = [(lab, y) for lab, y, w in table if w is None]
    witnesses = []
    unsettled = []
    for lab, y in survivors:
        d = fixed + y
        if lab.startswith("vertex"):
            if rank_at_least(d, 1):
                witnesses.append(d)
        else:
            unsettled.append(lab)
    details = {
        "base": str(b),
        "cells": len(table),
        "settled_by_probe": len(table) - len(survivors),
        "survivors": [lab for lab, _ in survivors],
        "probes_used": sorted({str(w) for _, _, w in table if w is not None}),
    }
    if witnesses:
        return ClaimResult("no g^1_2", EXACT, False, witnesses, "cell enumeration", details)
    if unsettled:
        details["unsettled"] = unsettled
        return ClaimResult("no g^1_2", SAMPLED, True, [], "cell enumeration left open cells", details)
    return ClaimResult("no g^1_2", EXACT, True, [], "cell enumeration", details)


# ---------------------------------------------------------------------------
# w^r_d


def effective_divisors(g: MetricGraph, points: Sequence[Point], degree: int) -> list[Divisor]:
    return [Divisor.from_points(g, c) for c in combinations_with_replacement(points, degree)]


def wrd_lower(
    g: MetricGraph,
    r: int,
    d: int,
    w: int,
    f_samples: Iterable[Divisor],
    witness: Callable[[Divisor], Divisor | None] | None = None,
    grid: Sequence[Point] | None = None,
    sampling: str = "",
) -> ClaimResult:
    """Check ``w^r_d >= w`` on the sampled divisors F of degree r + w.

    For each F a witness E (effective, degree d, E >= F) comes from
    ``witness`` if given, otherwise from a search over ``F + R`` with R on
    ``grid``.  Every witness is checked independently: degree, E - F >= 0 and
    ``rank(E) >= r``.
    """
    if r < 1 or d < 1:
        raise ValueError("need r >= 1 and d >= 1")
    pairs = []
    failures = []
    count = 0
    for F in f_samples:
        count += 1
        if F.degree != r + w or not F.is_effective():
            raise DivisorError("F samples must be effective of degree r + w")
        E = witness(F) if witness is not None else _search_witness(g, r, d, F, grid)
        ok = E is not None and E.degree == d and (E - F).is_effective() and rank_at_least(E, r)
        if ok:
            pairs.append((F, E))
        else:
            failures.append(F)
    verdict = not failures
    res = ClaimResult(
        f"w^{r}_{d} >= {w}",
        SAMPLED,
        verdict,
        [{"F": F, "E": E} for F, E in pairs[:20]],
        sampling,
        {"samples": count, "witnessed": len(pairs), "failures": [str(F) for F in failures[:20]]},
    )
    return res


def _search_witness(g, r, d, F, grid):
    need = d - F.degree
    if need < 0:
        return None
    for R in combinations_with_replacement(grid, need):
        E = F + Divisor.from_points(g, R) if R else F
        if rank_at_least(E, r):
            return E
    return None


def wrd_counterexample(g: MetricGraph, r: int, d: int, w: int, candidates: Iterable[Divisor], grid: Sequence[Point]):
    """Find F of degree r + w with no E = F + R (R on the grid) of rank >= r.

    Returns ``(F or None, number of candidates tried)``.
    """
    tried = 0
    for F in candidates:
        tried += 1
        if _search_witness(g, r, d, F, grid) is None:
            return F, tried
    return None, tried


def wrd_value(g: MetricGraph, r: int, d: int, budget: SearchBudget = SearchBudget(), candidates=None, witness=None, max_w: int | None = None) -> ClaimResult:
    """Bracket w^r_d: sampled lower bound, counterexample-based upper bound."""
    grid = grid_from_budget(g, budget)
    exists = no_grd_exists(g, r, d, budget, grid)
    if exists.verdict:
        return ClaimResult(f"w^{r}_{d}", exists.mode, True, [], exists.sampling, {"lower": -1, "upper": -1, "no_grd": exists.to_dict()})
    small = sampling_grid(g, budget.grid_denominator, 0, budget.seed)
    lower = 0
    upper = None
    limit = max_w if max_w is not None else d - r
    details = {}
    for w in range(0, limit + 1):
        fs = effective_divisors(g, small, r + w)
        res = wrd_lower(g, r, d, w, fs, witness, grid, _describe_grid(budget, len(small)))
        details[f"lower_w{w}"] = {"verdict": res.verdict, "samples": res.details["samples"]}
        if not res.verdict:
            upper = w - 1
            details["counterexample"] = res.details["failures"][:1]
            break
        lower = w
        cands = candidates(w + 1) if candidates is not None else effective_divisors(g, small, r + w + 1)
        F, tried = wrd_counterexample(g, r, d, w + 1, cands, grid)
        details[f"upper_search_w{w + 1}"] = {"tried": tried, "found": str(F) if F is not None else None}
        if F is not None:
            upper = w
            details["counterexample"] = [str(F)]
            break
    details.update({"lower": lower, "upper": upper})
    closed = upper is not None and upper == lower
    return ClaimResult(f"w^{r}_{d}", SAMPLED, closed, [], _describe_grid(budget, len(grid)), details)


# ---------------------------------------------------------------------------
# Clifford index of a graph


def dual_pair(genus: int, r: int, d: int) -> tuple[int, int]:
    """(rank, degree) of K - D for D with rank r and degree d."""
    return r - (d - genus + 1), 2 * genus - 2 - d


def graph_clifford_index(g: MetricGraph, budget: SearchBudget = SearchBudget(), marks=None) -> ClaimResult:
    """Minimal Clifford index of a very special divisor.

    Searches c = 0, 1, ... over (r, d = 2r + c) with d <= g - 1; larger
    degrees are covered by passing to K - D.  For family graphs (``marks``
    given) the exclusion of c <= 1 uses the exact g^1_2 argument together
    with grid searches, and a degree-4 rank-1 divisor exhibits c = 2.
    """
    gen = g.finite_part().genus()
    if gen <= 1:
        return ClaimResult("c(graph)", EXACT, True, [], "no very special divisors in genus <= 1", {"value": None})
    if marks is not None:
        return _family_clifford(g, marks, budget)
    grid = grid_from_budget(g, budget)
    log = []
    for c in range(0, gen):
        for r in range(1, gen):
            d = 2 * r + c
            if d > gen - 1:
                break
            res = no_grd_exists(g, r, d, budget, grid)
            log.append({"r": r, "d": d, "mode": res.mode, "none": res.verdict})
            if not res.verdict:
                D = res.witnesses[0]
                if is_very_special(D):
                    val = clifford_index(D)
                    mode = EXACT if val == 0 else SAMPLED
                    return ClaimResult("c(graph)", mode, True, [D], _describe_grid(budget, len(grid)), {"value": val, "log": log})
    return ClaimResult("c(graph)", SAMPLED, True, [], _describe_grid(budget, len(grid)), {"value": None, "log": log})


def _family_clifford(g, marks, budget) -> ClaimResult:
    gen = g.finite_part().genus()
    grid = grid_from_budget(g, budget)
    exclusions = []
    g12 = no_g12_exact(g)
    exclusions.append({"r": 1, "d": 2, "result": g12.to_dict()})
    sampled = False
    for c in (0, 1):
        for r in range(1, gen):
            d = 2 * r + c
            if d > 2 * gen - 2:
                break
            if r <= max(0, d - gen + 1):
                continue
            dr, dd = dual_pair(gen, r, d)
            rr, use_d = (r, d) if d <= dd else (dr, dd)
            if (rr, use_d) == (1, 2):
                exclusions.append({"r": r, "d": d, "via": "g^1_2 (exact)" if (r, d) != (1, 2) else "exact"})
                if not g12.verdict:
                    return ClaimResult("c(graph)", EXACT, True, g12.witnesses, "", {"value": 0, "exclusions": exclusions})
                continue
            res = no_grd_exists(g, rr, use_d, budget, grid)
            sampled = sampled or res.mode != EXACT
            exclusions.append({"r": r, "d": d, "searched": f"g^{rr}_{use_d}", "mode": res.mode, "none": res.verdict})
            if not res.verdict:
                D = res.witnesses[0]
                val = clifford_index(D) if is_very_special(D) else None
                return ClaimResult("c(graph)", EXACT, True, [D], "", {"value": val, "exclusions": exclusions})
    D = Divisor.from_points(g, [marks["q0"], marks["q0"], marks["q1"], marks["q1"]])
    rk = rank(D)
    vs = is_very_special(D)
    val = D.degree - 2 * rk if vs else None
    note = "exclusions of c <= 1 combine the exact g^1_2 argument with grid searches"
    return ClaimResult(
        "c(graph)",
        SAMPLED if sampled else EXACT,
        vs and val == 2 and g12.verdict,
        [D],
        note + (" (grid searches are sampled)" if sampled else ""),
        {"value": val, "exhibited_rank": rk, "exclusions": exclusions, "relative_to_sampled_searches": sampled},
    )
