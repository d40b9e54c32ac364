"""The graphs G_0 and G_n, their marked points, and tropical modifications.

G_0 has two trivalent vertices ``v1``, ``v2`` joined by edges ``e0``, ``e1``,
``e2`` of pairwise different lengths, oriented from ``v1`` to ``v2``.  G_n
subdivides G_0 at the attachment points ``q0 = m0``, ``q1``, ..., ``qn`` and
hangs a loop at each; loop ``i`` consists of the vertex ``w<i>`` and the two
edges ``g<i>a``, ``g<i>b`` of half the loop length.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

from .divisor import Divisor
from .metric_graph import INF, Edge, GraphError, MetricGraph, Point, as_rat, format_rat


class FamilyError(ValueError):
    """A family specification violates one of its constraints."""


@dataclass(frozen=True)
class G0Spec:
    lengths: tuple = (Fraction(2), Fraction(3), Fraction(5))
    q1_offset: Fraction = Fraction(1, 2)  # distance from v1 along e1
    q2_offset: Fraction = Fraction(1, 2)  # distance from v2 along e2

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(as_rat(x) for x in self.lengths))
        object.__setattr__(self, "q1_offset", as_rat(self.q1_offset))
        object.__setattr__(self, "q2_offset", as_rat(self.q2_offset))

    def validate(self, allow_equal_lengths: bool = False):
        if len(self.lengths) != 3:
            raise FamilyError("G_0 needs exactly three edge lengths")
        if any(x <= 0 for x in self.lengths):
            raise FamilyError("lengths must be positive")
        if not allow_equal_lengths and len(set(self.lengths)) != 3:
            raise FamilyError("lengths must be pairwise distinct")
        l0, l1, l2 = self.lengths
        if not 0 < self.q1_offset < l1 / 2:
            raise FamilyError("q1 must lie strictly between v1 and m1")
        if not 0 < self.q2_offset < l2 / 2:
            raise FamilyError("q2 must lie strictly between v2 and m2")


@dataclass(frozen=True)
class GnSpec:
    base: G0Spec = G0Spec()
    n: int = 2
    extra_marks: tuple = ()  # (edge of G_0, offset from v1) for q3..qn; empty = defaults
    loop_lengths: tuple = ()  # lengths of loops 0..n; empty = all 1

    def resolved_extra_marks(self) -> tuple:
        if self.extra_marks:
            return tuple((e, as_rat(o)) for e, o in self.extra_marks)
        return default_extra_marks(self.base, self.n)

    def resolved_loop_lengths(self) -> tuple:
        if self.loop_lengths:
            return tuple(as_rat(x) for x in self.loop_lengths)
        return tuple(Fraction(1) for _ in range(self.n + 1))


@dataclass
class Marks:
    """Named points of a family graph, plus its loops (edge ids per loop index)."""

    points: dict = field(default_factory=dict)
    loops: dict = field(default_factory=dict)
    spec: object = None
    notes: list = field(default_factory=list)

    def __getitem__(self, name: str) -> Point:
        return self.points[name]

    def __contains__(self, name):
        return name in self.points

    def names(self) -> dict:
        """Point -> preferred label (first name in insertion order)."""
        out = {}
        for k, p in self.points.items():
            out.setdefault(p, k)
        return out

    @property
    def n(self) -> int:
        return len(self.loops) - 1


def _g0_marks_on(g: MetricGraph, spec: G0Spec) -> dict:
    l0, l1, l2 = spec.lengths
    return {
        "v1": g.point("v1"),
        "v2": g.point("v2"),
        "m0": g.point("e0", l0 / 2),
        "m1": g.point("e1", l1 / 2),
        "m2": g.point("e2", l2 / 2),
        "q1": g.point("e1", spec.q1_offset),
        "q2": g.point("e2", l2 - spec.q2_offset),
    }


def build_g0(spec: G0Spec = G0Spec(), allow_equal_lengths: bool = False) -> tuple[MetricGraph, Marks]:
    spec.validate(allow_equal_lengths)
    l0, l1, l2 = spec.lengths
    g = MetricGraph(["v1", "v2"], [("e0", "v1", "v2", l0), ("e1", "v1", "v2", l1), ("e2", "v1", "v2", l2)])
    return g, Marks(points=_g0_marks_on(g, spec), spec=spec)


def default_extra_marks(base: G0Spec, n: int) -> tuple:
    """Positions for q3..qn: odd multiples of 1/8, round robin over e0, e2, e1."""
    g, marks = build_g0(base, allow_equal_lengths=True)
    taken = set(marks.points.values())
    out = []
    order = ["e0", "e2", "e1"]
    t = {e: 3 for e in order}
    i = 0
    while len(out) < max(0, n - 2):
        e = order[i % 3]
        i += 1
        length = g.edge(e).length
        while Fraction(t[e], 8) < length:
            off = Fraction(t[e], 8)
            t[e] += 2
            p = g.point(e, off)
            if p not in taken:
                taken.add(p)
                out.append((e, off))
                break
        if i > 3 * 64 * (n + 1):
            raise FamilyError("could not place the extra marks")
    return tuple(out)


def build_gn(spec: GnSpec = GnSpec(), allow_equal_lengths: bool = False) -> tuple[MetricGraph, Marks]:
    if spec.n < 1:
        raise FamilyError("n must be at least 1")
    g0, m0marks = build_g0(spec.base, allow_equal_lengths)
    attach = {0: m0marks["m0"], 1: m0marks["q1"], 2: m0marks["q2"]} if spec.n >= 2 else {0: m0marks["m0"], 1: m0marks["q1"]}
    reserved = set(m0marks.points.values())
    for k, (e, off) in enumerate(spec.resolved_extra_marks(), start=3):
        if k > spec.n:
            break
        try:
            p = g0.point(e, off)
        except GraphError as exc:
            raise FamilyError(f"mark q{k}: {exc}") from None
        if p in reserved or p in attach.values():
            raise FamilyError(f"mark q{k} collides with another marked point")
        attach[k] = p
    if len(attach) != spec.n + 1:
        raise FamilyError("not enough positions for the extra marks")
    lengths = spec.resolved_loop_lengths()
    if len(lengths) != spec.n + 1 or any(x <= 0 for x in lengths):
        raise FamilyError("need one positive loop length per attachment point")

    refined, ref = g0.refine(attach.values())
    rename = {}
    for i, p in attach.items():
        np_ = ref(p)
        if not np_.is_vertex:
            raise FamilyError("attachment point did not become a vertex")
        rename[np_.vertex] = f"q{i}"
    g = refined.rename_vertices(rename)
    verts = list(g.vertices)
    edges = list(g.edges)
    loops = {}
    for i in range(spec.n + 1):
        w = f"w{i}"
        verts.append(w)
        half = lengths[i] / 2
        edges.append(Edge(f"g{i}a", f"q{i}", w, half))
        edges.append(Edge(f"g{i}b", f"q{i}", w, half))
        loops[i] = (f"g{i}a", f"g{i}b")
    g = MetricGraph(verts, edges)

    def move(p: Point) -> Point:
        q = ref(p)
        if q.is_vertex:
            return g.point(rename.get(q.vertex, q.vertex))
        return g.point(q.edge, q.offset)

    points = {k: move(p) for k, p in m0marks.points.items()}
    for i in attach:
        points[f"q{i}"] = g.point(f"q{i}")
    for i in range(spec.n + 1):
        points[f"w{i}"] = g.point(f"w{i}")
    marks = Marks(points=points, loops=loops, spec=spec)
    if spec.n < 2:
        marks.notes.append("n < 2: the no-g^r_{2r+1} statement only applies for n >= 2")
    return g, marks


def g0_subgraph_edges(g: MetricGraph) -> list[str]:
    """Edges of the G_0 part of a family graph (everything except the loops)."""
    return [e.id for e in g.edges if not e.id.startswith("g") and e.length is not INF]


def loop_position(g: MetricGraph, marks: Marks, i: int, p: Point) -> Fraction | None:
    """Arc position of ``p`` on loop i measured from q_i through g<i>a; None if off the loop."""
    a, b = marks.loops[i]
    ea, eb = g.edge(a), g.edge(b)
    half = ea.length
    if p.is_vertex:
        if p.vertex == f"q{i}":
            return Fraction(0)
        if p.vertex == f"w{i}":
            return half
        return None
    if p.edge == a:
        return p.offset
    if p.edge == b:
        return half + eb.length - p.offset
    return None


def loop_point(g: MetricGraph, marks: Marks, i: int, pos: Fraction) -> Point:
    a, b = marks.loops[i]
    half = g.edge(a).length
    total = half + g.edge(b).length
    pos = pos % total
    if pos <= half:
        return g.point(a, pos) if pos else g.point(f"q{i}")
    return g.point(b, total - pos)


def loop_index(g: MetricGraph, marks: Marks, p: Point) -> int | None:
    """Index of the loop whose interior contains p (q_i itself belongs to G_0)."""
    for i in marks.loops:
        pos = loop_position(g, marks, i, p)
        if pos is not None and pos != 0:
            return i
    return None


def loop_length(g: MetricGraph, marks: Marks, i: int) -> Fraction:
    a, b = marks.loops[i]
    return g.edge(a).length + g.edge(b).length


def degree4_witness(g: MetricGraph, marks: Marks, f1: Point, f2: Point) -> tuple[Divisor, str]:
    """Effective degree-4 divisor E >= f1 + f2 of rank >= 1 on G_n.

    Follows the case split on where f1, f2 sit: on G_0, or inside loops.  A
    chip pair p + p' on loop i with arc positions summing to 0 is equivalent on
    the loop to 2 q_i; three chips summing to 0 are equivalent to 3 q_i.
    """
    i1, i2 = loop_index(g, marks, f1), loop_index(g, marks, f2)
    D = lambda pts: Divisor.from_points(g, pts)

    def mate(i, p):
        return loop_point(g, marks, i, -loop_position(g, marks, i, p))

    if i1 is None and i2 is None:
        return D([f1, f2, marks["v1"], marks["v2"]]), "both on G_0: f1 + f2 + v1 + v2"
    if i1 is None or i2 is None:
        (a, ia), (b, _) = ((f2, i2), (f1, i1)) if i1 is None else ((f1, i1), (f2, i2))
        q = marks[f"q{ia}"]
        return D([b, q, a, mate(ia, a)]), f"one on loop {ia}: 2q{ia} swapped for a loop pair"
    if i1 != i2:
        return D([f1, mate(i1, f1), f2, mate(i2, f2)]), f"on loops {i1} and {i2}: 2q{i1} + 2q{i2} swapped for loop pairs"
    i = i1
    s = loop_position(g, marks, i, f1) + loop_position(g, marks, i, f2)
    third = loop_point(g, marks, i, -s)
    return D([f1, f2, third, marks[f"q{i}"]]), f"both on loop {i}: 3q{i} swapped for a loop triple"


# ---------------------------------------------------------------------------
# tropical modifications

_MOD_SUFFIX = "~"


def elementary_tropical_modification(g: MetricGraph, p: Point) -> MetricGraph:
    """Attach one infinite edge at ``p``."""
    p = g.check_point(p)
    if not g.is_finite_point(p):
        raise GraphError("cannot attach an infinite edge at an infinite point")
    return _attach(g, [p])


def _attach(g: MetricGraph, sites: list[Point]) -> MetricGraph:
    interior = [p for p in sites if not p.is_vertex]
    refined, ref = g.refine(interior)
    rename = {}
    for p in interior:
        v = ref(p).vertex
        if v not in rename and not g.has_vertex(v):
            rename[v] = v + _MOD_SUFFIX
    if rename:
        refined = refined.rename_vertices(rename)
    verts = list(refined.vertices)
    edges = list(refined.edges)
    leaves = list(refined.infinite_leaves)
    k = len(leaves)
    for p in sites:
        if p.is_vertex:
            at = p.vertex
        else:
            v = ref(p).vertex
            at = rename.get(v, v)
        leaf = f"inf{k}"
        while refined.has_vertex(leaf) or leaf in verts:
            k += 1
            leaf = f"inf{k}"
        verts.append(leaf)
        edges.append(Edge(f"x{k}", at, leaf, INF))
        leaves.append(leaf)
        k += 1
    return MetricGraph(verts, edges, leaves)


def retract(g: MetricGraph) -> MetricGraph:
    """Retraction of a tropical modification back onto the graph it modifies."""
    f = g.finite_part()
    changed = True
    while changed:
        changed = False
        for v in f.vertices:
            if v.endswith(_MOD_SUFFIX) and f.vertex_valence(v) == 2:
                f = f.smooth_vertex(v)
                changed = True
                break
    return f


def modification_sites(g: MetricGraph, denominator: int) -> list[Point]:
    """Vertices of the finite part plus interior points at offsets in (1/denominator)Z."""
    f = g.finite_part()
    sites = [f.point(v) for v in sorted(f.vertices)]
    for e in sorted(f.edges, key=lambda e: e.id):
        k = 1
        while Fraction(k, denominator) < e.length:
            sites.append(f.point(e.id, Fraction(k, denominator)))
            k += 1
    return sites


def enumerate_modifications(g: MetricGraph, budget: int, sites: Iterable[Point]) -> Iterator[tuple[tuple[Point, ...], MetricGraph]]:
    """All modifications with exactly ``budget`` infinite edges at the sites, up to multiset."""
    if budget < 0:
        raise ValueError("budget must be non-negative")
    if budget == 0:
        yield (), g
        return
    sites = sorted(set(sites), key=Point.sort_key)
    for combo in itertools.combinations_with_replacement(sites, budget):
        yield combo, _attach(g, list(combo))
