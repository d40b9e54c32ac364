"""Metric graphs with exact rational edge lengths.

A :class:`MetricGraph` is a finite model: named vertices, edges with two
distinct end vertices, and positive lengths that are either
:class:`fractions.Fraction` values or the :data:`INF` token.  Edges of
infinite length end in a leaf listed in ``infinite_leaves``.

Points of the graph are :class:`Point` values.  A point is either a vertex or
an interior point of an edge at a rational offset measured from the edge's
``u`` end; :meth:`MetricGraph.point` canonicalizes offsets ``0`` and ``l(e)``
to the corresponding vertex.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping


class GraphError(ValueError):
    """Raised for malformed graphs or points that do not lie on a graph."""


class _Infinity:
    """The length of an infinite edge.  Compares above every rational."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __hash__(self):
        return hash("tropdiv-infinity")

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __mul__(self, k):
        if isinstance(k, int) and k > 0:
            return self
        raise GraphError("infinite length can only be scaled by a positive integer")

    __rmul__ = __mul__

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def as_rat(value) -> Fraction:
    """Convert ints, Fractions and ``"p/q"`` strings to a Fraction.  Floats are refused."""
    if isinstance(value, float):
        raise TypeError("floating point values are not accepted; use Fraction or 'p/q'")
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rat(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


_RAT_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


def parse_rat(text: str) -> Fraction:
    m = _RAT_RE.match(text)
    if not m:
        raise GraphError(f"malformed rational {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise GraphError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def parse_length(text: str):
    if text.strip().lower() in ("inf", "infinity"):
        return INF
    return parse_rat(text)


def format_rat(x) -> str:
    if x is INF:
        return "inf"
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Edge:
    id: str
    u: str
    v: str
    length: object  # Fraction or INF

    @property
    def is_infinite(self) -> bool:
        return self.length is INF

    def other(self, w: str) -> str:
        if w == self.u:
            return self.v
        if w == self.v:
            return self.u
        raise GraphError(f"{w} is not an end of edge {self.id}")


@dataclass(frozen=True)
class Point:
    """A vertex (``edge is None``) or an interior edge point.

    Build points through :meth:`MetricGraph.point` so that they are canonical.
    """

    vertex: str | None = None
    edge: str | None = None
    offset: Fraction | None = None

    @property
    def is_vertex(self) -> bool:
        return self.edge is None

    def sort_key(self):
        if self.edge is None:
            return ("", Fraction(-1), self.vertex)
        return (self.edge, self.offset, "")

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        if self.edge is None:
            return self.vertex
        return f"{self.edge}@{format_rat(self.offset)}"

    def __repr__(self):
        return f"Point({self})"


@dataclass(frozen=True)
class TangentDirection:
    """A germ of edge leaving ``base``; ``toward`` is the end vertex it heads to."""

    base: Point
    edge: str
    toward: str


_PIECE_RE = re.compile(r"^(?P<root>.+)\[(?P<a>[^\[\]:]+):(?P<b>[^\[\]:]+)\]$")


def edge_root(edge_id: str) -> tuple[str, Fraction]:
    """Return the original edge an edge piece was cut from and the piece's start offset."""
    m = _PIECE_RE.match(edge_id)
    if not m:
        return edge_id, Fraction(0)
    return m.group("root"), parse_rat(m.group("a"))


class MetricGraph:
    """An immutable connected metric graph with a fixed vertex set."""

    def __init__(self, vertices: Iterable[str], edges: Iterable[Edge | tuple], infinite_leaves: Iterable[str] = ()):
        self._vertices: tuple[str, ...] = tuple(vertices)
        built = []
        for e in edges:
            if not isinstance(e, Edge):
                eid, u, v, length = e
                length = length if length is INF else as_rat(length)
                e = Edge(eid, u, v, length)
            built.append(e)
        self._edges: tuple[Edge, ...] = tuple(built)
        self._infinite = frozenset(infinite_leaves)
        self._edge_by_id = {e.id: e for e in self._edges}
        self._incident: dict[str, list[Edge]] = {v: [] for v in self._vertices}
        self._validate()
        for e in self._edges:
            self._incident[e.u].append(e)
            self._incident[e.v].append(e)

    def _validate(self):
        if len(set(self._vertices)) != len(self._vertices):
            raise GraphError("duplicate vertex ids")
        if not self._vertices:
            raise GraphError("a metric graph needs at least one vertex")
        if len(self._edge_by_id) != len(self._edges):
            raise GraphError("duplicate edge ids")
        vs = set(self._vertices)
        if not self._infinite <= vs:
            raise GraphError("infinite leaves must be vertices")
        leaf_degree = {v: 0 for v in self._infinite}
        for e in self._edges:
            if e.u not in vs or e.v not in vs:
                raise GraphError(f"edge {e.id} has an end outside the vertex set")
            if e.u == e.v:
                raise GraphError(f"edge {e.id} must have two different end vertices")
            touches_inf = e.u in self._infinite or e.v in self._infinite
            if e.length is INF:
                if not touches_inf:
                    raise GraphError(f"edge {e.id} has infinite length but no infinite leaf")
            else:
                if not isinstance(e.length, Fraction):
                    raise GraphError(f"edge {e.id} length must be exact")
                if e.length <= 0:
                    raise GraphError(f"edge {e.id} must have positive length")
                if touches_inf:
                    raise GraphError(f"edge {e.id} ends in an infinite leaf but has finite length")
            for w in (e.u, e.v):
                if w in leaf_degree:
                    leaf_degree[w] += 1
        for w, k in leaf_degree.items():
            if k != 1:
                raise GraphError(f"infinite leaf {w} must be incident to exactly one edge")
        if not self._connected():
            raise GraphError("metric graph is disconnected")

    def _connected(self) -> bool:
        adj = {v: set() for v in self._vertices}
        for e in self._edges:
            adj[e.u].add(e.v)
            adj[e.v].add(e.u)
        seen = {self._vertices[0]}
        stack = [self._vertices[0]]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == len(self._vertices)

    # -- basic access -------------------------------------------------------

    @property
    def vertices(self) -> tuple[str, ...]:
        return self._vertices

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self._edges

    @property
    def infinite_leaves(self) -> frozenset:
        return self._infinite

    def edge(self, eid: str) -> Edge:
        try:
            return self._edge_by_id[eid]
        except KeyError:
            raise GraphError(f"no edge {eid!r}") from None

    def has_edge(self, eid: str) -> bool:
        return eid in self._edge_by_id

    def has_vertex(self, v: str) -> bool:
        return v in self._incident

    def incident_edges(self, v: str) -> list[Edge]:
        if v not in self._incident:
            raise GraphError(f"no vertex {v!r}")
        return list(self._incident[v])

    def structure(self):
        """Hashable description used for structural equality."""
        s = self.__dict__.get("_structure")
        if s is None:
            s = (
                tuple(sorted(self._vertices)),
                tuple(sorted((e.id, e.u, e.v, str(e.length)) for e in self._edges)),
                tuple(sorted(self._infinite)),
            )
            self._structure = s
        return s

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, MetricGraph) and self.structure() == other.structure()

    def __hash__(self):
        return hash(self.structure())

    def __repr__(self):
        return f"MetricGraph(|V|={len(self._vertices)}, |E|={len(self._edges)}, genus={self.genus()})"

    # -- points ---------------------------------------------------------------

    def point(self, where, offset=None) -> Point:
        """Canonical point: ``point("v1")`` or ``point("e1", "3/4")``."""
        if isinstance(where, Point):
            if where.is_vertex:
                return self.point(where.vertex)
            return self.point(where.edge, where.offset)
        if offset is None:
            if where in self._incident:
                return Point(vertex=where)
            raise GraphError(f"no vertex {where!r}")
        e = self.edge(where)
        off = as_rat(offset)
        if off < 0 or (e.length is not INF and off > e.length):
            raise GraphError(f"offset {format_rat(off)} is outside edge {where}")
        if off == 0:
            return Point(vertex=e.u)
        if e.length is not INF and off == e.length:
            return Point(vertex=e.v)
        return Point(edge=e.id, offset=off)

    def contains(self, p: Point) -> bool:
        try:
            return self.point(p) == p
        except GraphError:
            return False

    def check_point(self, p: Point) -> Point:
        if not self.contains(p):
            raise GraphError(f"point {p} does not lie on the graph")
        return p

    def is_finite_point(self, p: Point) -> bool:
        self.check_point(p)
        if p.is_vertex:
            return p.vertex not in self._infinite
        return self.edge(p.edge).length is not INF

    def tangent_directions(self, p: Point) -> list[TangentDirection]:
        self.check_point(p)
        if p.is_vertex:
            return [TangentDirection(p, e.id, e.other(p.vertex)) for e in self._incident[p.vertex]]
        e = self.edge(p.edge)
        return [TangentDirection(p, e.id, e.u), TangentDirection(p, e.id, e.v)]

    def valence(self, p: Point) -> int:
        return len(self.tangent_directions(p))

    def vertex_valence(self, v: str) -> int:
        return len(self._incident[v])

    # -- global invariants --------------------------------------------------

    def genus(self) -> int:
        return len(self._edges) - len(self._vertices) + 1

    def is_tree(self) -> bool:
        return self.genus() == 0

    def total_length(self) -> Fraction:
        return sum((e.length for e in self._edges if e.length is not INF), Fraction(0))

    def finite_part(self) -> "MetricGraph":
        """Delete infinite edges and their leaves (the retraction onto the finite part)."""
        if not self._infinite:
            return self
        fp = self.__dict__.get("_finite_part")
        if fp is None:
            verts = [v for v in self._vertices if v not in self._infinite]
            edges = [e for e in self._edges if e.length is not INF]
            fp = self._finite_part = MetricGraph(verts, edges)
        return fp

    def denominator(self) -> int:
        d = 1
        for e in self._edges:
            if e.length is not INF:
                d = lcm(d, e.length.denominator)
        return d

    # -- distances ----------------------------------------------------------

    def distance(self, p: Point, q: Point) -> Fraction:
        """Shortest-path distance on the finite part."""
        p, q = self.check_point(p), self.check_point(q)
        if not (self.is_finite_point(p) and self.is_finite_point(q)):
            raise GraphError("distance is only defined between finite points")
        if p == q:
            return Fraction(0)
        g = self.finite_part()

        def anchors(x: Point):
            if x.is_vertex:
                return [(x.vertex, Fraction(0))]
            e = g.edge(x.edge)
            return [(e.u, x.offset), (e.v, e.length - x.offset)]

        best = None
        if not p.is_vertex and not q.is_vertex and p.edge == q.edge:
            best = abs(p.offset - q.offset)
        dist = {}
        heap = []
        for v, d0 in anchors(p):
            if v not in dist or d0 < dist[v]:
                dist[v] = d0
                heapq.heappush(heap, (d0, v))
        done = set()
        while heap:
            d, x = heapq.heappop(heap)
            if x in done:
                continue
            done.add(x)
            for e in g._incident[x]:
                y = e.other(x)
                nd = d + e.length
                if y not in dist or nd < dist[y]:
                    dist[y] = nd
                    heapq.heappush(heap, (nd, y))
        for v, d1 in anchors(q):
            if v in dist:
                cand = dist[v] + d1
                best = cand if best is None else min(best, cand)
        return best

    # -- builders -----------------------------------------------------------

    def rename_vertices(self, mapping: Mapping[str, str]) -> "MetricGraph":
        f = lambda v: mapping.get(v, v)
        return MetricGraph(
            [f(v) for v in self._vertices],
            [Edge(e.id, f(e.u), f(e.v), e.length) for e in self._edges],
            [f(v) for v in self._infinite],
        )

    def with_edge(self, edge: Edge, new_vertices=(), new_infinite=()) -> "MetricGraph":
        return MetricGraph(
            list(self._vertices) + list(new_vertices),
            list(self._edges) + [edge],
            list(self._infinite) + list(new_infinite),
        )

    def refine(self, points: Iterable[Point]) -> tuple["MetricGraph", "Refinement"]:
        """Subdivide edges so that every given point becomes a vertex."""
        cuts: dict[str, set[Fraction]] = {}
        for p in points:
            self.check_point(p)
            if not p.is_vertex:
                cuts.setdefault(p.edge, set()).add(p.offset)
        if not cuts:
            return self, Refinement(self, self, {})
        vertices = list(self._vertices)
        taken = set(vertices)
        edges: list[Edge] = []
        pieces: dict[str, list[tuple[Fraction, Fraction, str]]] = {}
        for e in self._edges:
            if e.id not in cuts:
                edges.append(e)
                continue
            root, base = edge_root(e.id)
            offs = sorted(cuts[e.id])
            names = []
            for o in offs:
                name = f"{root}@{format_rat(base + o)}"
                while name in taken:
                    name += "'"
                taken.add(name)
                names.append(name)
                vertices.append(name)
            ends = [e.u] + names + [e.v]
            stops = [Fraction(0)] + offs + [e.length]
            plist = []
            for i in range(len(stops) - 1):
                a, b = stops[i], stops[i + 1]
                pid = f"{root}[{format_rat(base + a)}:{format_rat(base + b)}]"
                edges.append(Edge(pid, ends[i], ends[i + 1], b - a))
                plist.append((a, b, pid))
            pieces[e.id] = plist
        new = MetricGraph(vertices, edges, self._infinite)
        return new, Refinement(self, new, pieces)

    def smooth_vertex(self, v: str) -> "MetricGraph":
        """Remove a 2-valent vertex, merging its two edges."""
        inc = self._incident[v]
        if len(inc) != 2 or v in self._infinite:
            raise GraphError(f"vertex {v} is not 2-valent")
        e1, e2 = sorted(inc, key=lambda e: e.id)
        a, b = e1.other(v), e2.other(v)
        if a == b:
            raise GraphError(f"smoothing {v} would create a loop edge")
        r1, o1 = edge_root(e1.id)
        r2, o2 = edge_root(e2.id)
        length = e1.length + e2.length if INF not in (e1.length, e2.length) else INF
        if r1 == r2:
            # two pieces of one original edge; keep the original orientation
            first, second = (e1, e2) if o1 < o2 else (e2, e1)
            start = min(o1, o2)
            u, w = first.u, second.v
            full_end = start + length
            eid = f"{r1}[{format_rat(start)}:{format_rat(full_end)}]"
            if start == 0 and _piece_matches_root(r1, full_end, self):
                eid = r1
            merged = Edge(eid, u, w, length)
        else:
            merged = Edge(f"{e1.id}+{e2.id}", a, b, length)
        vertices = [x for x in self._vertices if x != v]
        edges = [e for e in self._edges if e.id not in (e1.id, e2.id)] + [merged]
        return MetricGraph(vertices, edges, self._infinite)

    def smooth_refinements(self) -> "MetricGraph":
        """Undo :meth:`refine`: smooth every 2-valent vertex it created."""
        g = self
        changed = True
        while changed:
            changed = False
            for v in g.vertices:
                if "@" in v and v not in g._infinite and len(g._incident[v]) == 2:
                    e1, e2 = g._incident[v]
                    if edge_root(e1.id)[0] == edge_root(e2.id)[0] and e1.other(v) != e2.other(v):
                        g = g.smooth_vertex(v)
                        changed = True
                        break
        return g

    def subgraph_edges_closed(self, edge_ids: Iterable[str]) -> tuple[set[str], set[str]]:
        ids = set(edge_ids)
        for eid in ids:
            self.edge(eid)
        verts = set()
        for eid in ids:
            e = self.edge(eid)
            verts.update((e.u, e.v))
        return verts, ids

    def is_loop_subgraph(self, edge_ids: Iterable[str]) -> bool:
        """True iff the closure of the given edges is homeomorphic to a circle."""
        verts, ids = self.subgraph_edges_closed(edge_ids)
        if not ids:
            return False
        deg = {v: 0 for v in verts}
        adj = {v: set() for v in verts}
        for eid in ids:
            e = self.edge(eid)
            if e.length is INF:
                return False
            deg[e.u] += 1
            deg[e.v] += 1
            adj[e.u].add(e.v)
            adj[e.v].add(e.u)
        if any(d != 2 for d in deg.values()):
            return False
        start = next(iter(verts))
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == len(verts)

    def is_subtree(self, edge_ids: Iterable[str]) -> bool:
        verts, ids = self.subgraph_edges_closed(edge_ids)
        if not ids:
            return True
        if len(ids) != len(verts) - 1:
            return False
        adj = {v: set() for v in verts}
        for eid in ids:
            e = self.edge(eid)
            adj[e.u].add(e.v)
            adj[e.v].add(e.u)
        start = next(iter(verts))
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == len(verts)


def _piece_matches_root(root: str, end: Fraction, g: MetricGraph) -> bool:
    # A merged piece becomes the root edge again when it spans it completely.
    # The root length is not stored after refinement, so we check that no
    # other piece of the same root remains in the graph.
    for e in g.edges:
        r, _ = edge_root(e.id)
        if r == root and _PIECE_RE.match(e.id):
            m = _PIECE_RE.match(e.id)
            a, b = parse_rat(m.group("a")), parse_rat(m.group("b"))
            if a >= end or b <= Fraction(0):
                return False
    return True


class Refinement:
    """Bijective relabeling of points between a graph and its subdivision."""

    def __init__(self, old: MetricGraph, new: MetricGraph, pieces):
        self.old = old
        self.new = new
        self._pieces = pieces

    def __call__(self, p: Point) -> Point:
        return self.to_new(p)

    def to_new(self, p: Point) -> Point:
        self.old.check_point(p)
        if p.is_vertex or p.edge not in self._pieces:
            return self.new.point(p)
        for a, b, pid in self._pieces[p.edge]:
            if a <= p.offset <= b:
                return self.new.point(pid, p.offset - a)
        raise GraphError(f"point {p} not covered by refinement")

    def to_old(self, p: Point) -> Point:
        self.new.check_point(p)
        if p.is_vertex:
            if self.old.has_vertex(p.vertex):
                return Point(vertex=p.vertex)
            for eid, plist in self._pieces.items():
                for a, b, pid in plist:
                    e = self.new.edge(pid)
                    if e.v == p.vertex:
                        return self.old.point(eid, b)
            raise GraphError(f"vertex {p.vertex} has no preimage")
        for eid, plist in self._pieces.items():
            for a, b, pid in plist:
                if pid == p.edge:
                    return self.old.point(eid, a + p.offset)
        return self.old.point(p)


def genus(g: MetricGraph) -> int:
    return g.genus()


def valence(g: MetricGraph, p: Point) -> int:
    return g.valence(p)


def refine(g: MetricGraph, points: Iterable[Point]):
    return g.refine(points)


def is_tree(g: MetricGraph) -> bool:
    return g.is_tree()


def is_loop_subgraph(g: MetricGraph, edge_ids: Iterable[str]) -> bool:
    return g.is_loop_subgraph(edge_ids)


def circle(length=1, name: str = "c") -> MetricGraph:
    """A circle modelled by two vertices joined by two edges of half length."""
    half = as_rat(length) / 2
    return MetricGraph([f"{name}0", f"{name}1"], [(f"{name}a", f"{name}0", f"{name}1", half), (f"{name}b", f"{name}0", f"{name}1", half)])


def theta(lengths=(1, 2, 3)) -> MetricGraph:
    return MetricGraph(["a", "b"], [(f"t{i}", "a", "b", as_rat(l)) for i, l in enumerate(lengths)])


def path_graph(lengths) -> MetricGraph:
    vs = [f"p{i}" for i in range(len(lengths) + 1)]
    return MetricGraph(vs, [(f"s{i}", vs[i], vs[i + 1], as_rat(l)) for i, l in enumerate(lengths)])
