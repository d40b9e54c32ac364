"""Divisors on metric graphs, reduced divisors and linear equivalence.

Reduction runs the metric burning algorithm on a working subdivision whose
nodes are the model vertices, the support of the divisor and the base point.
All positions are scaled to integers by the common denominator of the data,
so every firing amount is an exact integer number of units.

When the burn from ``q`` stalls, the maximal unburnt closed set fires by the
length of its shortest boundary segment.  Chips leaving the set land on
existing nodes or on new interior points, which become nodes for the next
round.  The firing events are kept in a :class:`ReductionCertificate` and can
be replayed with :func:`replay`, which recomputes each event's chip moves
from the geometry of the fired set alone.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping

from .metric_graph import INF, GraphError, MetricGraph, Point, format_rat


class DivisorError(ValueError):
    """Domain errors: points off the finite part, negative coefficients where forbidden."""


class Divisor:
    """A finite integer combination of points of a metric graph."""

    __slots__ = ("graph", "_coeffs", "_key")

    def __init__(self, graph: MetricGraph, coeffs: Mapping[Point, int] | None = None):
        self.graph = graph
        clean: dict[Point, int] = {}
        for p, k in (coeffs or {}).items():
            if not isinstance(k, int):
                raise DivisorError(f"coefficient of {p} must be an integer")
            if k == 0:
                continue
            try:
                p = graph.point(p)
            except GraphError as exc:
                raise DivisorError(str(exc)) from None
            if not graph.is_finite_point(p):
                raise DivisorError(f"divisor support {p} lies on an infinite edge")
            clean[p] = clean.get(p, 0) + k
        self._coeffs = {p: k for p, k in clean.items() if k != 0}
        self._key = None

    @classmethod
    def from_points(cls, graph: MetricGraph, points: Iterable[Point]) -> "Divisor":
        return cls(graph, Counter(points))

    def __getitem__(self, p: Point) -> int:
        return self._coeffs.get(p, 0)

    def items(self) -> list[tuple[Point, int]]:
        return sorted(self._coeffs.items(), key=lambda kv: kv[0].sort_key())

    def support(self) -> list[Point]:
        return [p for p, _ in self.items()]

    def points(self) -> list[Point]:
        """Support listed with multiplicity (effective divisors only)."""
        out = []
        for p, k in self.items():
            if k < 0:
                raise DivisorError("points() needs an effective divisor")
            out.extend([p] * k)
        return out

    @property
    def degree(self) -> int:
        return sum(self._coeffs.values())

    def is_effective(self) -> bool:
        return all(k > 0 for k in self._coeffs.values())

    def is_effective_away_from(self, q: Point) -> bool:
        return all(k > 0 for p, k in self._coeffs.items() if p != q)

    def key(self):
        if self._key is None:
            self._key = tuple((p.sort_key(), k) for p, k in self.items())
        return self._key

    def _combine(self, other: "Divisor", sign: int) -> "Divisor":
        if other.graph is not self.graph and other.graph != self.graph:
            raise DivisorError("divisors live on different graphs")
        c = dict(self._coeffs)
        for p, k in other._coeffs.items():
            c[p] = c.get(p, 0) + sign * k
        return Divisor._trusted(self.graph, c)

    @classmethod
    def _trusted(cls, graph, coeffs) -> "Divisor":
        d = cls.__new__(cls)
        d.graph = graph
        d._coeffs = {p: k for p, k in coeffs.items() if k != 0}
        d._key = None
        return d

    def __add__(self, other):
        if isinstance(other, Point):
            other = Divisor(self.graph, {other: 1})
        return self._combine(other, 1)

    def __sub__(self, other):
        if isinstance(other, Point):
            other = Divisor(self.graph, {other: 1})
        return self._combine(other, -1)

    def __neg__(self):
        return Divisor._trusted(self.graph, {p: -k for p, k in self._coeffs.items()})

    def __mul__(self, k: int):
        return Divisor._trusted(self.graph, {p: k * c for p, c in self._coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Divisor) and self.key() == other.key() and (other.graph is self.graph or other.graph == self.graph)

    def __hash__(self):
        return hash(self.key())

    def __str__(self):
        return format_divisor(self)

    def __repr__(self):
        return f"Divisor({self})"


def format_divisor(d: Divisor, names: Mapping[Point, str] | None = None) -> str:
    if not d._coeffs:
        return "0"
    names = names or {}
    parts = []
    for p, k in d.items():
        label = names.get(p, str(p))
        mag = abs(k)
        term = label if mag == 1 else f"{mag}*{label}"
        if not parts:
            parts.append(term if k > 0 else f"-{term}")
        else:
            parts.append(f"+ {term}" if k > 0 else f"- {term}")
    return " ".join(parts)


def degree(d: Divisor) -> int:
    return d.degree


def canonical(g: MetricGraph) -> Divisor:
    """Sum of (valence - 2) p over the vertices of the finite part."""
    f = g.finite_part()
    coeffs = {}
    for v in f.vertices:
        k = f.vertex_valence(v) - 2
        if k:
            coeffs[Point(vertex=v)] = k
    return Divisor(g, coeffs)


# ---------------------------------------------------------------------------
# integer working frame


class _Frame:
    """Finite part of a graph scaled to integer units."""

    def __init__(self, f: MetricGraph, scale: int):
        self.graph = f
        self.scale = scale
        self.length = {e.id: int(e.length * scale) for e in f.edges}
        self.edges = f.edges
        self.vertices = f.vertices
        base = {v: [] for v in f.vertices}
        for e in f.edges:
            ln = self.length[e.id]
            base[e.u].append((e.v, ln, e.id, 0, ln))
            base[e.v].append((e.u, ln, e.id, ln, 0))
        self._base = base
        self._keys: dict = {}
        self._points: dict = {}

    @classmethod
    def of(cls, g: MetricGraph, points: Iterable[Point]) -> "_Frame":
        f = g.finite_part()
        scale = f.denominator()
        for p in points:
            if not p.is_vertex:
                scale = lcm(scale, p.offset.denominator)
        cache = f.__dict__.setdefault("_frames", {})
        fr = cache.get(scale)
        if fr is None:
            fr = cache[scale] = cls(f, scale)
        return fr

    def key(self, p: Point):
        k = self._keys.get(p)
        if k is not None:
            return k
        if p.is_vertex:
            k = p.vertex
        else:
            off = p.offset * self.scale
            if off.denominator != 1:
                raise DivisorError(f"point {p} not on the working grid")
            k = (p.edge, int(off))
        self._keys[p] = k
        return k

    def point(self, key) -> Point:
        p = self._points.get(key)
        if p is None:
            if isinstance(key, str):
                p = Point(vertex=key)
            else:
                eid, off = key
                p = self.graph.point(eid, Fraction(off, self.scale))
            self._points[key] = p
        return p

    def adjacency(self, interior: Mapping[str, Iterable[int]]):
        if not interior:
            return self._base
        adj = dict(self._base)
        touched = set()
        for eid in interior:
            e = self.graph.edge(eid)
            for w in (e.u, e.v):
                if w not in touched:
                    touched.add(w)
                    adj[w] = [x for x in adj[w] if x[2] not in interior]
        for eid, offs in interior.items():
            e = self.graph.edge(eid)
            offs = sorted(set(offs))
            seq = [(0, e.u)] + [(o, (eid, o)) for o in offs] + [(self.length[eid], e.v)]
            for o, k in seq[1:-1]:
                adj[k] = []
            for (oa, ka), (ob, kb) in zip(seq, seq[1:]):
                adj[ka].append((kb, ob - oa, eid, oa, ob))
                adj[kb].append((ka, ob - oa, eid, ob, oa))
        return adj


def _interior_offsets(chips: Mapping, extra=()) -> dict[str, list[int]]:
    out: dict[str, list[int]] = {}
    for k in list(chips) + list(extra):
        if isinstance(k, tuple):
            out.setdefault(k[0], []).append(k[1])
    return out


def _burn(adj, chips: Mapping, qkey) -> set:
    burnt = {qkey}
    stack = [qkey]
    hits: dict = {}
    while stack:
        x = stack.pop()
        for y, *_ in adj[x]:
            if y in burnt:
                continue
            h = hits.get(y, 0) + 1
            hits[y] = h
            if h > chips.get(y, 0):
                burnt.add(y)
                stack.append(y)
    return burnt


@dataclass(frozen=True)
class FiringEvent:
    """Fire the closed set (points plus full segments) by ``eps``."""

    points: tuple[Point, ...]
    segments: tuple[tuple[str, Fraction, Fraction], ...]
    eps: Fraction


@dataclass
class ReductionCertificate:
    input: Divisor
    base: Point
    output: Divisor
    events: list[FiringEvent] = field(default_factory=list)
    padding: int = 0

    def to_dict(self) -> dict:
        return {
            "input": str(self.input),
            "base": str(self.base),
            "output": str(self.output),
            "padding": self.padding,
            "events": [
                {
                    "points": [str(p) for p in ev.points],
                    "segments": [[e, format_rat(a), format_rat(b)] for e, a, b in ev.segments],
                    "eps": format_rat(ev.eps),
                }
                for ev in self.events
            ],
        }


_MAX_ROUNDS = 200_000


def _reduce_chips(frame: _Frame, chips: dict, qkey, events: list | None):
    """q-reduce integer chip data in place.  Chips must be >= 0 away from qkey."""
    for _ in range(_MAX_ROUNDS):
        adj = frame.adjacency(_interior_offsets(chips, [qkey]))
        burnt = _burn(adj, chips, qkey)
        if len(burnt) == len(adj):
            return chips
        unburnt = [k for k in adj if k not in burnt]
        exits = []
        for a in unburnt:
            for b, ln, eid, oa, ob in adj[a]:
                if b in burnt:
                    exits.append((a, ln, eid, oa, ob))
        eps = min(x[1] for x in exits)
        if events is not None:
            uset = set(unburnt)
            segs = set()
            for a in unburnt:
                for b, ln, eid, oa, ob in adj[a]:
                    if b in uset:
                        segs.add((eid, min(oa, ob), max(oa, ob)))
            events.append((tuple(unburnt), tuple(sorted(segs)), eps))
        for a, ln, eid, oa, ob in exits:
            chips[a] -= 1
            if chips[a] == 0 and a != qkey:
                del chips[a]
            off = oa + eps if ob > oa else oa - eps
            if off == 0:
                land = frame.graph.edge(eid).u
            elif off == frame.length[eid]:
                land = frame.graph.edge(eid).v
            else:
                land = (eid, off)
            chips[land] = chips.get(land, 0) + 1
    raise RuntimeError("reduction did not terminate")


def _to_chips(frame: _Frame, d: Divisor) -> dict:
    return {frame.key(p): k for p, k in d._coeffs.items()}


def _from_chips(frame: _Frame, g: MetricGraph, chips: Mapping) -> Divisor:
    return Divisor._trusted(g, {frame.point(k): c for k, c in chips.items() if c})


def _events_to_points(frame: _Frame, raw) -> list[FiringEvent]:
    out = []
    s = frame.scale
    for keys, segs, eps in raw:
        pts = tuple(sorted((frame.point(k) for k in keys), key=Point.sort_key))
        out.append(
            FiringEvent(
                pts,
                tuple((e, Fraction(a, s), Fraction(b, s)) for e, a, b in segs),
                Fraction(eps, s),
            )
        )
    return out


def is_reduced(d: Divisor, q: Point) -> bool:
    """Burning test: True iff fire started at ``q`` burns the whole finite part."""
    q = d.graph.check_point(q)
    for p, k in d._coeffs.items():
        if p != q and k < 0:
            raise DivisorError(f"divisor is negative at {p} != {q}")
    frame = _Frame.of(d.graph, list(d._coeffs) + [q])
    chips = _to_chips(frame, d)
    qkey = frame.key(q)
    adj = frame.adjacency(_interior_offsets(chips, [qkey]))
    return len(_burn(adj, chips, qkey)) == len(adj)


def reduce(d: Divisor, q: Point, certify: bool = True):
    """Return the q-reduced divisor linearly equivalent to ``d`` and its certificate.

    Divisors negative away from ``q`` are first padded with ``k q`` so that
    their degree reaches the genus, turned effective by subtracting the
    negative part one point at a time (each subtraction preceded by a
    reduction at that point), reduced at ``q``, and finally unpadded.
    """
    g = d.graph
    q = g.check_point(q)
    if not g.is_finite_point(q):
        raise DivisorError("base point must lie on the finite part")
    negatives = [(p, -k) for p, k in d.items() if p != q and k < 0]
    frame = _Frame.of(g, list(d._coeffs) + [q])
    qkey = frame.key(q)
    raw = [] if certify else None
    padding = 0
    if not negatives:
        chips = _to_chips(frame, d)
        _reduce_chips(frame, chips, qkey, raw)
    else:
        cq = d[q]
        positive = {frame.key(p): k for p, k in d._coeffs.items() if k > 0 and p != q}
        deg_away = d.degree - cq
        padding = max(0, g.finite_part().genus() - deg_away)
        chips = dict(positive)
        if padding:
            chips[qkey] = chips.get(qkey, 0) + padding
        for p, mult in negatives:
            pkey = frame.key(p)
            for _ in range(mult):
                _reduce_chips(frame, chips, pkey, raw)
                if chips.get(pkey, 0) < 1:
                    raise RuntimeError("padding failed to make the class effective")
                chips[pkey] -= 1
                if chips[pkey] == 0:
                    del chips[pkey]
        _reduce_chips(frame, chips, qkey, raw)
        chips[qkey] = chips.get(qkey, 0) - padding + cq
    out = _from_chips(frame, g, chips)
    if not certify:
        return out
    cert = ReductionCertificate(d, q, out, _events_to_points(frame, raw), padding)
    return out, cert


def reduced(d: Divisor, q: Point) -> Divisor:
    """Shortcut for ``reduce(d, q)`` without building a certificate."""
    return reduce(d, q, certify=False)


def base_point(g: MetricGraph) -> Point:
    """Deterministic base point: the lexicographically smallest finite vertex."""
    return Point(vertex=min(g.finite_part().vertices))


def linearly_equivalent(d1: Divisor, d2: Divisor) -> bool:
    if d1.graph is not d2.graph and d1.graph != d2.graph:
        raise DivisorError("divisors live on different graphs")
    if d1.degree != d2.degree:
        return False
    q = base_point(d1.graph)
    return reduced(d1, q) == reduced(d2, q)


def has_effective_representative(d: Divisor) -> bool:
    """True iff the complete linear system |d| is non-empty."""
    if d.degree < 0:
        return False
    if d.is_effective():
        return True
    neg = [p for p, k in d.items() if k < 0]
    q = neg[0]
    return reduced(d, q)[q] >= 0


def effective_representative(d: Divisor) -> Divisor | None:
    if not has_effective_representative(d):
        return None
    if d.is_effective():
        return d
    neg = [p for p, k in d.items() if k < 0]
    return reduced(d, neg[0])


# ---------------------------------------------------------------------------
# certificate replay


def _edge_position(g: MetricGraph, p: Point, eid: str):
    e = g.edge(eid)
    if p.is_vertex:
        if p.vertex == e.u:
            return Fraction(0)
        if p.vertex == e.v:
            return e.length
        return None
    return p.offset if p.edge == eid else None


def event_divisor(g: MetricGraph, ev: FiringEvent) -> Divisor:
    """Divisor of the function min(eps, dist(x, A)) for the fired closed set A.

    Computed directly from the closed set: every tangent direction at a point
    of A that does not run along a segment of A carries one chip a distance
    ``eps`` out of A.  Raises if the strips of width ``eps`` collide with A,
    with each other, or leave the edge, in which case the event is not a
    single elementary firing.
    """
    f = g.finite_part()
    pset = set(ev.points)
    seg_by_edge: dict[str, list[tuple[Fraction, Fraction]]] = {}
    for eid, a, b in ev.segments:
        seg_by_edge.setdefault(eid, []).append((a, b))
    strips: dict[str, list[tuple[Fraction, Fraction]]] = {}
    coeffs: dict[Point, int] = {}
    for p in ev.points:
        for td in f.tangent_directions(p):
            e = f.edge(td.edge)
            pos = _edge_position(f, p, e.id)
            forward = td.toward == e.v
            inside = any((forward and a == pos) or (not forward and b == pos) for a, b in seg_by_edge.get(e.id, ()))
            if inside:
                continue
            land = pos + ev.eps if forward else pos - ev.eps
            if land < 0 or land > e.length:
                raise DivisorError(f"firing strip leaves edge {e.id}")
            lo, hi = (pos, land) if forward else (land, pos)
            for a, b in seg_by_edge.get(e.id, ()):
                if a < hi and b > lo:
                    raise DivisorError("firing strip overlaps the fired set")
            for other in ev.points:
                op = _edge_position(f, other, e.id)
                if op is not None and lo < op < hi:
                    raise DivisorError("firing strip crosses the fired set")
                if op is not None and op == land and other != p:
                    raise DivisorError("firing strip lands on the fired set")
            for a, b in strips.get(e.id, ()):
                if a < hi and b > lo:
                    raise DivisorError("firing strips overlap")
            strips.setdefault(e.id, []).append((lo, hi))
            coeffs[p] = coeffs.get(p, 0) - 1
            lp = f.point(e.id, land)
            coeffs[lp] = coeffs.get(lp, 0) + 1
    return Divisor(g, coeffs)


def replay(cert: ReductionCertificate) -> Divisor:
    """Apply the certificate's firing events to its input divisor."""
    d = cert.input
    g = d.graph
    for ev in cert.events:
        d = d + event_divisor(g, ev)
    return d
