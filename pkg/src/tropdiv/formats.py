"""Text formats: graph files, divisor expressions, morphism files, reports, DOT."""

from __future__ import annotations

import json
import re
from fractions import Fraction

from .divisor import Divisor
from .divisor import format_divisor as _format_divisor
from .family import G0Spec, GnSpec, Marks, build_g0, build_gn
from .harmonic import GraphMorphism
from .metric_graph import INF, Edge, GraphError, MetricGraph, Point, format_rat, parse_rat

FORMAT_VERSION = 1


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        parts = []
        if line is not None:
            parts.append(f"line {line}")
        if column is not None:
            parts.append(f"column {column}")
        where = ", ".join(parts) + ": " if parts else ""
        super().__init__(where + message)
        self.line = line
        self.column = column


# ---------------------------------------------------------------------------
# graph files
#
#   version 1
#   vertex v1
#   leaf inf0
#   edge e0 v1 v2 2
#   edge x0 v1 inf0 inf
#   mark m0 e0@1
#   family gn n=2 lengths=2,3,5 q1=1/2 q2=1/2 loops=1,1/2
#
# A family stanza builds the graph and its marks; explicit vertex and edge
# lines must then be absent.


class GraphFile:
    def __init__(self, graph: MetricGraph, marks: dict | None = None, family: dict | None = None):
        self.graph = graph
        self.marks = dict(marks or {})
        self.family = family


def _rat_at(text: str, line: int, col: int) -> Fraction:
    try:
        return parse_rat(text)
    except GraphError as exc:
        raise ParseError(str(exc) if text in str(exc) else f"{exc} in {text!r}", line, col) from None


def _rat_list(text, line, col):
    return tuple(_rat_at(x, line, col) for x in text.split(",") if x)


def family_spec(family: dict, n: int | None = None):
    """The G0Spec or GnSpec described by a family stanza (n overrides the stanza)."""
    lengths = family.get("lengths", (Fraction(2), Fraction(3), Fraction(5)))
    base = G0Spec(
        lengths=tuple(lengths),
        q1_offset=family.get("q1", Fraction(1, 2)),
        q2_offset=family.get("q2", Fraction(1, 2)),
    )
    if family.get("kind", "gn") == "g0":
        return base
    nn = n if n is not None else int(family.get("n", 2))
    return GnSpec(base=base, n=nn, loop_lengths=tuple(family.get("loops", ())))


def family_graph(family: dict, n: int | None = None):
    spec = family_spec(family, n)
    equal_ok = bool(family.get("allow_equal", False))
    if isinstance(spec, G0Spec):
        return build_g0(spec, allow_equal_lengths=equal_ok)
    return build_gn(spec, allow_equal_lengths=equal_ok)


def parse_graph(text: str, n: int | None = None) -> GraphFile:
    vertices, leaves, edges, marks = [], [], [], []
    family = None
    version_seen = False
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        cols = [m.start() + 1 for m in re.finditer(r"\S+", raw)]
        head = toks[0]
        if head == "version":
            if len(toks) != 2 or toks[1] != str(FORMAT_VERSION):
                raise ParseError(f"unsupported version {' '.join(toks[1:])}", ln, 1)
            version_seen = True
        elif head == "vertex":
            if len(toks) != 2:
                raise ParseError("expected: vertex NAME", ln, 1)
            vertices.append(toks[1])
        elif head == "leaf":
            if len(toks) != 2:
                raise ParseError("expected: leaf NAME", ln, 1)
            vertices.append(toks[1])
            leaves.append(toks[1])
        elif head == "edge":
            if len(toks) != 5:
                raise ParseError("expected: edge ID U V LENGTH", ln, 1)
            length = INF if toks[4] == "inf" else _rat_at(toks[4], ln, cols[4])
            edges.append(Edge(toks[1], toks[2], toks[3], length))
        elif head == "mark":
            if len(toks) != 3:
                raise ParseError("expected: mark NAME POINT", ln, 1)
            marks.append((toks[1], toks[2], ln, cols[2]))
        elif head == "family":
            if len(toks) < 2 or toks[1] not in ("g0", "gn"):
                raise ParseError("expected: family g0|gn KEY=VALUE...", ln, 1)
            family = {"kind": toks[1]}
            for tok, col in zip(toks[2:], cols[2:]):
                if "=" not in tok:
                    raise ParseError(f"expected KEY=VALUE, got {tok!r}", ln, col)
                key, val = tok.split("=", 1)
                if key == "n":
                    if not val.isdigit():
                        raise ParseError(f"n must be a non-negative integer, got {val!r}", ln, col)
                    family["n"] = int(val)
                elif key in ("lengths", "loops"):
                    family[key] = _rat_list(val, ln, col)
                elif key in ("q1", "q2"):
                    family[key] = _rat_at(val, ln, col)
                elif key == "allow_equal":
                    family[key] = val in ("1", "true", "yes")
                else:
                    raise ParseError(f"unknown family key {key!r}", ln, col)
        else:
            raise ParseError(f"unknown directive {head!r}", ln, 1)
    if not version_seen:
        raise ParseError("missing 'version 1' line", 1, 1)
    if family is not None:
        if vertices or edges:
            raise ParseError("a family stanza cannot be combined with vertex or edge lines")
        g, fam_marks = family_graph(family, n)
        out = dict(fam_marks.points)
    else:
        g = MetricGraph(vertices, edges, leaves)
        out = {v: Point(vertex=v) for v in g.vertices}
    for name, where, ln, col in marks:
        out[name] = parse_point(g, where, out, ln, col)
    return GraphFile(g, out, family)


def parse_point(g: MetricGraph, text: str, names: dict, line=None, column=None) -> Point:
    if text in names:
        return names[text]
    if "@" in text:
        eid, off = text.split("@", 1)
        if not g.has_edge(eid):
            raise GraphError(f"unknown edge {eid!r}")
        return g.point(eid, _rat_at(off, line, column))
    if g.has_vertex(text):
        return Point(vertex=text)
    raise GraphError(f"unknown point {text!r}")


def emit_graph(g: MetricGraph, marks: dict | None = None) -> str:
    lines = [f"version {FORMAT_VERSION}"]
    for v in sorted(g.vertices):
        lines.append(("leaf " if v in g.infinite_leaves else "vertex ") + v)
    for e in sorted(g.edges, key=lambda e: e.id):
        lines.append(f"edge {e.id} {e.u} {e.v} {format_rat(e.length)}")
    for name, p in sorted((marks or {}).items()):
        if p.is_vertex and p.vertex == name:
            continue
        lines.append(f"mark {name} {p}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# divisor expressions: "2*m0 - v1 + e1@3/4"

_TERM = re.compile(r"\s*([+-])?\s*(?:(\d+)\s*\*\s*)?([A-Za-z_][\w~.|\[\]:/@]*)\s*")


def parse_divisor(g: MetricGraph, text: str, names: dict | None = None) -> Divisor:
    names = names or {}
    pos = 0
    coeffs: dict = {}
    first = True
    text = text.strip()
    if text in ("0", ""):
        return Divisor(g, {})
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"cannot parse divisor at {text[pos:]!r}", column=pos + 1)
        sign, k, name = m.groups()
        if sign is None and not first:
            raise ParseError("expected '+' or '-'", column=m.start(3) + 1)
        end = m.end()
        coef = int(k) if k else 1
        if sign == "-":
            coef = -coef
        try:
            p = parse_point(g, name, names, None, m.start(3) + 1)
        except GraphError as exc:
            if str(exc).startswith("unknown"):
                raise ParseError(str(exc), column=m.start(3) + 1) from None
            raise
        coeffs[p] = coeffs.get(p, 0) + coef
        pos = end
        while pos < len(text) and text[pos] == " ":
            pos += 1
        first = False
    return Divisor(g, coeffs)


def format_divisor(d: Divisor, names: dict | None = None) -> str:
    """Divisor text; ``names`` maps points to mark names."""
    return _format_divisor(d, names)


# ---------------------------------------------------------------------------
# morphism files
#
#   version 1
#   [source]
#   ...graph lines...
#   [target]
#   ...graph lines...
#   [map]
#   vertex a b
#   edge e f forward 2
#   edge e - collapsed 0


def parse_morphism(text: str) -> GraphMorphism:
    sections = {"source": [], "target": [], "map": []}
    cur = None
    header = []
    for raw in text.splitlines():
        s = raw.strip()
        if s in ("[source]", "[target]", "[map]"):
            cur = s[1:-1]
            continue
        (sections[cur] if cur else header).append(raw)
    src = parse_graph("\n".join(sections["source"])).graph
    tgt = parse_graph("\n".join(sections["target"])).graph
    vmap, emap, dil = {}, {}, {}
    for ln, raw in enumerate(sections["map"], 1):
        toks = raw.split("#", 1)[0].split()
        if not toks:
            continue
        if toks[0] == "vertex" and len(toks) == 3:
            vmap[toks[1]] = toks[2]
        elif toks[0] == "edge" and len(toks) == 5:
            if toks[3] == "collapsed":
                emap[toks[1]] = (None, False)
            elif toks[3] in ("forward", "reversed"):
                emap[toks[1]] = (toks[2], toks[3] == "reversed")
            else:
                raise ParseError(f"orientation must be forward, reversed or collapsed", ln)
            if not toks[4].isdigit():
                raise ParseError(f"dilation must be a non-negative integer", ln)
            dil[toks[1]] = int(toks[4])
        else:
            raise ParseError(f"cannot parse map line {raw.strip()!r}", ln)
    return GraphMorphism(src, tgt, vmap, emap, dil)


def emit_morphism(m: GraphMorphism) -> str:
    out = ["version 1", "[source]", emit_graph(m.source).rstrip(), "[target]", emit_graph(m.target).rstrip(), "[map]"]
    for v in sorted(m.vertex_map):
        out.append(f"vertex {v} {m.vertex_map[v]}")
    for e in sorted(m.edge_map):
        te, rev = m.edge_map[e]
        if te is None:
            out.append(f"edge {e} - collapsed {m.dilation[e]}")
        else:
            out.append(f"edge {e} {te} {'reversed' if rev else 'forward'} {m.dilation[e]}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# reports


def _plain(x):
    if isinstance(x, GraphMorphism):
        return emit_morphism(x)
    if isinstance(x, (Divisor, Point)):
        return str(x)
    if isinstance(x, Fraction):
        return format_rat(x)
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if x is INF:
        return "inf"
    return x


def report_dict(result, seed: int, budgets: dict, counterexamples=None, work: dict | None = None) -> dict:
    d = result.to_dict() if hasattr(result, "to_dict") else dict(result)
    d = _plain(d)
    d["witnesses"] = _plain([_plain(w) for w in result.witnesses]) if hasattr(result, "witnesses") else d.get("witnesses", [])
    d["counterexamples"] = _plain(counterexamples or [])
    d["seed"] = seed
    d["budgets"] = _plain(budgets)
    if work is not None:
        d["work"] = _plain(work)
    return d


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def report_text(report: dict) -> str:
    lines = [f"=== {report.get('claim', 'result')} ==="]
    lines.append(f"mode: {report.get('mode')}")
    verdict = report.get("verdict")
    lines.append(f"verdict: {str(verdict).lower() if isinstance(verdict, bool) else verdict}")
    lines.append(f"seed: {report.get('seed')}")
    for k, v in sorted((report.get("budgets") or {}).items()):
        lines.append(f"budget {k}: {v}")
    if report.get("sampling"):
        lines.append(f"sampling: {report['sampling']}")
    for w in report.get("witnesses") or []:
        lines.append("witness: " + (json.dumps(w, sort_keys=True) if not isinstance(w, str) else w.replace("\n", "\n  ")))
    for c in report.get("counterexamples") or []:
        lines.append("counterexample: " + (json.dumps(c, sort_keys=True) if not isinstance(c, str) else c))
    details = report.get("details") or {}
    for k in sorted(details):
        if k == "rejections":
            lines.append(f"rejections: {len(details[k])} records (see JSON report)")
            continue
        lines.append(f"{k}: {json.dumps(details[k], sort_keys=True)}")
    lines.append("=== end ===")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# DOT


def emit_dot(g: MetricGraph, name: str = "G") -> str:
    lines = [f"graph {_dot_id(name)} {{"]
    for v in sorted(g.vertices):
        shape = "point" if v in g.infinite_leaves else "circle"
        lines.append(f"  {_dot_id(v)} [shape={shape}];")
    for e in sorted(g.edges, key=lambda e: e.id):
        lines.append(f"  {_dot_id(e.u)} -- {_dot_id(e.v)} [label={_dot_id(e.id + ' : ' + format_rat(e.length))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_id(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'
