import random
from fractions import Fraction

import pytest
from oracles import random_integer_graph, unit_subdivision

from tropdiv.divisor import (
    Divisor,
    DivisorError,
    canonical,
    effective_representative,
    has_effective_representative,
    is_reduced,
    linearly_equivalent,
    reduce,
    reduced,
    replay,
)
from tropdiv.metric_graph import INF, MetricGraph, Point, circle


def test_reduce_2m0_at_v2(g0):
    g, m = g0
    out, cert = reduce(Divisor(g, {m["m0"]: 2}), Point(vertex="v2"))
    assert out == Divisor.from_points(g, [Point(vertex="v1"), Point(vertex="v2")])
    assert replay(cert) == out
    assert is_reduced(out, Point(vertex="v2"))


def test_midpoints_are_equivalent(g0):
    g, m = g0
    v = Divisor.from_points(g, [Point(vertex="v1"), Point(vertex="v2")])
    for name in ("m0", "m1", "m2"):
        assert linearly_equivalent(Divisor(g, {m[name]: 2}), v)
    assert not linearly_equivalent(Divisor(g, {m["q1"]: 2}), v)


def test_reduce_is_idempotent_and_reduced(zoo):
    rng = random.Random(11)
    for g in zoo.values():
        for _ in range(5):
            pts = []
            for _ in range(rng.randint(0, 5)):
                e = rng.choice(g.edges)
                pts.append(g.point(e.id, Fraction(rng.randint(1, 15), 16) * e.length))
            d = Divisor.from_points(g, pts)
            q = Point(vertex=rng.choice(g.vertices))
            out, cert = reduce(d, q)
            assert is_reduced(out, q)
            assert reduced(out, q) == out
            assert replay(cert) == out


def test_reduce_non_effective_with_padding(g0):
    g, m = g0
    d = Divisor(g, {m["m1"]: 3, Point(vertex="v1"): -2})
    out, cert = reduce(d, Point(vertex="v2"))
    assert out.degree == 1
    assert is_reduced(out, Point(vertex="v2"))
    assert replay(cert) == out


def test_empty_linear_system(g0):
    g, m = g0
    d = Divisor(g, {m["q1"]: 1, Point(vertex="v1"): -1})
    assert not has_effective_representative(d)
    assert effective_representative(d) is None
    assert not has_effective_representative(Divisor(g, {Point(vertex="v1"): -1}))


def test_canonical_divisor(g0):
    g, _ = g0
    k = canonical(g)
    assert k.degree == 2 * g.genus() - 2
    assert k == Divisor.from_points(g, [Point(vertex="v1"), Point(vertex="v2")])
    assert canonical(circle(2)).degree == 0


def test_divisor_arithmetic(g0):
    g, m = g0
    a = Divisor(g, {m["m0"]: 2})
    b = Divisor(g, {m["m0"]: 1, m["m1"]: 1})
    assert (a - b).degree == 0
    assert (a - a).support() == []
    assert (a + b)[m["m0"]] == 3


def test_base_point_on_infinite_leaf_rejected():
    g = MetricGraph(["a", "b", "x"], [("e", "a", "b", 1), ("f", "a", "b", 2), ("t", "a", "x", INF)], ["x"])
    with pytest.raises(DivisorError):
        reduce(Divisor(g, {Point(vertex="a"): 1}), Point(vertex="x"))
    with pytest.raises(DivisorError):
        Divisor(g, {Point(vertex="x"): 1})


def test_reduction_matches_discrete_oracle():
    """On integer graphs, lattice divisors reduce to the discrete reduced divisor."""
    rng = random.Random(5)
    for _ in range(6):
        vs, es = random_integer_graph(rng)
        g = MetricGraph(vs, es)
        dg = unit_subdivision(es)

        def pt(name):
            if "@" in name:
                eid, k = name.split("@")
                return g.point(eid, int(k))
            return Point(vertex=name)

        for _ in range(10):
            chips = {}
            for _ in range(rng.randint(0, 5)):
                v = rng.choice(dg.vertices)
                chips[v] = chips.get(v, 0) + 1
            q = rng.choice(dg.vertices)
            want = {k: v for k, v in dg.reduce(chips, q).items() if v}
            got = reduced(Divisor(g, {pt(k): v for k, v in chips.items()}), pt(q))
            assert got == Divisor(g, {pt(k): v for k, v in want.items()})
