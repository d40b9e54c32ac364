import random
from fractions import Fraction

import pytest

from tropdiv.family import GnSpec, build_g0, build_gn
from tropdiv.metric_graph import INF, Edge, GraphError, MetricGraph, Point, circle, genus, is_tree, path_graph, refine, theta, valence


def test_valence_on_g0(g0):
    g, m = g0
    assert valence(g, Point(vertex="v1")) == 3
    assert valence(g, g.point("e0", Fraction(1, 3))) == 2
    assert valence(g, m["m2"]) == 2


def test_valence_on_circle():
    c = circle(1)
    for p in (Point(vertex="c0"), c.point("ca", Fraction(1, 5))):
        assert valence(c, p) == 2


def test_genus_examples():
    assert genus(build_g0()[0]) == 2
    assert genus(path_graph([1, 2])) == 0
    assert is_tree(path_graph([1, 2]))
    assert genus(build_gn(GnSpec(n=6))[0]) == 9


def test_refine_keeps_genus_and_lengths(g0):
    g, m = g0
    r, ref = refine(g, [m["m0"]])
    assert r.genus() == 2
    assert r.total_length() == g.total_length()
    assert valence(r, ref.to_new(m["m0"])) == 2
    assert ref.to_old(ref.to_new(m["m0"])) == m["m0"]


def test_refine_empty_is_identity(g0):
    g, _ = g0
    r, _ = refine(g, [])
    assert r == g


def test_refine_circle_at_a_third():
    c = circle(1)
    p = c.point("ca", Fraction(1, 3))
    r, ref = refine(c, [p])
    new = ref.to_new(p)
    assert new.is_vertex
    assert r.distance(Point(vertex="c0"), new) == Fraction(1, 3)
    assert r.distance(Point(vertex="c1"), new) == Fraction(1, 6)
    assert sorted(e.length for e in r.edges) == [Fraction(1, 6), Fraction(1, 3), Fraction(1, 2)]


def test_loop_and_tree_predicates(g0):
    g, _ = g0
    assert g.is_loop_subgraph(["e0", "e1"])
    assert not g.is_loop_subgraph(["e0", "e1", "e2"])
    single = path_graph([3])
    assert single.is_tree()


def test_edges_need_distinct_ends():
    with pytest.raises(GraphError):
        MetricGraph(["a"], [("e", "a", "a", 1)])


def test_infinite_edges_need_a_leaf():
    with pytest.raises(GraphError):
        MetricGraph(["a", "b"], [("e", "a", "b", INF)])
    g = MetricGraph(["a", "b", "x"], [("e", "a", "b", 1), ("f", "a", "b", 2), ("t", "a", "x", INF)], ["x"])
    assert g.genus() == 1
    assert g.finite_part().genus() == 1


def test_points_are_canonical(g0):
    g, _ = g0
    assert g.point("e0", 0) == Point(vertex="v1")
    assert g.point("e0", 2) == Point(vertex="v2")
    with pytest.raises(GraphError):
        g.point("e0", 3)


def test_disconnected_rejected():
    with pytest.raises(GraphError):
        MetricGraph(["a", "b", "c", "d"], [Edge("e", "a", "b", Fraction(1)), Edge("f", "c", "d", Fraction(1))])


def test_distance_is_a_metric():
    g = theta((1, 2, 3))
    rng = random.Random(3)
    pts = [Point(vertex="a"), Point(vertex="b")]
    for _ in range(12):
        e = rng.choice(g.edges)
        pts.append(g.point(e.id, Fraction(rng.randint(1, 7), 8) * e.length))
    for p in pts:
        assert g.distance(p, p) == 0
        for q in pts:
            assert g.distance(p, q) == g.distance(q, p)
            for s in pts:
                assert g.distance(p, s) <= g.distance(p, q) + g.distance(q, s)


def test_refinement_preserves_distances():
    g = theta((1, 2, 3))
    pts = [g.point("t1", Fraction(1, 2)), g.point("t2", Fraction(5, 4)), Point(vertex="a")]
    r, ref = refine(g, pts[:2])
    for p in pts:
        for q in pts:
            assert r.distance(ref.to_new(p), ref.to_new(q)) == g.distance(p, q)
