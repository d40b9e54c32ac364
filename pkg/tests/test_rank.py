import random
from fractions import Fraction

import pytest
from oracles import random_integer_graph, unit_subdivision

from tropdiv.divisor import Divisor, DivisorError, canonical
from tropdiv.family import GnSpec, build_gn
from tropdiv.metric_graph import MetricGraph, Point, circle, theta
from tropdiv.rank import (
    EXACT,
    SAMPLED,
    SearchBudget,
    clifford_index,
    graph_clifford_index,
    is_very_special,
    no_g12_exact,
    no_grd_exists,
    rank,
    rank_at_least,
    riemann_roch_check,
    sampling_grid,
    wrd_value,
)


def test_rank_examples_on_g0(g0):
    g, m = g0
    v1, v2 = Point(vertex="v1"), Point(vertex="v2")
    assert rank(Divisor.from_points(g, [v1, v2])) == 1
    assert rank(Divisor.from_points(g, [v1, m["q1"]])) == 0
    assert rank(Divisor(g, {v1: -1})) == -1
    assert rank(Divisor(g, {})) == 0
    assert rank(canonical(g)) == 1


def test_rank_on_circle():
    c = circle(1)
    p = c.point("ca", Fraction(1, 7))
    assert rank(Divisor(c, {p: 1})) == 0
    assert rank(Divisor(c, {p: 3})) == 2
    assert rank_at_least(Divisor(c, {p: 3}), 2)
    assert not rank_at_least(Divisor(c, {p: 3}), 3)


def test_rank_matches_discrete_oracle_small():
    rng = random.Random(2)
    for _ in range(4):
        vs, es = random_integer_graph(rng)
        g = MetricGraph(vs, es)
        dg = unit_subdivision(es)
        for _ in range(8):
            chips = {}
            for _ in range(rng.randint(0, 5)):
                v = rng.choice(dg.vertices)
                chips[v] = chips.get(v, 0) + 1
            pts = {}
            for k, v in chips.items():
                p = g.point(k.split("@")[0], int(k.split("@")[1])) if "@" in k else Point(vertex=k)
                pts[p] = v
            assert rank(Divisor(g, pts)) == dg.rank(chips)


def test_riemann_roch_on_theta():
    g = theta((1, 2, 3))
    rng = random.Random(4)
    for _ in range(10):
        pts = [g.point(f"t{rng.randrange(3)}", Fraction(rng.randint(1, 7), 8)) for _ in range(rng.randint(0, 4))]
        assert riemann_roch_check(Divisor.from_points(g, pts))


def test_very_special_and_clifford(g0, g2):
    g, _ = g0
    d = Divisor.from_points(g, [Point(vertex="v1"), Point(vertex="v2")])
    # genus 2: rank 1 equals deg - g + 1, so the canonical g^1_2 is not very special
    assert not is_very_special(d)
    banana = MetricGraph(["a", "b"], [(f"b{i}", "a", "b", i + 1) for i in range(4)])
    h2 = Divisor.from_points(banana, [Point(vertex="a"), Point(vertex="b")])
    assert is_very_special(h2)
    assert clifford_index(h2) == 0
    h, m = g2
    e = Divisor.from_points(h, [m["q0"], m["q0"], m["q1"], m["q1"]])
    assert rank(e) == 1
    assert is_very_special(e)
    assert clifford_index(e) == 2
    with pytest.raises(DivisorError):
        clifford_index(Divisor(g, {Point(vertex="v1"): 1}))


def test_no_grd_trivial_cases(g0):
    g, _ = g0
    assert no_grd_exists(g, 3, 2).mode == EXACT
    res = no_grd_exists(g, 1, 4)
    assert res.mode == EXACT and not res.verdict


def test_g0_is_hyperelliptic(g0):
    g, _ = g0
    res = no_g12_exact(g)
    assert res.mode == EXACT
    assert not res.verdict
    assert all(rank(w) >= 1 for w in res.witnesses)


def test_g2_has_no_g12(g2):
    g, _ = g2
    res = no_g12_exact(g)
    assert res.mode == EXACT and res.verdict


def test_grid_search_finds_a_g12_on_theta():
    g = theta((1, 2, 3))
    res = no_grd_exists(g, 1, 2, SearchBudget(random_points=0))
    assert not res.verdict
    assert rank(res.witnesses[0]) >= 1


def test_sampling_grid_is_deterministic(g2):
    g, _ = g2
    assert sampling_grid(g, 4, 5, 1) == sampling_grid(g, 4, 5, 1)
    assert sampling_grid(g, 4, 5, 1) != sampling_grid(g, 4, 5, 2)


def test_wrd_on_a_circle():
    # every point of a circle lies under a divisor of degree 2 and rank 1, and so does any pair
    c = circle(2)
    res = wrd_value(c, 1, 2, SearchBudget(grid_denominator=2, random_points=0))
    assert res.mode == SAMPLED
    assert res.details["lower"] >= 1


def test_clifford_index_of_g2(g2):
    g, m = g2
    res = graph_clifford_index(g, SearchBudget(random_points=0), marks=m)
    assert res.verdict
    assert res.details["value"] == 2
