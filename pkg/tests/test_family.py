from fractions import Fraction

import pytest

from tropdiv.divisor import Divisor, linearly_equivalent
from tropdiv.family import (
    FamilyError,
    G0Spec,
    GnSpec,
    build_g0,
    build_gn,
    degree4_witness,
    elementary_tropical_modification,
    enumerate_modifications,
    loop_length,
    loop_point,
    modification_sites,
    retract,
)
from tropdiv.metric_graph import Point
from tropdiv.rank import rank


def test_g0_shape(g0):
    g, m = g0
    assert g.genus() == 2
    assert len(g.edges) == 3
    assert m["m1"] == g.point("e1", Fraction(3, 2))
    assert m["q1"] == g.point("e1", Fraction(1, 2))


def test_g0_needs_distinct_lengths():
    with pytest.raises(FamilyError):
        build_g0(G0Spec(lengths=(Fraction(2), Fraction(2), Fraction(3))))
    g, _ = build_g0(G0Spec(lengths=(Fraction(2), Fraction(2), Fraction(2))), allow_equal_lengths=True)
    assert g.genus() == 2


@pytest.mark.parametrize("n", [1, 2, 3, 6])
def test_gn_genus(n):
    g, m = build_gn(GnSpec(n=n))
    assert g.genus() == n + 3
    for i in range(n + 1):
        assert loop_length(g, m, i) == 1
        assert g.valence(m[f"q{i}"]) == 4


def test_gn_rejects_bad_n():
    with pytest.raises(FamilyError):
        build_gn(GnSpec(n=0))


def test_marks_are_distinct():
    g, m = build_gn(GnSpec(n=5))
    qs = [m[f"q{i}"] for i in range(6)]
    assert len(set(qs)) == 6


def test_loop_pairs_are_equivalent_to_double_attachment(g2):
    g, m = g2
    for i in range(3):
        a = loop_point(g, m, i, Fraction(1, 8))
        b = loop_point(g, m, i, loop_length(g, m, i) - Fraction(1, 8))
        assert linearly_equivalent(Divisor.from_points(g, [a, b]), Divisor(g, {m[f"q{i}"]: 2}))


def test_degree4_witness_cases(g2):
    g, m = g2
    cases = [
        (m["m1"], m["q2"]),
        (loop_point(g, m, 0, Fraction(1, 4)), m["q1"]),
        (loop_point(g, m, 1, Fraction(1, 3)), loop_point(g, m, 2, Fraction(1, 5))),
        (loop_point(g, m, 1, Fraction(1, 3)), loop_point(g, m, 1, Fraction(1, 2))),
    ]
    for f1, f2 in cases:
        e, how = degree4_witness(g, m, f1, f2)
        assert e.degree == 4
        assert (e - Divisor.from_points(g, [f1, f2])).is_effective()
        assert rank(e) >= 1, how


def test_modification_and_retraction(g0):
    g, m = g0
    h = elementary_tropical_modification(g, m["m0"])
    assert len(h.infinite_leaves) == 1
    assert h.finite_part().genus() == 2
    assert retract(h) == g


def test_modification_sites_and_enumeration(g0):
    g, _ = g0
    sites = modification_sites(g, 2)
    # 2 vertices plus interior half-integer offsets: 3 + 5 + 9
    assert len(sites) == 2 + 3 + 5 + 9
    assert sum(1 for _ in enumerate_modifications(g, 1, sites)) == len(sites)
    assert sum(1 for _ in enumerate_modifications(g, 2, sites[:4])) == 10
    assert list(enumerate_modifications(g, 0, sites))[0][1] is g
