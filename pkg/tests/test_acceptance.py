"""Acceptance criteria: one PASS/FAIL line per criterion, with its time limit.

Lines are printed as the tests run and repeated in the terminal summary.
"""

import json
import math
import os
import random
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

from acceptance_reports import JOB_NAMES, build
from conftest import ACCEPTANCE_LINES, graph_zoo
from oracles import random_integer_graph, unit_subdivision

from tropdiv import claims
from tropdiv.divisor import Divisor, is_reduced, reduce, reduced, replay
from tropdiv.family import GnSpec, build_g0, build_gn
from tropdiv.metric_graph import MetricGraph, Point
from tropdiv.rank import EXACT, SAMPLED, rank, riemann_roch_check

REPORTS: dict = {}


def record(number: int, title: str, ok: bool, elapsed: float, limit: float, detail: str) -> bool:
    passed = ok and elapsed < limit
    line = f"{'PASS' if passed else 'FAIL'} criterion {number:2d} ({title}): {detail}; {elapsed:.1f} s (limit {limit:.0f} s)"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return passed


def report(name: str):
    res, text = build(name)
    REPORTS[name] = text
    return res


def random_point(g, rng):
    e = rng.choice(sorted(g.finite_part().edges, key=lambda e: e.id))
    return g.point(e.id, e.length * Fraction(rng.randint(0, 16), 16))


def lattice(g, scale: int):
    """Unit subdivision of g scaled by ``scale`` and the map lattice name -> point of g."""
    es = [(e.id, e.u, e.v, int(e.length * scale)) for e in g.edges]
    assert all(e.length * scale == int(e.length * scale) for e in g.edges)
    dg = unit_subdivision(es)

    def point(name):
        if "@" in name:
            eid, k = name.split("@")
            return g.point(eid, Fraction(int(k), scale))
        return Point(vertex=name)

    return dg, point


# ---------------------------------------------------------------------------


def test_criterion_01_reduction():
    t = time.time()
    rng = random.Random(0)
    zoo = graph_zoo()
    count = bad = 0
    for g in zoo.values():
        for _ in range(100):
            d = Divisor.from_points(g, [random_point(g, rng) for _ in range(rng.randint(0, 6))])
            if rng.random() < 0.4:
                d = d - Divisor.from_points(g, [random_point(g, rng) for _ in range(rng.randint(1, 2))])
            for _ in range(3):
                q = random_point(g, rng)
                out, cert = reduce(d, q)
                count += 1
                if not (is_reduced(out, q) and reduced(out, q) == out and replay(cert) == out):
                    bad += 1
    ok = count == 3000 and bad == 0 and len(zoo) == 10
    assert record(1, "reduction correctness", ok, time.time() - t, 30, f"{count} reductions on {len(zoo)} graphs, {bad} failures")


def test_criterion_02_discrete_oracle():
    t = time.time()
    rng = random.Random(1)
    graphs = [list(random_integer_graph(rng)) for _ in range(10)]
    graphs.append((["v1", "v2"], [("e0", "v1", "v2", 2), ("e1", "v1", "v2", 3), ("e2", "v1", "v2", 5)]))
    cases = mismatches = 0
    for vs, es in graphs:
        g = MetricGraph(vs, es)
        dg, point = lattice(g, 1)
        for _ in range(22):
            chips = {}
            for _ in range(rng.randint(0, 6)):
                v = rng.choice(dg.vertices)
                chips[v] = chips.get(v, 0) + 1
            if chips and rng.random() < 0.25:
                v = rng.choice(dg.vertices)
                chips[v] = chips.get(v, 0) - 1
            d = Divisor(g, {point(k): c for k, c in chips.items() if c})
            cases += 1
            if rank(d) != dg.rank(chips):
                mismatches += 1
    assert record(2, "discrete-oracle rank agreement", cases >= 200 and mismatches == 0, time.time() - t, 120, f"{cases} cases, {mismatches} mismatches")


def test_criterion_03_riemann_roch():
    t = time.time()
    rng = random.Random(2)
    zoo = graph_zoo()
    names = sorted(zoo)
    good = 0
    for k in range(100):
        g = zoo[names[k % len(names)]]
        d = Divisor.from_points(g, [random_point(g, rng) for _ in range(rng.randint(0, 2 * g.genus()))])
        if rng.random() < 0.3:
            d = d - Divisor.from_points(g, [random_point(g, rng)])
        good += riemann_roch_check(d)
    assert record(3, "Riemann-Roch identity", good == 100, time.time() - t, 120, f"{good}/100 divisors satisfy it")


def test_criterion_04_lemma1():
    t = time.time()
    ok = True
    notes = []
    for i, spec in enumerate(claims.PERTURBED_SPECS):
        res = report(f"lemma1/spec{i}")
        ok = ok and res.verdict and res.mode == EXACT and res.details["grid_points"] > 0
        # independent check on the lattice of the denominator-16 grid
        g, m = build_g0(spec)
        dg, point = lattice(g, 16)
        target = {"v1": 1, "v2": 1}
        halves = {point(v) for v in dg.vertices if dg.equivalent({v: 2}, target)}
        ok = ok and halves == {m["m0"], m["m1"], m["m2"]}
        notes.append("(" + ", ".join(str(x) for x in spec.lengths) + ")")
    assert record(4, "Lemma 1", ok, time.time() - t, 60, "length triples " + " ".join(notes) + "; lattice oracle agrees")


def test_criterion_05_lemma2():
    t = time.time()
    ok = True
    for i, spec in enumerate(claims.PERTURBED_SPECS):
        res = report(f"lemma2/spec{i}")
        ok = ok and res.verdict and res.mode == EXACT and not res.details["open_cells"]
        # lattice oracle: v1 + v2 + y never dominates both 2q1 and 2q2
        g, m = build_g0(spec)
        scale = math.lcm(*(x.denominator for x in (*spec.lengths, *(p.offset for p in m.points.values() if not p.is_vertex))))
        dg, point = lattice(g, scale)
        names = {point(v): v for v in dg.vertices}
        q1, q2 = names[m["q1"]], names[m["q2"]]
        for y in dg.vertices:
            d = {"v1": 1, "v2": 1}
            d[y] = d.get(y, 0) + 1
            both = all(dg.nonempty({**d, q: d.get(q, 0) - 2}) for q in (q1, q2))
            ok = ok and not both
    assert record(5, "Lemma 2", ok, time.time() - t, 60, "default and 2 perturbed specs, reduced-divisor cell checks and lattice oracle")


def test_criterion_06_prop1():
    t = time.time()
    ok = True
    parts = []
    for n in (2, 3):
        res = report(f"prop1/n{n}")
        g12 = res.details["no g^1_2 (cells)"]
        searches = res.details["searches"]
        ok = ok and res.verdict and g12["mode"] == EXACT and g12["verdict"]
        ok = ok and res.details["rank_G0(2q_i)=0"]["ok"]
        for key in ("g^1_3", "g^2_5"):
            s = searches[key]
            ok = ok and s["verdict"] and s["mode"] == SAMPLED
        parts.append(f"n={n}: no g^1_2 EXACT, g^1_3 and g^2_5 none ({res.mode})")
    assert record(6, "Proposition 1", ok, time.time() - t, 600, "; ".join(parts))


def test_criterion_07_prop2():
    t = time.time()
    ok = True
    samples = 0
    for n in (2, 3, 4, 5):
        res = report(f"prop2/n{n}")
        ub = res.details["upper_bound"]
        ok = ok and res.verdict and not res.details["failures"] and not ub["failed_cells"]
        samples += res.details["samples"]
    # independent lattice check of the upper-bound F on G_2 at scale 8
    g, m = build_gn(GnSpec(n=2))
    dg, point = lattice(g, 8)
    names = {point(v): v for v in dg.vertices}
    F, _ = claims.w_counterexample(g, m, samples=2)
    chips = {names[p]: k for p, k in F.items()}
    for y in dg.vertices:
        d = dict(chips)
        d[y] = d.get(y, 0) + 1
        ok = ok and dg.rank(d) == 0
    assert record(7, "Proposition 2", ok, time.time() - t, 900, f"n=2..5, {samples} F samples witnessed; F = {F} admits no g^1_4 (cells + lattice oracle)")


def test_criterion_08_clifford():
    t = time.time()
    res = report("clifford/n2")
    d = res.witnesses[0]
    excl = res.details["exclusions"]
    ok = res.verdict and res.details["value"] == 2 and d.degree == 4 and rank(d) == 1
    ok = ok and excl[0]["result"]["mode"] == EXACT and excl[0]["result"]["verdict"]
    ok = ok and all(e.get("none", True) for e in excl)
    assert record(8, "Clifford index", ok, time.time() - t, 300, f"c(G_2) = 2 via {d} (rank 1), c <= 1 excluded ({res.mode})")


def test_criterion_09_theorem():
    t = time.time()
    ok = True
    parts = []
    for n in (2, 3):
        res = report(f"theorem/n{n}")
        det = res.details
        s = det["sites"]
        expected = 1 + s + s * (s + 1) // 2
        ok = ok and res.verdict and res.mode == "EXHAUSTED_WITHIN_BUDGET" and not res.witnesses
        ok = ok and det["candidates"] == expected == len(det["rejections"])
        ok = ok and all(r["verdict"] == "rejected" for r in det["rejections"])
        ok = ok and det["control"]["witness_found"]
        parts.append(f"n={n}: {det['candidates']} candidates rejected")
    assert record(9, "Theorem (budgeted)", ok, time.time() - t, 1800, "; ".join(parts) + "; control graph yields a witness")


def test_criterion_10_lemma3():
    t = time.time()
    res = report("lemma3")
    rows = res.details["cases"]
    false_ok = sum(1 for r in rows if not r["expected"] and not r["got"])
    true_ok = sum(1 for r in rows if r["expected"] and r["got"])
    ok = res.verdict and false_ok == 5 and true_ok == 5
    assert record(10, "Lemma 3 predicate", ok, time.time() - t, 60, f"{false_ok}/5 candidates false, {true_ok}/5 controls true")


def test_criterion_11_determinism():
    t = time.time()
    for name in JOB_NAMES:
        if name not in REPORTS:
            REPORTS[name] = build(name)[1]
    here = Path(__file__).parent
    env = dict(os.environ, PYTHONHASHSEED="12345")
    proc = subprocess.run([sys.executable, str(here / "acceptance_reports.py")], capture_output=True, text=True, env=env, cwd=here)
    other = json.loads(proc.stdout) if proc.returncode == 0 else {}
    same = [name for name in JOB_NAMES if other.get(name) == REPORTS[name]]
    ok = len(same) == len(JOB_NAMES)
    assert record(11, "determinism", ok, time.time() - t, 1800, f"{len(same)}/{len(JOB_NAMES)} reports byte-identical in a second process")
