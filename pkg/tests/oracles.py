"""Independent reference implementations used to freeze expected values.

Nothing here imports the reduction or rank code of the package: divisors on a
finite multigraph are plain integer dicts, and the rank is computed by brute
force over effective divisors of each degree.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations_with_replacement


class DiscreteGraph:
    """Finite connected multigraph without loop edges."""

    def __init__(self, vertices, edges):
        self.vertices = list(vertices)
        self.adj = {v: {} for v in self.vertices}
        for u, v in edges:
            if u == v:
                raise ValueError("loop edge")
            self.adj[u][v] = self.adj[u].get(v, 0) + 1
            self.adj[v][u] = self.adj[v].get(u, 0) + 1
        self.deg = {v: sum(self.adj[v].values()) for v in self.vertices}

    def fire(self, d: dict, s: set) -> None:
        """Every vertex of s sends one chip along each edge leaving s."""
        for v in s:
            for u, k in self.adj[v].items():
                if u not in s:
                    d[v] = d.get(v, 0) - k
                    d[u] = d.get(u, 0) + k

    def reduce(self, d: dict, q) -> dict:
        d = {v: d.get(v, 0) for v in self.vertices}
        # greedy borrowing makes d effective away from q
        changed = True
        while changed:
            changed = False
            for v in self.vertices:
                if v != q and d[v] < 0:
                    d[v] += self.deg[v]
                    for u, k in self.adj[v].items():
                        d[u] -= k
                    changed = True
        # Dhar burning from q; fire the unburnt set until everything burns
        while True:
            burnt = {q}
            grow = True
            while grow:
                grow = False
                for v in self.vertices:
                    if v in burnt:
                        continue
                    fire = sum(k for u, k in self.adj[v].items() if u in burnt)
                    if fire > d[v]:
                        burnt.add(v)
                        grow = True
            rest = set(self.vertices) - burnt
            if not rest:
                return d
            self.fire(d, rest)

    def nonempty(self, d: dict) -> bool:
        if sum(d.values()) < 0:
            return False
        neg = [v for v in self.vertices if d.get(v, 0) < 0]
        if not neg:
            return True
        return self.reduce(d, neg[0])[neg[0]] >= 0

    def rank(self, d: dict) -> int:
        if not self.nonempty(d):
            return -1
        r = 0
        while True:
            for es in combinations_with_replacement(self.vertices, r + 1):
                e = dict(d)
                for v in es:
                    e[v] = e.get(v, 0) - 1
                if not self.nonempty(e):
                    return r
            r += 1

    def equivalent(self, a: dict, b: dict) -> bool:
        diff = {v: a.get(v, 0) - b.get(v, 0) for v in self.vertices}
        if sum(diff.values()) != 0:
            return False
        q = self.vertices[0]
        red = self.reduce(diff, q)
        return all(k == 0 for k in red.values())


def unit_subdivision(edges):
    """Unit subdivision of an integer-length multigraph.

    ``edges`` is a list of (edge id, u, v, integer length).  Lattice point
    names are the vertex names and "eid@k" for interior points at integer
    offset k from u.
    """
    verts = set()
    out = []
    for eid, u, v, length in edges:
        length = int(length)
        chain = [u] + [f"{eid}@{k}" for k in range(1, length)] + [v]
        verts.update(chain)
        out += list(zip(chain, chain[1:]))
    return DiscreteGraph(sorted(verts), out)


def random_integer_graph(rng: random.Random, max_genus: int = 4, max_length: int = 3):
    """Connected integer-length multigraph (no loop edges) of genus <= max_genus."""
    nv = rng.randint(2, 4)
    vs = [f"u{i}" for i in range(nv)]
    edges = []
    for i in range(1, nv):
        edges.append((f"a{i}", vs[rng.randrange(i)], vs[i], rng.randint(1, max_length)))
    extra = rng.randint(1, max_genus)
    for k in range(extra):
        u, v = rng.sample(vs, 2)
        edges.append((f"b{k}", u, v, rng.randint(1, max_length)))
    return vs, edges


def genus_of(vertices, edges) -> int:
    return len(edges) - len(vertices) + 1


def rational_random(rng: random.Random, hi: Fraction, den: int = 8) -> Fraction:
    return Fraction(rng.randint(1, int(hi * den) - 1), den)
