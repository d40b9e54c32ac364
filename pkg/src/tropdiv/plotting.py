"""Figures for reports: metric graphs with divisors, and search summaries."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import networkx as nx  # noqa: E402

from .metric_graph import INF, MetricGraph, Point, format_rat  # noqa: E402

_SAVE = {"metadata": {"Software": None}}


def layout(g: MetricGraph) -> dict:
    """Deterministic planar-ish positions for the vertices of g."""
    h = nx.MultiGraph()
    h.add_nodes_from(sorted(g.vertices))
    for e in sorted(g.edges, key=lambda e: e.id):
        w = 2.0 if e.length is INF else float(e.length)
        h.add_edge(e.u, e.v, weight=w)
    simple = nx.Graph()
    simple.add_nodes_from(h.nodes)
    for u, v, data in h.edges(data=True):
        if simple.has_edge(u, v):
            simple[u][v]["weight"] = min(simple[u][v]["weight"], data["weight"])
        else:
            simple.add_edge(u, v, weight=data["weight"])
    if len(simple) == 1:
        return {next(iter(simple.nodes)): (0.0, 0.0)}
    init = nx.circular_layout(sorted(simple.nodes))
    return nx.kamada_kawai_layout(simple, pos=init, weight="weight")


def _curve(p0, p1, bend: float, steps: int = 40):
    (x0, y0), (x1, y1) = p0, p1
    mx, my = (x0 + x1) / 2, (y0 + y1) / 2
    dx, dy = x1 - x0, y1 - y0
    norm = math.hypot(dx, dy) or 1.0
    cx, cy = mx - dy / norm * bend, my + dx / norm * bend
    pts = []
    for k in range(steps + 1):
        t = k / steps
        x = (1 - t) ** 2 * x0 + 2 * (1 - t) * t * cx + t * t * x1
        y = (1 - t) ** 2 * y0 + 2 * (1 - t) * t * cy + t * t * y1
        pts.append((x, y))
    return pts


def _edge_curves(g: MetricGraph, pos: dict) -> dict:
    groups: dict = {}
    for e in sorted(g.edges, key=lambda e: e.id):
        groups.setdefault(frozenset((e.u, e.v)), []).append(e)
    curves = {}
    for key, es in groups.items():
        k = len(es)
        for i, e in enumerate(es):
            bend = 0.0 if k == 1 else (i - (k - 1) / 2) * 0.35
            curves[e.id] = _curve(pos[e.u], pos[e.v], bend)
    return curves


def _along(curve, frac: float):
    idx = frac * (len(curve) - 1)
    i = min(int(idx), len(curve) - 2)
    t = idx - i
    (x0, y0), (x1, y1) = curve[i], curve[i + 1]
    return x0 + t * (x1 - x0), y0 + t * (y1 - y0)


def draw_graph(ax, g: MetricGraph, divisor=None, marks: dict | None = None, title: str | None = None):
    pos = layout(g)
    curves = _edge_curves(g, pos)
    for e in sorted(g.edges, key=lambda e: e.id):
        xs, ys = zip(*curves[e.id])
        style = "--" if e.length is INF else "-"
        ax.plot(xs, ys, style, color="0.35", lw=1.2, zorder=1)
        mx, my = _along(curves[e.id], 0.5)
        ax.text(mx, my, format_rat(e.length), fontsize=6, color="0.3", ha="center", va="bottom")
    for v in sorted(g.vertices):
        x, y = pos[v]
        face = "white" if v in g.infinite_leaves else "black"
        ax.scatter([x], [y], s=14, c=face, edgecolors="black", zorder=3)
        ax.text(x, y, " " + v, fontsize=6, va="center")

    def locate(p: Point):
        if p.is_vertex:
            return pos[p.vertex]
        e = g.edge(p.edge)
        frac = float(p.offset / e.length) if e.length is not INF else 0.5
        return _along(curves[p.edge], frac)

    if marks:
        for name, p in sorted(marks.items()):
            if p.is_vertex and p.vertex == name:
                continue
            x, y = locate(p)
            ax.scatter([x], [y], s=10, marker="s", c="tab:blue", zorder=4)
            ax.text(x, y, " " + name, fontsize=6, color="tab:blue", va="top")
    if divisor is not None:
        for p, k in divisor.items():
            x, y = locate(p)
            color = "tab:red" if k > 0 else "tab:purple"
            ax.scatter([x], [y], s=40 + 20 * abs(k), c=color, alpha=0.8, zorder=5)
            ax.text(x, y, f"{k}", fontsize=7, color="white", ha="center", va="center", zorder=6)
    ax.set_axis_off()
    ax.set_aspect("equal", adjustable="datalim")
    if title:
        ax.set_title(title, fontsize=9)


def graph_figure(g: MetricGraph, path, divisor=None, marks=None, title=None):
    fig, ax = plt.subplots(figsize=(5, 4))
    draw_graph(ax, g, divisor, marks, title)
    fig.tight_layout()
    fig.savefig(path, dpi=120, **_SAVE)
    plt.close(fig)


def counts_figure(counts: dict, path, title: str):
    """Bar chart of a {label: count} table, e.g. rejection reasons of a search."""
    fig, ax = plt.subplots(figsize=(5, 3))
    labels = sorted(counts)
    ax.bar(range(len(labels)), [counts[k] for k in labels], color="0.5")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=20, ha="right", fontsize=7)
    ax.set_ylabel("candidates")
    ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120, **_SAVE)
    plt.close(fig)
