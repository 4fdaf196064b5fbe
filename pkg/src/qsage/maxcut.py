"""Weighted MaxCut instances, exact enumeration, and the Ising cross-check.

A cut assigns each vertex to side 0 or 1; its value is the total weight of
edges whose endpoints land on different sides.  The exact optimum doubles as
the reference answer for the optimization family, and the spectral identity
``cut_max = (W_total - E0) / 2`` with ``E0 = min spec(sum_uv w_uv Z_u Z_v)``
provides an independent route used in tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import PauliString, PauliSum, to_dense

BRUTE_FORCE_CAP = 24
_CHUNK = 1 << 16


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with real edge weights, vertices labelled 0..n-1."""

    n_vertices: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self) -> None:
        if self.n_vertices < 1:
            raise ValueError("graph needs at least one vertex")
        seen = set()
        canon = []
        for edge in self.edges:
            if len(edge) != 3:
                raise ValueError(f"edge must be (u, v, weight): {edge!r}")
            u, v, w = edge
            if not (isinstance(u, int) and isinstance(v, int)):
                raise ValueError(f"vertex labels must be integers: {edge!r}")
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ValueError(f"edge {edge!r} out of range for n={self.n_vertices}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            canon.append((u, v, float(w)))
        object.__setattr__(self, "edges", tuple(canon))

    @property
    def total_weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))

    def cut_value(self, sides: tuple[int, ...] | list[int]) -> float:
        if len(sides) != self.n_vertices:
            raise ValueError("side assignment has wrong length")
        return float(
            sum(w for u, v, w in self.edges if (sides[u] ^ sides[v]) & 1)
        )


def random_graph(
    n_vertices: int, edge_prob: float, seed: int, weight_range: tuple[float, float] = (0.2, 1.0)
) -> WeightedGraph:
    """Erdos-Renyi weighted graph from a fixed seed (used for bundled instances)."""
    rng = np.random.default_rng(seed)
    edges = []
    for u in range(n_vertices):
        for v in range(u + 1, n_vertices):
            if rng.random() < edge_prob:
                lo, hi = weight_range
                edges.append((u, v, float(np.round(rng.uniform(lo, hi), 3))))
    return WeightedGraph(n_vertices, tuple(edges))


def maxcut_bruteforce(graph: WeightedGraph) -> tuple[float, tuple[int, ...]]:
    """Exhaustive optimum over all bipartitions.

    Vectorised over chunks of assignment masks; vertex u is on side
    ``(mask >> u) & 1``.  Only masks with vertex ``n-1`` on side 0 are scanned
    (the cut is invariant under swapping sides).  Raises for graphs above the
    enumeration cap.
    """
    n = graph.n_vertices
    if n > BRUTE_FORCE_CAP:
        raise ValueError(f"brute force capped at {BRUTE_FORCE_CAP} vertices, got {n}")
    if not graph.edges:
        return 0.0, tuple([0] * n)
    us = np.array([u for u, _, _ in graph.edges], dtype=np.uint32)
    vs = np.array([v for _, v, _ in graph.edges], dtype=np.uint32)
    ws = np.array([w for _, _, w in graph.edges], dtype=np.float64)
    n_masks = 1 << max(n - 1, 0)
    best_val = -np.inf
    best_mask = 0
    for start in range(0, n_masks, _CHUNK):
        masks = np.arange(start, min(start + _CHUNK, n_masks), dtype=np.uint32)
        diff = ((masks[:, None] >> us) ^ (masks[:, None] >> vs)) & 1
        vals = diff @ ws
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val = float(vals[k])
            best_mask = int(masks[k])
    sides = tuple((best_mask >> u) & 1 for u in range(n))
    return best_val, sides


def maxcut_ising(graph: WeightedGraph) -> PauliSum:
    """Diagonal Ising operator sum_uv w_uv Z_u Z_v on one qubit per vertex."""
    terms = [
        (w, PauliString.from_ops(graph.n_vertices, {u: "Z", v: "Z"}))
        for u, v, w in graph.edges
    ]
    if not terms:
        return PauliSum.zero(graph.n_vertices)
    return PauliSum(graph.n_vertices, terms)


def maxcut_via_spectrum(graph: WeightedGraph, cap: int = 12) -> float:
    """Optimum via (W_total - E0)/2 with E0 from the dense Ising spectrum.

    Independent of the mask enumeration in :func:`maxcut_bruteforce`; used as
    a cross-check on small graphs.
    """
    h = maxcut_ising(graph)
    dense = to_dense(h, cap=cap)
    e0 = float(np.min(np.real(np.diagonal(dense))))
    return (graph.total_weight - e0) / 2.0
