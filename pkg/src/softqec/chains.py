"""Indexed hypergraphs and GF(2) chain algebra.

Vertices are integers ``0..vertex_count-1``.  Edges are stored by dense
integer id (the position in the edge list); parallel edges are permitted,
which matters because fault graphs may carry multiple copies of the same
edge with different residual errors.
"""
from __future__ import annotations

from dataclasses import dataclass


class HyperGraph:
    """A finite (multi-)hypergraph with dense edge ids.

    edges[i] is the vertex tuple of the edge with id i.  Rank-2 edges are
    ordinary graph edges; rank-1 edges and rank>2 hyperedges are allowed.
    """

    def __init__(self, vertex_count, edges):
        self.vertex_count = int(vertex_count)
        self.edges = [tuple(e) for e in edges]
        for eid, e in enumerate(self.edges):
            if len(e) == 0:
                raise ValueError(f"edge {eid} is empty")
            for v in e:
                if not (0 <= v < self.vertex_count):
                    raise ValueError(f"edge {eid} uses vertex {v} >= {self.vertex_count}")

    @property
    def edge_count(self):
        return len(self.edges)

    def edge_vertices(self, eid):
        return self.edges[eid]

    def __repr__(self):
        return f"HyperGraph({self.vertex_count} vertices, {len(self.edges)} edges)"


@dataclass(frozen=True)
class Chain:
    """A GF(2) chain: canonical sorted duplicate-free support.

    dimension 0 indexes vertices, dimension 1 indexes edges.
    """

    dimension: int
    support: tuple[int, ...]

    @staticmethod
    def make(dimension: int, elements) -> "Chain":
        return Chain(dimension, tuple(sorted(set(elements))))

    def __post_init__(self):
        if self.dimension not in (0, 1):
            raise ValueError("dimension must be 0 or 1")
        if list(self.support) != sorted(set(self.support)):
            raise ValueError("support must be sorted and duplicate-free")

    def __len__(self):
        return len(self.support)

    def __iter__(self):
        return iter(self.support)

    def __bool__(self):
        return bool(self.support)


def add(a: Chain, b: Chain) -> Chain:
    """GF(2) sum: symmetric difference of supports."""
    if a.dimension != b.dimension:
        raise ValueError(f"dimension mismatch: {a.dimension} != {b.dimension}")
    return Chain(a.dimension, tuple(sorted(set(a.support) ^ set(b.support))))


def boundary(x: Chain, g: HyperGraph) -> Chain:
    """Vertices incident to an odd number of edges of x.

    For a rank-2 edge e = {u, v} this is u + v; for a hyperedge it is the
    GF(2) sum of all its vertices.
    """
    if x.dimension != 1:
        raise ValueError("boundary is defined on 1-chains")
    odd: set[int] = set()
    for eid in x.support:
        for v in g.edges[eid]:
            if v in odd:
                odd.discard(v)
            else:
                odd.add(v)
    return Chain(0, tuple(sorted(odd)))


def restricted_boundary(x: Chain, vertex_subset, g: HyperGraph) -> Chain:
    """Boundary of x intersected with the given vertex subset."""
    full = boundary(x, g)
    keep = set(vertex_subset)
    return Chain(0, tuple(v for v in full.support if v in keep))
