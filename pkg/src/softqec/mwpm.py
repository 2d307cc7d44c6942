"""Soft minimum-weight perfect-matching decoder.

Pipeline per shot: extract the syndrome, run Dijkstra from every syndrome
vertex over the weighted decoding graph, build the complete distance graph
(plus the ghost when the syndrome count is odd), find an exact minimum-weight
perfect matching, and XOR the geodesics of the matched pairs.  Distances are
true shortest paths in a graph that contains the ghost as an ordinary vertex,
so pairs whose best join runs through the boundary are handled without
special cases.
"""
from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _dijkstra

from .chains import Chain
from .decoding import DecodingGraph, set_soft_weights
from .noise import SoftOutcomeRecord, syndrome_array


@dataclass
class DecodeResult:
    """Correction: explicit fault-graph chain, its residual, and the raw
    decoding-graph edge set (hard and soft) with its total weight."""

    fault_set: Chain
    residual: int
    edges: tuple
    weight: float


def exact_mwpm(weights: np.ndarray):
    """Exact minimum-weight perfect matching of a complete even graph.

    weights is a symmetric (n, n) array, n even; returns sorted index pairs.
    """
    n = weights.shape[0]
    if n % 2:
        raise ValueError("perfect matching needs an even node count")
    if n == 0:
        return []
    g = nx.Graph()
    g.add_nodes_from(range(n))
    for i in range(n):
        for j in range(i + 1, n):
            g.add_edge(i, j, weight=-float(weights[i, j]))
    matching = nx.max_weight_matching(g, maxcardinality=True)
    if 2 * len(matching) != n:
        raise RuntimeError("matching is not perfect")
    return sorted((min(a, b), max(a, b)) for a, b in matching)


class MatchingDecoder:
    """Reusable per-basis decoder instance holding the pair-reduced topology."""

    def __init__(self, graph: DecodingGraph):
        self.graph = graph
        pair_index = {}
        members = []
        pair_u, pair_v = [], []
        for eid in range(graph.n_edges):
            u, v = graph.edge_endpoints(eid)
            if u == v:
                raise ValueError("decoding graph has a self-loop edge")
            key = (u, v) if u <= v else (v, u)
            k = pair_index.get(key)
            if k is None:
                k = len(members)
                pair_index[key] = k
                members.append([])
                pair_u.append(key[0])
                pair_v.append(key[1])
            members[k].append(eid)
        self.members = members
        self._pair_index = pair_index
        order = np.concatenate([np.array(m, dtype=np.int64) for m in members])
        starts = np.cumsum([0] + [len(m) for m in members[:-1]])
        self._member_order = order
        self._member_starts = starts
        n = graph.n_vertices
        rows = np.concatenate([pair_u, pair_v])
        cols = np.concatenate([pair_v, pair_u])
        self._csr = csr_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(n, n)
        )
        # data slots aligned with csr ordering: map pair -> its two slots
        coo = self._csr.tocoo()
        slot_of = {}
        for slot, (r, c) in enumerate(zip(self._csr.indices, np.repeat(
                np.arange(n), np.diff(self._csr.indptr)))):
            slot_of[(c, r)] = slot
        self._slots = np.zeros((len(members), 2), dtype=np.int64)
        for k in range(len(members)):
            a, b = pair_u[k], pair_v[k]
            self._slots[k, 0] = slot_of[(a, b)]
            self._slots[k, 1] = slot_of[(b, a)]

    def _pair_weights(self):
        """Per-shot minimum weight over the parallel edges of each pair."""
        w = self.graph.weights
        mins = np.minimum.reduceat(w[self._member_order], self._member_starts)
        return mins

    def _best_edge(self, pair_k: int, w: np.ndarray) -> int:
        best, best_w = -1, np.inf
        for eid in self.members[pair_k]:
            we = w[eid]
            if we < best_w:
                best, best_w = eid, we
        return best

    def shortest_paths(self, sources):
        """Dijkstra distances and predecessors from the given vertices."""
        pw = self._pair_weights()
        data = np.empty(len(self._csr.data))
        data[self._slots[:, 0]] = pw
        data[self._slots[:, 1]] = pw
        self._csr.data = data
        dist, pred = _dijkstra(
            self._csr, directed=False, indices=sources, return_predecessors=True
        )
        return dist, pred

    def decode(self, record: SoftOutcomeRecord = None, s: np.ndarray = None) -> DecodeResult:
        g = self.graph
        if record is not None:
            set_soft_weights(g, record)
            if s is None:
                s = syndrome_array(record)
        defects = np.nonzero(s)[0]
        if defects.size == 0:
            return DecodeResult(Chain.make(1, []), 0, (), 0.0)
        nodes = defects.tolist()
        if len(nodes) % 2:
            nodes.append(g.ghost)
        dist, pred = self.shortest_paths(defects)
        k = len(nodes)
        nd = len(defects)
        K = np.zeros((k, k))
        for i in range(nd):
            for j in range(k):
                K[i, j] = dist[i, nodes[j]]
        if k > nd:  # ghost row mirrors the ghost column
            for j in range(nd):
                K[k - 1, j] = K[j, k - 1]
        pairs = exact_mwpm(K)
        w = g.weights
        parity = {}
        pair_index = self._pair_index
        for i, j in pairs:
            src = i if i < nd else j
            tgt = nodes[j] if src == i else nodes[i]
            v = tgt
            while v != nodes[src]:
                pu = pred[src, v]
                pk = pair_index[(min(pu, v), max(pu, v))]
                eid = self._best_edge(pk, w)
                parity[eid] = parity.get(eid, 0) ^ 1
                v = pu
        edges = tuple(sorted(e for e, c in parity.items() if c))
        weight = float(sum(w[e] for e in edges))
        return DecodeResult(g.restrict(edges), g.correction_residual(edges), edges, weight)


def decode(graph: DecodingGraph, record: SoftOutcomeRecord) -> DecodeResult:
    return MatchingDecoder(graph).decode(record)
