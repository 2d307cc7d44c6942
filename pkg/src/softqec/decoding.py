"""Decoding graphs: ghost boundary, soft vertical edges, parallel merging.

The decoding graph flattens a graphical model for the matching and
union-find decoders: all boundary vertices collapse into one ghost vertex,
every noisy measurement vertex (a,t), t <= T, gets one soft vertical edge to
(a,t+1) whose weight is filled per shot from the recorded outcome, and
parallel hard edges are merged by XOR-combining their probabilities.  Hard
weights are -log(p/(1-p)); soft weights are -log L, clamped to W_MAX.

The hard-input variant drops the soft block and instead inserts static
vertical edges weighted from the average hardened flip probability of the
readout model, merged with any ideal-readout flip edges.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chains import Chain
from .noise import GraphicalModel, SoftOutcomeRecord

W_MAX = 1e9


def hard_weight(p: float) -> float:
    return -math.log(p / (1.0 - p))


def xor_prob(p1: float, p2: float) -> float:
    """Probability that an odd number of two independent faults occur."""
    return p1 * (1.0 - p2) + p2 * (1.0 - p1)


@dataclass
class DecodingGraph:
    """Flattened per-basis decoding structure with a single ghost vertex.

    Edge ids: hard edges first (0..n_hard-1, static weights), then soft
    vertical edges (soft edge i joins vertices i and i+n_plaq and has a
    per-shot weight slot).  origin maps a hard edge back to the explicit
    fault-graph edge it represents (-1 for synthetic hardened-flip edges).
    """

    code: object
    basis: str
    rounds: int
    n_plaq: int
    hard_u: np.ndarray
    hard_v: np.ndarray
    hard_p: np.ndarray
    hard_weight: np.ndarray
    hard_resid: list
    hard_origin: list
    n_soft: int
    soft_weight: np.ndarray = field(default=None)
    merged: bool = False

    def __post_init__(self):
        if self.soft_weight is None:
            self.soft_weight = np.zeros(self.n_soft)
        self._adj = None

    @property
    def n_meas(self):
        return self.n_plaq * (self.rounds + 1)

    @property
    def ghost(self):
        return self.n_meas

    @property
    def n_vertices(self):
        return self.n_meas + 1

    @property
    def n_hard(self):
        return len(self.hard_u)

    @property
    def n_edges(self):
        return self.n_hard + self.n_soft

    def edge_endpoints(self, eid: int):
        if eid < self.n_hard:
            return int(self.hard_u[eid]), int(self.hard_v[eid])
        vid = eid - self.n_hard
        return vid, vid + self.n_plaq

    @property
    def weights(self):
        """Current weights of all edges, hard block then soft block."""
        return np.concatenate([self.hard_weight, self.soft_weight])

    @property
    def residual_masks(self):
        return self.hard_resid + [0] * self.n_soft

    def restrict(self, edge_ids) -> Chain:
        """Drop soft and synthetic edges; map hard edges to their origins."""
        out = []
        for eid in edge_ids:
            if eid < self.n_hard and self.hard_origin[eid] >= 0:
                out.append(self.hard_origin[eid])
        return Chain.make(1, out)

    def correction_residual(self, edge_ids) -> int:
        acc = 0
        for eid in edge_ids:
            if eid < self.n_hard:
                acc ^= self.hard_resid[eid]
        return acc

    def adjacency(self):
        """CSR-style (indptr, neighbor, edge_id) over the current topology."""
        if self._adj is None:
            n = self.n_vertices
            deg = np.zeros(n + 1, dtype=np.int64)
            us, vs = [], []
            for eid in range(self.n_edges):
                u, v = self.edge_endpoints(eid)
                us.append(u)
                vs.append(v)
                deg[u + 1] += 1
                deg[v + 1] += 1
            indptr = np.cumsum(deg)
            nbr = np.zeros(indptr[-1], dtype=np.int64)
            eids = np.zeros(indptr[-1], dtype=np.int64)
            cursor = indptr[:-1].copy()
            for eid, (u, v) in enumerate(zip(us, vs)):
                nbr[cursor[u]] = v
                eids[cursor[u]] = eid
                cursor[u] += 1
                nbr[cursor[v]] = u
                eids[cursor[v]] = eid
                cursor[v] += 1
            self._adj = (indptr, nbr, eids)
        return self._adj


def build(model: GraphicalModel, soft: bool = True) -> DecodingGraph:
    """Decoding graph of one basis; soft=False builds the hard-input variant."""
    T, n = model.rounds, model.n_plaq
    n_meas = model.n_meas
    ghost = n_meas
    us, vs, ps, resid, origin = [], [], [], [], []
    for t_idx in range(T + 1):
        for j in range(model.n_tmpl):
            if t_idx == T and not model.tmpl_span_full[j]:
                continue
            if model.tmpl_probs[j] <= 0.0:
                continue
            base = t_idx * n
            verts = [base + o for o in model.tmpl_events[j]]
            if len(verts) == 1:
                verts.append(ghost)
            us.append(verts[0])
            vs.append(verts[1])
            ps.append(model.tmpl_probs[j])
            resid.append(model.tmpl_resid[j])
            origin.append(model.edge_id(t_idx, j))
    if not soft:
        # hardened readout: a static vertical edge per noisy vertex
        p0, p1 = model.soft_model.flip_probs()
        p_h = 0.5 * (p0 + p1)
        if p_h >= 0.5:
            raise ValueError(f"hardened flip probability {p_h} violates p < 0.5")
        if p_h > 0.0:
            for vid in range(T * n):
                us.append(vid)
                vs.append(vid + n)
                ps.append(p_h)
                resid.append(0)
                origin.append(-1)
    g = DecodingGraph(
        code=model.code,
        basis=model.basis,
        rounds=T,
        n_plaq=n,
        hard_u=np.array(us, dtype=np.int64),
        hard_v=np.array(vs, dtype=np.int64),
        hard_p=np.array(ps, dtype=float),
        hard_weight=np.array([hard_weight(p) for p in ps]),
        hard_resid=resid,
        hard_origin=origin,
        n_soft=T * n if soft else 0,
    )
    return merge_parallel(g)


def merge_parallel(g: DecodingGraph) -> DecodingGraph:
    """Merge parallel hard edges: p = p1(1-p2) + p2(1-p1), iterated.

    The merged edge keeps the residual and origin of its most probable
    constituent (ties to the lowest origin id).  Soft edges are never merged.
    """
    groups = {}
    for eid in range(g.n_hard):
        key = (min(g.hard_u[eid], g.hard_v[eid]), max(g.hard_u[eid], g.hard_v[eid]))
        groups.setdefault(key, []).append(eid)
    us, vs, ps, resid, origin = [], [], [], [], []
    for (u, v), eids in sorted(groups.items()):
        p = 0.0
        for eid in eids:
            p = xor_prob(p, g.hard_p[eid])
        rep = max(
            eids,
            key=lambda e: (g.hard_p[e], -(g.hard_origin[e] if g.hard_origin[e] >= 0 else np.inf)),
        )
        us.append(u)
        vs.append(v)
        ps.append(p)
        resid.append(g.hard_resid[rep])
        origin.append(g.hard_origin[rep])
    return DecodingGraph(
        code=g.code,
        basis=g.basis,
        rounds=g.rounds,
        n_plaq=g.n_plaq,
        hard_u=np.array(us, dtype=np.int64),
        hard_v=np.array(vs, dtype=np.int64),
        hard_p=np.array(ps, dtype=float),
        hard_weight=np.array([hard_weight(p) for p in ps]),
        hard_resid=resid,
        hard_origin=origin,
        n_soft=g.n_soft,
        soft_weight=g.soft_weight.copy(),
        merged=True,
    )


def set_soft_weights(g: DecodingGraph, record: SoftOutcomeRecord) -> None:
    """Fill per-shot soft weights with -log L, clamped into [0, W_MAX]."""
    if g.n_soft == 0:
        return
    w = record.weight
    if w.shape[0] != g.n_meas:
        raise ValueError("outcome record does not cover the measurement vertices")
    np.minimum(w[: g.n_soft], W_MAX, out=g.soft_weight)


def export_graph(g: DecodingGraph) -> dict:
    """JSON-ready dump of the weighted graph (debugging / inspection)."""
    edges = []
    for eid in range(g.n_edges):
        u, v = g.edge_endpoints(eid)
        soft = eid >= g.n_hard
        edges.append(
            {
                "id": eid,
                "u": int(u),
                "v": int(v),
                "soft": soft,
                "weight": float(g.soft_weight[eid - g.n_hard] if soft else g.hard_weight[eid]),
                "p": None if soft else float(g.hard_p[eid]),
                "residual": None if soft else sorted(
                    q for q in range(g.code.n_qubits) if (g.hard_resid[eid] >> q) & 1
                ),
                "origin": None if soft else int(g.hard_origin[eid]),
            }
        )
    return {
        "basis": g.basis,
        "rounds": g.rounds,
        "n_vertices": g.n_vertices,
        "ghost": g.ghost,
        "edges": edges,
    }
