"""Soft Union-Find decoder: split-edge growth, perimeter priority, peeling.

Each decoding-graph edge is split at a midpoint vertex into two half-edges of
weight w/2 (a compatibility mode grows whole edges instead).  Clusters are
disjoint-set components over split-graph vertices; while any cluster with odd
syndrome parity and no boundary vertex exists, the one with the smallest
perimeter |B(C)| (ties: least recently grown) grows all its boundary
half-edges by the least remaining weight among them.  Filled half-edges merge
clusters.  Afterwards the edges whose two halves are both fully grown form
the grown region, and a peeling pass extracts a correction chain matching the
syndrome inside it.

The perimeter is maintained exactly: every half-edge is listed once from each
endpoint's side; entries die when their half fills or both endpoints join the
same cluster, and each death adjusts the owning clusters' counters at the
moment it happens (merges scan the smaller cluster's list to find entries the
union internalizes).  Weights are quantized to 32-bit floats on entry.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .decoding import DecodingGraph, set_soft_weights
from .mwpm import DecodeResult
from .noise import SoftOutcomeRecord, syndrome_array

_TS_BITS = 27
_TS_MASK = (1 << _TS_BITS) - 1


@njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def _heap_push(hkey, hroot, hs, key, root):
    i = hs
    hkey[i] = key
    hroot[i] = root
    while i > 0:
        p = (i - 1) >> 1
        if hkey[p] <= hkey[i]:
            break
        hkey[p], hkey[i] = hkey[i], hkey[p]
        hroot[p], hroot[i] = hroot[i], hroot[p]
        i = p
    return hs + 1


@njit(cache=True)
def _heap_pop(hkey, hroot, hs):
    key = hkey[0]
    root = hroot[0]
    hs -= 1
    hkey[0] = hkey[hs]
    hroot[0] = hroot[hs]
    i = 0
    while True:
        l = 2 * i + 1
        r = l + 1
        m = i
        if l < hs and hkey[l] < hkey[m]:
            m = l
        if r < hs and hkey[r] < hkey[m]:
            m = r
        if m == i:
            break
        hkey[m], hkey[i] = hkey[i], hkey[m]
        hroot[m], hroot[i] = hroot[i], hroot[m]
        i = m
    return key, root, hs


@njit(cache=True)
def _union(parent, llen, head, tail, nxt, parity, boundary, perim, ts,
           ent_seg, ent_other, sfull, ra, rb, ts_now):
    if llen[ra] < llen[rb]:
        lose, keep = ra, rb
    else:
        lose, keep = rb, ra
    e = head[lose]
    new_head = np.int64(-1)
    new_tail = np.int64(-1)
    kept = 0
    adj = 0
    while e != -1:
        nx = nxt[e]
        s = ent_seg[e]
        drop = False
        if sfull[s]:
            drop = True  # perimeter already adjusted when the half filled
        else:
            ro = _find(parent, ent_other[e])
            if ro == lose:
                drop = True  # internalized earlier; already discounted
            elif ro == keep:
                drop = True
                adj += 2  # this union internalizes the pair of entries
        if not drop:
            if new_head == -1:
                new_head = e
            else:
                nxt[new_tail] = e
            new_tail = e
            kept += 1
        e = nx
    if new_tail != -1:
        nxt[new_tail] = -1
    parent[lose] = keep
    if new_head != -1:
        if head[keep] == -1:
            head[keep] = new_head
        else:
            nxt[tail[keep]] = new_head
        tail[keep] = new_tail
    llen[keep] += kept
    parity[keep] ^= parity[lose]
    boundary[keep] |= boundary[lose]
    perim[keep] = perim[keep] + perim[lose] - adj
    ts[keep] = ts_now
    return keep


@njit(cache=True)
def _grow(n_split, seg_a, seg_b, seg_w, ent_seg, ent_other,
          head0, tail0, nxt0, deg0, sbits, ghost):
    """Algorithm core: grows odd clusters until none remain.

    Returns (status, sfull, gamma, order, n_steps) where order[:n_steps]
    logs the root vertex chosen at each growth step.
    """
    n_seg = seg_a.shape[0]
    parent = np.arange(n_split, dtype=np.int64)
    head = head0.copy()
    tail = tail0.copy()
    nxt = nxt0.copy()
    llen = deg0.copy()
    perim = deg0.copy()
    parity = np.zeros(n_split, dtype=np.uint8)
    boundary = np.zeros(n_split, dtype=np.uint8)
    ts = np.zeros(n_split, dtype=np.int64)
    gamma = np.zeros(n_seg)
    sfull = np.zeros(n_seg, dtype=np.uint8)
    for v in range(sbits.shape[0]):
        parity[v] = sbits[v]
    boundary[ghost] = 1

    cap = n_seg + n_split + 16
    hkey = np.empty(cap, dtype=np.int64)
    hroot = np.empty(cap, dtype=np.int64)
    hs = 0
    ts_now = 0

    # zero-weight segments are pre-grown: fill and merge immediately
    for s in range(n_seg):
        if seg_w[s] <= 0.0:
            sfull[s] = 1
            ra = _find(parent, seg_a[s])
            rb = _find(parent, seg_b[s])
            perim[ra] -= 1
            perim[rb] -= 1
            if ra != rb:
                _union(parent, llen, head, tail, nxt, parity, boundary,
                       perim, ts, ent_seg, ent_other, sfull, ra, rb, 0)

    for v in range(sbits.shape[0]):
        if sbits[v]:
            r = _find(parent, v)
            if parity[r] and not boundary[r]:
                hs = _heap_push(hkey, hroot, hs,
                                (perim[r] << _TS_BITS) | ts[r], r)

    fulls = np.empty(n_seg, dtype=np.int64)
    max_steps = 4 * n_seg + 64
    order = np.empty(max_steps + 1, dtype=np.int64)
    steps = 0
    while hs > 0:
        key, r, hs = _heap_pop(hkey, hroot, hs)
        if parent[r] != r:
            continue
        if (not parity[r]) or boundary[r]:
            continue
        if key != ((perim[r] << _TS_BITS) | ts[r]):
            continue  # superseded by a newer state
        if steps > max_steps:
            return 1, sfull, gamma, order, steps
        order[steps] = r
        steps += 1
        ts_now += 1
        # pass 1: drop dead entries, find the least remaining weight
        inc = np.inf
        prev = np.int64(-1)
        e = head[r]
        while e != -1:
            nx = nxt[e]
            s = ent_seg[e]
            dead = sfull[s] == 1 or _find(parent, ent_other[e]) == r
            if dead:
                if prev == -1:
                    head[r] = nx
                else:
                    nxt[prev] = nx
                if e == tail[r]:
                    tail[r] = prev
                llen[r] -= 1
            else:
                rem = seg_w[s] - gamma[s]
                if rem < inc:
                    inc = rem
                prev = e
            e = nx
        if not np.isfinite(inc):
            return 2, sfull, gamma, order, steps
        # pass 2: grow every boundary half-edge by inc; comparing the
        # recomputed remainder to inc (same expression as pass 1) guarantees
        # the minimizing half fills despite rounding in gamma + inc
        n_full = 0
        prev = np.int64(-1)
        e = head[r]
        while e != -1:
            nx = nxt[e]
            s = ent_seg[e]
            rem = seg_w[s] - gamma[s]
            filled = rem <= inc
            if not filled:
                gamma[s] += inc
                filled = gamma[s] >= seg_w[s]
            if filled:
                gamma[s] = seg_w[s]
                sfull[s] = 1
                if prev == -1:
                    head[r] = nx
                else:
                    nxt[prev] = nx
                if e == tail[r]:
                    tail[r] = prev
                llen[r] -= 1
                perim[r] -= 1
                ro = _find(parent, ent_other[e])
                perim[ro] -= 1
                fulls[n_full] = s
                n_full += 1
            else:
                prev = e
            e = nx
        ts[r] = ts_now
        for i in range(n_full):
            s = fulls[i]
            ra = _find(parent, seg_a[s])
            rb = _find(parent, seg_b[s])
            if ra != rb:
                _union(parent, llen, head, tail, nxt, parity, boundary,
                       perim, ts, ent_seg, ent_other, sfull, ra, rb, ts_now)
        rr = _find(parent, r)
        if parity[rr] and not boundary[rr]:
            hs = _heap_push(hkey, hroot, hs,
                            (perim[rr] << _TS_BITS) | ts[rr], rr)
    return 0, sfull, gamma, order, steps


@njit(cache=True)
def _peel(n_vertices, edge_u, edge_v, efull, sbits, ghost):
    """Leaf-peeling inside the grown edge set; returns (status, chosen)."""
    n_edges = edge_u.shape[0]
    deg = np.zeros(n_vertices + 1, dtype=np.int64)
    for e in range(n_edges):
        if efull[e]:
            deg[edge_u[e] + 1] += 1
            deg[edge_v[e] + 1] += 1
    indptr = np.zeros(n_vertices + 1, dtype=np.int64)
    for v in range(n_vertices):
        indptr[v + 1] = indptr[v] + deg[v + 1]
    total = indptr[n_vertices]
    adj_v = np.empty(total, dtype=np.int64)
    adj_e = np.empty(total, dtype=np.int64)
    cursor = indptr[:-1].copy()
    for e in range(n_edges):
        if efull[e]:
            u, v = edge_u[e], edge_v[e]
            adj_v[cursor[u]] = v
            adj_e[cursor[u]] = e
            cursor[u] += 1
            adj_v[cursor[v]] = u
            adj_e[cursor[v]] = e
            cursor[v] += 1

    visited = np.zeros(n_vertices, dtype=np.uint8)
    order = np.empty(n_vertices, dtype=np.int64)
    pvert = np.full(n_vertices, -1, dtype=np.int64)
    pedge = np.full(n_vertices, -1, dtype=np.int64)
    bits = sbits.copy()
    pos = 0
    for start_i in range(n_vertices + 1):
        # the ghost roots its component so it can absorb leftover parity
        start = ghost if start_i == 0 else start_i - 1
        if visited[start] or indptr[start + 1] == indptr[start]:
            continue
        visited[start] = 1
        q_lo = pos
        order[pos] = start
        pos += 1
        while q_lo < pos:
            v = order[q_lo]
            q_lo += 1
            for k in range(indptr[v], indptr[v + 1]):
                w = adj_v[k]
                if not visited[w]:
                    visited[w] = 1
                    pvert[w] = v
                    pedge[w] = adj_e[k]
                    order[pos] = w
                    pos += 1
    chosen = np.zeros(n_edges, dtype=np.uint8)
    for i in range(pos - 1, -1, -1):
        v = order[i]
        if pvert[v] == -1:
            if v != ghost and bits[v]:
                return 3, chosen  # odd component without boundary
            continue
        if bits[v]:
            chosen[pedge[v]] ^= 1
            bits[pvert[v]] ^= 1
    # any defect outside the grown region is unmatchable
    for v in range(n_vertices):
        if bits[v] and v != ghost and not visited[v]:
            return 3, chosen
    return 0, chosen


class UnionFindDecoder:
    """Reusable per-basis decoder; split=False grows whole edges (legacy)."""

    def __init__(self, graph: DecodingGraph, split: bool = True):
        self.graph = graph
        self.split = split
        n_e = graph.n_edges
        n_v = graph.n_vertices
        edge_u = np.empty(n_e, dtype=np.int64)
        edge_v = np.empty(n_e, dtype=np.int64)
        for eid in range(n_e):
            u, v = graph.edge_endpoints(eid)
            edge_u[eid] = u
            edge_v[eid] = v
        self.edge_u = edge_u
        self.edge_v = edge_v
        if split:
            self.n_split = n_v + n_e
            mids = n_v + np.arange(n_e, dtype=np.int64)
            self.seg_a = np.empty(2 * n_e, dtype=np.int64)
            self.seg_b = np.empty(2 * n_e, dtype=np.int64)
            self.seg_a[0::2] = edge_u
            self.seg_b[0::2] = mids
            self.seg_a[1::2] = edge_v
            self.seg_b[1::2] = mids
        else:
            self.n_split = n_v
            self.seg_a = edge_u.copy()
            self.seg_b = edge_v.copy()
        n_seg = self.seg_a.shape[0]
        if n_seg >= 1 << _TS_BITS:
            raise ValueError("graph too large for the growth-step counter")
        self.ent_seg = np.repeat(np.arange(n_seg, dtype=np.int64), 2)
        self.ent_other = np.empty(2 * n_seg, dtype=np.int64)
        self.ent_other[0::2] = self.seg_b
        self.ent_other[1::2] = self.seg_a
        ent_inner = np.empty(2 * n_seg, dtype=np.int64)
        ent_inner[0::2] = self.seg_a
        ent_inner[1::2] = self.seg_b
        # template per-vertex linked lists of boundary entries
        head = np.full(self.n_split, -1, dtype=np.int64)
        tail = np.full(self.n_split, -1, dtype=np.int64)
        nxt = np.full(2 * n_seg, -1, dtype=np.int64)
        deg = np.zeros(self.n_split, dtype=np.int64)
        for ent in range(2 * n_seg):
            v = ent_inner[ent]
            if head[v] == -1:
                head[v] = ent
            else:
                nxt[tail[v]] = ent
            tail[v] = ent
            deg[v] += 1
        self.head0 = head
        self.tail0 = tail
        self.nxt0 = nxt
        self.deg0 = deg

    def _segment_weights(self):
        w = self.graph.weights.astype(np.float32).astype(np.float64)
        if self.split:
            return np.repeat(w / 2.0, 2)
        return w

    def decode(self, record: SoftOutcomeRecord = None, s: np.ndarray = None) -> DecodeResult:
        g = self.graph
        if record is not None:
            set_soft_weights(g, record)
            if s is None:
                s = syndrome_array(record)
        sbits = np.zeros(g.n_vertices, dtype=np.uint8)
        sbits[: g.n_meas] = s
        seg_w = self._segment_weights()
        status, sfull, _, _, _ = _grow(
            self.n_split, self.seg_a, self.seg_b, seg_w,
            self.ent_seg, self.ent_other,
            self.head0, self.tail0, self.nxt0, self.deg0, sbits, g.ghost,
        )
        if status != 0:
            raise RuntimeError(f"cluster growth failed (status {status})")
        if self.split:
            efull = sfull[0::2] & sfull[1::2]
        else:
            efull = sfull
        status, chosen = _peel(
            g.n_vertices, self.edge_u, self.edge_v, efull, sbits, g.ghost
        )
        if status != 0:
            raise RuntimeError("peeling found an odd component without boundary")
        edges = tuple(int(e) for e in np.nonzero(chosen)[0])
        w = g.weights
        weight = float(sum(w[e] for e in edges))
        return DecodeResult(g.restrict(edges), g.correction_residual(edges), edges, weight)


def decode(graph: DecodingGraph, record: SoftOutcomeRecord) -> DecodeResult:
    return UnionFindDecoder(graph).decode(record)
