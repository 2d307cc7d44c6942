"""Shared helpers: hand-built decoding graphs and brute-force oracles."""
from __future__ import annotations

import numpy as np

from softqec import decoding
from softqec.measurement import GaussianModel
from softqec.noise import FaultClass, GraphicalModel
from softqec.surface import build_rotated_code


def hand_graph(n_vertices, edges, n_soft=0, rounds=0):
    """DecodingGraph over explicit (u, v, weight) hard edges.

    Vertex ids < n_vertices are real; n_vertices is the ghost.  Origins are
    the edge positions so restrict() round-trips.
    """
    us = np.array([e[0] for e in edges], dtype=np.int64)
    vs = np.array([e[1] for e in edges], dtype=np.int64)
    ws = np.array([e[2] for e in edges], dtype=float)
    ps = 1.0 / (1.0 + np.exp(ws))  # consistent p for w = -log(p/(1-p))
    assert n_vertices % (rounds + 1) == 0
    return decoding.DecodingGraph(
        code=None,
        basis="X",
        rounds=rounds,
        n_plaq=n_vertices // (rounds + 1),
        hard_u=us,
        hard_v=vs,
        hard_p=ps,
        hard_weight=ws,
        hard_resid=[0] * len(edges),
        hard_origin=list(range(len(edges))),
        n_soft=n_soft,
    )


def random_small_model(rng, sigma=None):
    """Random graphical model on the distance-3 X-basis skeleton, T=1.

    One single-location fault class per edge: 8 measurement vertices, at
    most 12 hard edges (boundary edges where the pair degenerates), random
    probabilities and residual masks.
    """
    code = build_rotated_code(3)
    n_edges = int(rng.integers(4, 13))
    classes = []
    for k in range(n_edges):
        if rng.integers(0, 3) == 0:
            ev = (int(rng.integers(0, 8)),)
        else:
            u, v = rng.choice(8, size=2, replace=False)
            ev = (int(min(u, v)), int(max(u, v)))
        classes.append(
            FaultClass(
                name=f"e{k}",
                prob=float(rng.uniform(0.02, 0.45)),
                n_var=1,
                n_loc=1,
                span_full=False,
                x_events=[ev],
                z_events=[ev],
                x_resid=[int(rng.integers(0, 1 << 9))],
                z_resid=[0],
            )
        )
    s = sigma if sigma is not None else float(rng.uniform(0.35, 1.2))
    return GraphicalModel(code, "X", 1, classes, GaussianModel(sigma=s))


def defect_bits(s):
    bits = 0
    for v in np.nonzero(np.asarray(s).reshape(-1))[0]:
        bits |= 1 << int(v)
    return bits


def edge_boundary_bits(g, edges):
    """Packed parity of the edge set on the measurement vertices."""
    bits = 0
    for eid in edges:
        u, v = g.edge_endpoints(eid)
        if u < g.n_meas:
            bits ^= 1 << u
        if v < g.n_meas:
            bits ^= 1 << v
    return bits


def brute_min_weight(g, s):
    """Exhaustive minimum weight over all syndrome-consistent edge subsets.

    Subset-doubling over all 2^n_edges subsets; feasible to ~20 edges.
    """
    n_e = g.n_edges
    assert n_e <= 20, "graph too large for exhaustive search"
    masks = np.zeros(n_e, dtype=np.uint32)
    for eid in range(n_e):
        masks[eid] = edge_boundary_bits(g, [eid])
    w = g.weights
    X = np.zeros(1 << n_e, dtype=np.uint32)
    W = np.zeros(1 << n_e)
    for j in range(n_e):
        lo = 1 << j
        X[lo : 2 * lo] = X[:lo] ^ masks[j]
        W[lo : 2 * lo] = W[:lo] + w[j]
    sel = X == np.uint32(defect_bits(s))
    assert sel.any(), "no consistent subset exists"
    return float(W[sel].min())
