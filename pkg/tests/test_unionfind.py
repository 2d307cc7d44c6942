"""Union-find decoder: growth schedule, peeling, guarantees."""
from __future__ import annotations

import numpy as np
import pytest

from conftest import (
    brute_min_weight,
    defect_bits,
    edge_boundary_bits,
    hand_graph,
    random_small_model,
)
from softqec import decoding
from softqec.measurement import GaussianModel
from softqec.mwpm import MatchingDecoder
from softqec.noise import (
    CircuitSpec,
    build_circuit_model,
    build_pheno_model,
    syndrome_array,
)
from softqec.surface import classify_residual_masks, weighted_min_distance
from softqec.unionfind import UnionFindDecoder, _grow, _peel


def run_grow(uf, defect_vertices):
    g = uf.graph
    sbits = np.zeros(g.n_vertices, dtype=np.uint8)
    sbits[list(defect_vertices)] = 1
    status, sfull, gamma, order, n_steps = _grow(
        uf.n_split, uf.seg_a, uf.seg_b, uf._segment_weights(),
        uf.ent_seg, uf.ent_other,
        uf.head0, uf.tail0, uf.nxt0, uf.deg0, sbits, g.ghost,
    )
    assert status == 0
    return sfull, gamma, list(order[:n_steps])


# ---------------------------------------------------------------------------
# growth schedule
# ---------------------------------------------------------------------------


def three_cluster_graph():
    """Three defects: two of perimeter 3 adjacent to each other, one of
    perimeter 4 adjacent to the boundary; uniform weight 1."""
    edges = [
        (0, 1, 1.0),                  # shared between the perimeter-3 pair
        (0, 3, 1.0), (0, 4, 1.0),
        (1, 5, 1.0), (1, 6, 1.0),
        (2, 7, 1.0), (2, 8, 1.0), (2, 9, 1.0),
        (2, 10, 1.0),                 # vertex 10 is the ghost
    ]
    return hand_graph(10, edges)


def test_growth_order_minimum_perimeter_then_least_recent():
    g = three_cluster_graph()
    uf = UnionFindDecoder(g)
    sfull, gamma, order = run_grow(uf, [0, 1, 2])
    # the perimeter-3 clusters go first (one step each, merging into an even
    # cluster); the perimeter-4 cluster then needs two steps to reach the
    # boundary.  After a merge the root may be a midpoint vertex.
    assert len(order) == 4
    assert order[:3] == [0, 1, 2]
    cluster2_mids = {uf.graph.n_vertices + e for e in (5, 6, 7, 8)}
    assert order[3] in {2} | cluster2_mids
    efull = sfull[0::2] & sfull[1::2]
    assert list(np.nonzero(efull)[0]) == [0, 5, 6, 7, 8]
    # half-grown edges of the even pair stay half-grown
    assert all(gamma[2 * e] == 0.5 and gamma[2 * e + 1] == 0.0 for e in (1, 2))


def test_three_cluster_decode_result():
    g = three_cluster_graph()
    res = UnionFindDecoder(g).decode(s=np.array([1, 1, 1] + [0] * 7, dtype=np.uint8))
    assert res.edges == (0, 8)  # defect pair plus the boundary link
    assert res.weight == pytest.approx(2.0)


def test_adjacent_pair_grows_once_each():
    # two degree-3 defects sharing an edge: each grows a single step, the
    # second growth fills the shared edge and the merged cluster is even
    edges = [
        (0, 1, 1.0),
        (0, 2, 1.0), (0, 3, 1.0),
        (1, 4, 1.0), (1, 5, 1.0),
    ]
    g = hand_graph(6, edges)
    uf = UnionFindDecoder(g)
    sfull, gamma, order = run_grow(uf, [0, 1])
    assert order == [0, 1]
    efull = sfull[0::2] & sfull[1::2]
    assert list(np.nonzero(efull)[0]) == [0]
    res = uf.decode(s=np.array([1, 1, 0, 0, 0, 0], dtype=np.uint8))
    assert res.edges == (0,)


def test_empty_syndrome_no_growth():
    g = three_cluster_graph()
    uf = UnionFindDecoder(g)
    sfull, gamma, order = run_grow(uf, [])
    assert order == []
    assert not sfull.any()
    res = uf.decode(s=np.zeros(10, dtype=np.uint8))
    assert res.edges == ()
    assert res.weight == 0.0


def test_zero_weight_edges_pregrown():
    # the connecting edge has weight 0: the defect pair merges before any
    # growth step and peeling uses the pre-grown edge
    edges = [(0, 1, 0.0), (0, 2, 1.0), (1, 3, 1.0)]
    g = hand_graph(4, edges)
    uf = UnionFindDecoder(g)
    sfull, gamma, order = run_grow(uf, [0, 1])
    assert order == []
    res = uf.decode(s=np.array([1, 1, 0, 0], dtype=np.uint8))
    assert res.edges == (0,)
    assert res.weight == 0.0


def test_growth_state_never_exceeds_weight():
    rng = np.random.default_rng(33)
    for _ in range(20):
        model = random_small_model(rng)
        g = decoding.build(model, soft=True)
        uf = UnionFindDecoder(g)
        _, rec, _, _ = model.sample_arrays(rng)
        decoding.set_soft_weights(g, rec)
        s = syndrome_array(rec)
        sfull, gamma, order = run_grow(uf, list(np.nonzero(s)[0]))
        w = uf._segment_weights()
        assert np.all(gamma <= w + 1e-12)
        assert np.all(gamma[sfull == 1] == w[sfull == 1])
        assert np.all(gamma[sfull == 0] < w[sfull == 0])


# ---------------------------------------------------------------------------
# peeling
# ---------------------------------------------------------------------------


def peel(n_vertices, edges, full, defects, ghost):
    eu = np.array([e[0] for e in edges], dtype=np.int64)
    ev = np.array([e[1] for e in edges], dtype=np.int64)
    efull = np.array(full, dtype=np.uint8)
    sbits = np.zeros(n_vertices, dtype=np.uint8)
    sbits[list(defects)] = 1
    status, chosen = _peel(n_vertices, eu, ev, efull, sbits, ghost)
    return status, list(np.nonzero(chosen)[0])


def test_peel_path():
    status, chosen = peel(5, [(0, 1), (1, 2), (2, 3)], [1, 1, 1], [0, 3], 4)
    assert status == 0
    assert chosen == [0, 1, 2]


def test_peel_star_two_leaves():
    edges = [(0, 1), (0, 2), (0, 3), (0, 4)]
    status, chosen = peel(6, edges, [1, 1, 1, 1], [2, 3], 5)
    assert status == 0
    assert chosen == [1, 2]


def test_peel_empty_syndrome():
    status, chosen = peel(4, [(0, 1), (1, 2)], [1, 1], [], 3)
    assert status == 0
    assert chosen == []


def test_peel_boundary_absorbs():
    # lone defect whose component contains the ghost
    status, chosen = peel(3, [(0, 1), (1, 2)], [1, 1], [0], 2)
    assert status == 0
    assert chosen == [0, 1]


def test_peel_rejects_odd_component():
    status, _ = peel(3, [(0, 1)], [1], [0], 2)
    assert status == 3


# ---------------------------------------------------------------------------
# decode-level behaviour
# ---------------------------------------------------------------------------


def test_pair_matched_through_boundary():
    # each defect sits next to the ghost; the direct edge is too expensive
    g = hand_graph(2, [(0, 1, 10.0), (0, 2, 1.0), (1, 2, 1.0)])
    res = UnionFindDecoder(g).decode(s=np.array([1, 1], dtype=np.uint8))
    assert res.edges == (1, 2)
    assert res.weight == pytest.approx(2.0)


def test_single_fault_corrections_are_trivial():
    # every single hard fault must decode back to a stabilizer-equivalent
    # correction on the hard-input graph
    pair = build_pheno_model(3, 1, 0.1, 0.0, GaussianModel(sigma=0.5))
    for model in (pair.x, pair.z):
        g = decoding.build(model, soft=False)
        uf = UnionFindDecoder(g)
        for eid in range(g.n_hard):
            bits = edge_boundary_bits(g, [eid])
            s = np.array(
                [(bits >> v) & 1 for v in range(g.n_meas)], dtype=np.uint8
            )
            res = uf.decode(s=s)
            assert edge_boundary_bits(g, res.edges) == bits
            mask = g.hard_resid[eid] ^ res.residual
            x_mask, z_mask = (mask, 0) if model.basis == "X" else (0, mask)
            assert classify_residual_masks(model.code, x_mask, z_mask) != "logical"
            assert res.weight <= g.weights[eid] + 1e-9


def test_split_and_whole_edge_modes_agree_on_validity():
    rng = np.random.default_rng(44)
    pair = build_circuit_model(
        3, 3, CircuitSpec(p_ig=0.004, p_im=0.004, p_cnot=0.004),
        GaussianModel(sigma=0.45),
    )
    m = pair.x
    g = decoding.build(m, soft=True)
    dec_split = UnionFindDecoder(g, split=True)
    dec_whole = UnionFindDecoder(g, split=False)
    for _ in range(120):
        _, rec, _, _ = m.sample_arrays(rng)
        s = syndrome_array(rec)
        for dec in (dec_split, dec_whole):
            res = dec.decode(rec)
            assert edge_boundary_bits(g, res.edges) == defect_bits(s)


def test_union_find_never_beats_exact_matching():
    rng = np.random.default_rng(55)
    for _ in range(25):
        model = random_small_model(rng)
        g = decoding.build(model, soft=True)
        uf = UnionFindDecoder(g)
        mw = MatchingDecoder(g)
        _, rec, _, _ = model.sample_arrays(rng)
        s = syndrome_array(rec)
        r_uf = uf.decode(rec)
        r_mw = mw.decode(rec)
        assert edge_boundary_bits(g, r_uf.edges) == defect_bits(s)
        assert r_uf.weight >= r_mw.weight - 1e-6


# ---------------------------------------------------------------------------
# correction guarantee for light fault sets
# ---------------------------------------------------------------------------


def enumerate_light_subsets(weights, bound):
    """All edge subsets of total weight strictly below bound (DFS, sorted)."""
    order = np.argsort(weights)
    w = weights[order]
    out = []

    def rec(i, acc, chosen):
        out.append([int(order[j]) for j in chosen])
        for j in range(i, len(w)):
            if acc + w[j] >= bound:
                break
            chosen.append(j)
            rec(j + 1, acc + w[j], chosen)
            chosen.pop()

    rec(0, 0.0, [])
    return out


def test_light_fault_sets_always_corrected():
    pair = build_pheno_model(3, 2, 0.1, 0.35, GaussianModel(sigma=0.5))
    model = pair.x
    g = decoding.build(model, soft=True)
    # fix quantized weights so the enumeration bound is exact
    g.hard_weight = g.hard_weight.astype(np.float32).astype(np.float64)
    g.soft_weight[:] = np.float64(np.float32(0.8))
    d_w = weighted_min_distance(g)
    # two merged boundary edges plus one interior data edge form the
    # cheapest logical here, cheaper than three interior edges
    assert 0 < d_w < 3 * g.hard_weight.max()
    uf = UnionFindDecoder(g)
    subsets = enumerate_light_subsets(g.weights, d_w / 2.0)
    assert len(subsets) > 500
    for sub in subsets:
        bits = edge_boundary_bits(g, sub)
        s = np.array([(bits >> v) & 1 for v in range(g.n_meas)], dtype=np.uint8)
        res = uf.decode(s=s)
        assert edge_boundary_bits(g, res.edges) == bits
        mask = res.residual
        for eid in sub:
            if eid < g.n_hard:
                mask ^= g.hard_resid[eid]
        assert classify_residual_masks(model.code, mask, 0) != "logical"
