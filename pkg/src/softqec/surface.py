"""Rotated surface code: layout, base decoding graphs, residual classification.

Layout convention (fixed once, used everywhere):

* data qubits sit on a d x d grid, indexed ``q = y*d + x`` for column x and
  row y in ``0..d-1``;
* a face is addressed by its lower-left corner ``(fx, fy)`` (possibly one
  step off-grid for weight-2 boundary faces) and is Z-type iff ``fx+fy`` is
  odd, X-type otherwise;
* weight-2 Z faces sit on the bottom/top boundary, weight-2 X faces on the
  left/right boundary, at alternating positions;
* logical X is the bottom row (y=0), logical Z the left column (x=0); the
  two overlap on exactly one qubit.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import lru_cache

from .chains import HyperGraph

FACE_CORNERS = {
    "SW": (0, 0),
    "SE": (1, 0),
    "NW": (0, 1),
    "NE": (1, 1),
}


@dataclass(frozen=True)
class RotatedCode:
    """A distance-d rotated surface code.

    z_plaquettes / x_plaquettes are qubit-index frozensets (size 4 interior,
    2 on the boundary); z_anchors / x_anchors give the lower-left face corner
    of the plaquette with the same list position.
    """

    d: int
    z_plaquettes: tuple
    x_plaquettes: tuple
    z_anchors: tuple
    x_anchors: tuple
    logical_x: frozenset
    logical_z: frozenset

    @property
    def n_qubits(self):
        return self.d * self.d

    def qubit_index(self, x, y):
        return y * self.d + x

    def qubit_position(self, q):
        return q % self.d, q // self.d

    def plaquettes(self, ptype):
        if ptype == "Z":
            return self.z_plaquettes
        if ptype == "X":
            return self.x_plaquettes
        raise ValueError(f"unknown plaquette type {ptype!r}")

    def anchors(self, ptype):
        return self.z_anchors if ptype == "Z" else self.x_anchors


@dataclass(frozen=True)
class PauliOperator:
    """A Pauli on the data qubits, split into X and Z supports (Y = both)."""

    x_support: frozenset
    z_support: frozenset

    @staticmethod
    def identity():
        return PauliOperator(frozenset(), frozenset())


@dataclass(frozen=True)
class BaseGraph:
    """Single-round decoding graph for one error basis.

    One edge per data qubit (edge id == qubit index).  Vertices
    ``0..n_meas-1`` are the plaquettes that detect errors of this basis;
    boundary ("white") vertices supply the second endpoint for qubits that
    touch a single such plaquette.
    """

    code: RotatedCode
    basis: str
    graph: HyperGraph
    measurement_vertices: tuple
    boundary_vertices: tuple
    edge_to_qubit: tuple


def build_rotated_code(d: int) -> RotatedCode:
    """Construct the distance-d rotated surface code (d odd, >= 1)."""
    if d < 1 or d % 2 == 0:
        raise ValueError(f"distance must be odd and positive, got {d}")
    z_plaq, z_anchor, x_plaq, x_anchor = [], [], [], []
    for fy in range(-1, d):
        for fx in range(-1, d):
            corners = [
                (fx + dx, fy + dy)
                for dx, dy in ((0, 0), (1, 0), (0, 1), (1, 1))
                if 0 <= fx + dx < d and 0 <= fy + dy < d
            ]
            if len(corners) < 2:
                continue
            is_z = (fx + fy) % 2 != 0
            if len(corners) == 2:
                # Weight-2 faces only on the matching boundary sides:
                # Z on bottom/top, X on left/right.
                on_bottom_top = fy in (-1, d - 1)
                if is_z != on_bottom_top:
                    continue
            qubits = frozenset(y * d + x for x, y in corners)
            if is_z:
                z_plaq.append(qubits)
                z_anchor.append((fx, fy))
            else:
                x_plaq.append(qubits)
                x_anchor.append((fx, fy))
    return RotatedCode(
        d=d,
        z_plaquettes=tuple(z_plaq),
        x_plaquettes=tuple(x_plaq),
        z_anchors=tuple(z_anchor),
        x_anchors=tuple(x_anchor),
        logical_x=frozenset(range(d)),          # row y = 0
        logical_z=frozenset(range(0, d * d, d)),  # column x = 0
    )


def detector_type(basis: str) -> str:
    """Plaquette type that detects errors of the given basis."""
    if basis == "X":
        return "Z"
    if basis == "Z":
        return "X"
    raise ValueError(f"unknown basis {basis!r}")


def opposite_logical(code: RotatedCode, basis: str) -> frozenset:
    """The logical operator that anticommutes with basis-type residuals."""
    return code.logical_z if basis == "X" else code.logical_x


def build_base_graph(code: RotatedCode, basis: str) -> BaseGraph:
    """One edge per data qubit; vertices are the detecting plaquettes.

    basis is the error type the graph decodes ("X" errors are detected by
    Z plaquettes and vice versa).
    """
    dets = code.plaquettes(detector_type(basis))
    n_meas = len(dets)
    incident = [[] for _ in range(code.n_qubits)]
    for i, plaq in enumerate(dets):
        for q in plaq:
            incident[q].append(i)
    edges = []
    boundary = []
    next_vertex = n_meas
    for q in range(code.n_qubits):
        faces = incident[q]
        if len(faces) == 2:
            edges.append((faces[0], faces[1]))
        elif len(faces) == 1:
            boundary.append(next_vertex)
            edges.append((faces[0], next_vertex))
            next_vertex += 1
        else:
            # d = 1 only: the lone qubit touches no plaquette at all.
            boundary.extend((next_vertex, next_vertex + 1))
            edges.append((next_vertex, next_vertex + 1))
            next_vertex += 2
    return BaseGraph(
        code=code,
        basis=basis,
        graph=HyperGraph(next_vertex, edges),
        measurement_vertices=tuple(range(n_meas)),
        boundary_vertices=tuple(boundary),
        edge_to_qubit=tuple(range(code.n_qubits)),
    )


def _mask(qubits) -> int:
    m = 0
    for q in qubits:
        m |= 1 << q
    return m


@lru_cache(maxsize=32)
def _code_masks(code: RotatedCode):
    return (
        tuple(_mask(p) for p in code.z_plaquettes),
        tuple(_mask(p) for p in code.x_plaquettes),
        _mask(code.logical_x),
        _mask(code.logical_z),
    )


def classify_residual_masks(code: RotatedCode, x_mask: int, z_mask: int) -> str:
    """Classify a residual Pauli given as qubit bitmasks.

    Raises ValueError if the residual anticommutes with any plaquette, which
    signals a decoder bug (corrections are guaranteed to restore a trivial
    syndrome).  Classification of a syndrome-free residual reduces to overlap
    parity with the anticommuting logical: the parity functional vanishes on
    the stabilizer group and is 1 on the logical coset.
    """
    z_masks, x_masks, lx, lz = _code_masks(code)
    for m in z_masks:
        if (x_mask & m).bit_count() & 1:
            raise ValueError("residual anticommutes with a Z plaquette")
    for m in x_masks:
        if (z_mask & m).bit_count() & 1:
            raise ValueError("residual anticommutes with an X plaquette")
    if (x_mask & lz).bit_count() & 1 or (z_mask & lx).bit_count() & 1:
        return "logical"
    if x_mask or z_mask:
        return "stabilizer"
    return "identity"


def classify_residual(p: PauliOperator, code: RotatedCode) -> str:
    """Classify a syndrome-free residual as identity, stabilizer or logical."""
    return classify_residual_masks(code, _mask(p.x_support), _mask(p.z_support))


def _dijkstra_parity(n_spatial: int, edges, source: int, target: int) -> float:
    """Min-weight walk source -> target picking up odd total parity.

    States are (vertex, parity); edges are (u, v, weight, parity).
    """
    INF = float("inf")
    dist = [[INF, INF] for _ in range(n_spatial)]
    adj = [[] for _ in range(n_spatial)]
    best_loop = INF
    for u, v, w, par in edges:
        if u == v:
            if par and u == source == target:
                best_loop = min(best_loop, w)
            if par:
                adj[u].append((u, w, 1))
            continue
        adj[u].append((v, w, par))
        adj[v].append((u, w, par))
    dist[source][0] = 0.0
    heap = [(0.0, source, 0)]
    while heap:
        du, u, pu = heapq.heappop(heap)
        if du > dist[u][pu]:
            continue
        for v, w, par in adj[u]:
            alt = du + w
            pv = pu ^ par
            if alt < dist[v][pv]:
                dist[v][pv] = alt
                heapq.heappush(heap, (alt, v, pv))
    return min(dist[target][1], best_loop)


def _spatial_endpoints(code: RotatedCode, basis: str, residual_mask: int):
    """Odd-incidence detecting plaquettes of a residual (None = boundary)."""
    det_masks = _code_masks(code)[0] if detector_type(basis) == "Z" else _code_masks(code)[1]
    odd = [i for i, m in enumerate(det_masks) if (m & residual_mask).bit_count() & 1]
    if len(odd) > 2:
        raise ValueError("residual touches more than two plaquettes")
    while len(odd) < 2:
        odd.append(None)
    return odd


def weighted_min_distance(g, weights=None) -> float:
    """Minimum total weight of a fault set whose residual is a logical.

    Accepts a BaseGraph (optionally with per-edge weights, default 1.0) or a
    DecodingGraph (uses its hard-edge weights and residuals).  Only edges
    with a data-qubit residual can contribute; the minimizer is a
    boundary-to-boundary walk whose residual has odd overlap with the
    anticommuting logical, found by Dijkstra over (vertex, parity) states.
    """
    if isinstance(g, BaseGraph):
        code = g.code
        n_det = len(g.measurement_vertices)
        ghost = n_det
        log_mask = _mask(opposite_logical(code, g.basis))
        if weights is None:
            weights = [1.0] * g.graph.edge_count
        edges = []
        for eid, (a, b) in enumerate(g.graph.edges):
            u = a if a < n_det else ghost
            v = b if b < n_det else ghost
            par = (log_mask >> g.edge_to_qubit[eid]) & 1
            edges.append((u, v, weights[eid], par))
        return _dijkstra_parity(n_det + 1, edges, ghost, ghost)

    # DecodingGraph (duck-typed): collapse spacetime edges onto the spatial
    # base graph through their residuals.
    code = g.code
    basis = g.basis
    n_det = len(code.plaquettes(detector_type(basis)))
    ghost = n_det
    log_mask = _mask(opposite_logical(code, basis))
    edges = []
    for eid in range(g.n_edges):
        mask = g.residual_masks[eid]
        if not mask:
            continue
        a, b = _spatial_endpoints(code, basis, mask)
        if a is None and b is None:
            continue  # residual is itself a (weight-2) stabilizer
        u = a if a is not None else ghost
        v = b if b is not None else ghost
        par = (mask & log_mask).bit_count() & 1
        edges.append((u, v, g.weights[eid], par))
    return _dijkstra_parity(n_det + 1, edges, ghost, ghost)
