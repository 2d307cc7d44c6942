"""Graphical noise models: fault graphs over spacetime, sampling, syndromes.

A model for T rounds has one measurement vertex per (plaquette a, layer t)
for t = 1..T+1; the final layer is perfect (its hardened outcome equals its
ideal outcome and it carries no soft noise).  Each elementary fault is an
edge: its vertex set marks the plaquettes whose ideal outcome toggles from
that layer onward, and it carries a residual data-qubit Pauli for the error
basis the model tracks.  Faults affecting a single plaquette get a boundary
vertex as second endpoint.

Two builders ship: the phenomenological model (independent data errors per
layer, ideal-outcome flips between layers) and the circuit-level model, which
enumerates every fault location of the six-step syndrome extraction circuit
(ancilla prep, four CNOT layers, ancilla readout) and propagates each Pauli
through the remaining ideal circuit to find its edge and residual.  X and Z
error bases separate exactly under CNOT conjugation, so one propagation pass
fills both basis graphs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .chains import Chain, HyperGraph
from .surface import RotatedCode, build_rotated_code, detector_type

# corner offsets and gate order per face type: Z faces couple NW,NE,SW,SE;
# X faces couple NW,SW,NE,SE (boundary faces use the sub-steps of their
# existing corners); this orients both hook pairs perpendicular to the
# corresponding logical operator
_CORNER = {"NW": (0, 1), "NE": (1, 1), "SW": (0, 0), "SE": (1, 0)}
_ORDER = {"Z": ("NW", "NE", "SW", "SE"), "X": ("NW", "SW", "NE", "SE")}

_PAULI2 = [
    (a, b) for a in "IXYZ" for b in "IXYZ" if not (a == "I" and b == "I")
]  # 15 two-qubit faults, (control, target)
_PAULI1 = "XYZ"


@dataclass(frozen=True)
class CircuitSpec:
    """Fault probabilities of the six-step extraction circuit.

    p_ig: idle qubit during a CNOT layer; p_im: idle data qubit during
    ancilla readout; p_cnot: two-qubit fault after a CNOT; p_m: hard flip of
    the ideal readout value.
    """

    p_ig: float
    p_im: float
    p_cnot: float
    p_m: float = 0.0


@dataclass
class FaultClass:
    """One family of fault locations, repeated every round.

    Effects are stored per slot = loc * n_var + var, for both error bases:
    event offsets index (plaquette, layer-delta) as a + delta * n_plaq.
    A location fails with probability `prob`, choosing one of n_var variants
    uniformly; decoding uses prob/n_var per variant without the O(p^2)
    inclusive/exclusive conversion.
    """

    name: str
    prob: float
    n_var: int
    n_loc: int
    span_full: bool  # present in layer T+1 as well (data errors only)
    x_events: list
    z_events: list
    x_resid: list
    z_resid: list
    x_white: list | None = None  # per-slot white endpoint (pheno only)
    z_white: list | None = None

    def events(self, basis):
        if basis == "X":
            return self.x_events
        if basis == "Z":
            return self.z_events
        raise ValueError(f"basis must be 'X' or 'Z', got {basis!r}")

    def resid(self, basis):
        if basis == "X":
            return self.x_resid
        if basis == "Z":
            return self.z_resid
        raise ValueError(f"basis must be 'X' or 'Z', got {basis!r}")

    def white(self, basis):
        if basis == "X":
            return self.x_white
        if basis == "Z":
            return self.z_white
        raise ValueError(f"basis must be 'X' or 'Z', got {basis!r}")


@dataclass
class SoftOutcomeRecord:
    """Flat per-vertex outcome arrays, layer-major (t = 1..T+1).

    ideal/hard are bits; mu is the soft outcome (the final perfect layer
    stores +-1 exactly); weight is -log of the likelihood ratio of the
    discarded bit (+inf where no soft noise applies); sym is the known
    symmetrization bit already folded into hard.
    """

    rounds: int
    n_plaq: int
    ideal: np.ndarray
    mu: np.ndarray
    hard: np.ndarray
    weight: np.ndarray
    sym: np.ndarray

    def soft_flips(self):
        """Vertices whose hardened outcome disagrees with the ideal one."""
        return np.nonzero(self.hard != self.ideal)[0]


def syndrome_array(record: SoftOutcomeRecord) -> np.ndarray:
    """s[a,t] = hard[a,t] xor hard[a,t-1] with hard[a,0] = 0, flattened."""
    h = record.hard.reshape(record.rounds + 1, record.n_plaq)
    s = h.copy()
    s[1:] ^= h[:-1]
    return s.reshape(-1)


def syndrome(record: SoftOutcomeRecord) -> Chain:
    return Chain.make(0, np.nonzero(syndrome_array(record))[0].tolist())


# --------------------------------------------------------------------------
# syndrome extraction circuit
# --------------------------------------------------------------------------

def syndrome_circuit(code: RotatedCode):
    """The six-step schedule: prep, four collision-free CNOT layers, readout.

    Returns a dict with 'layers' (four lists of (ptype, plaq_idx, data_qubit)
    gates), 'n_anc', and 'steps' (the full six-step listing).  Z-plaquette
    ancillas are CNOT targets (|0> prep, Z readout); X-plaquette ancillas are
    CNOT controls (|+> prep, X readout).
    """
    d = code.d
    layers = [[] for _ in range(4)]
    for ptype in ("Z", "X"):
        for idx, (fx, fy) in enumerate(code.anchors(ptype)):
            for step, corner in enumerate(_ORDER[ptype]):
                dx, dy = _CORNER[corner]
                x, y = fx + dx, fy + dy
                if 0 <= x < d and 0 <= y < d:
                    layers[step].append((ptype, idx, code.qubit_index(x, y)))
    for k, layer in enumerate(layers):
        busy = [q for _, _, q in layer]
        if len(busy) != len(set(busy)):
            raise AssertionError(f"gate collision in layer {k}")
    n_anc = len(code.z_plaquettes) + len(code.x_plaquettes)
    steps = (
        [("prep", "all ancillas")]
        + [("gates", layer) for layer in layers]
        + [("measure", "all ancillas")]
    )
    return {"layers": layers, "n_anc": n_anc, "steps": steps}


def _bit_indices(mask: int):
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@lru_cache(maxsize=8)
def _circuit_template(d: int):
    """Probability-independent fault effects of one extraction round.

    For every (location, Pauli) the injected frame is conjugated through the
    remaining CNOT layers and the readout, then through one further ideal
    round, giving the flipped plaquettes at rounds t and t+1 plus the data
    residual, separately for the X and Z error bases.
    """
    code = build_rotated_code(d)
    circ = syndrome_circuit(code)
    layers = circ["layers"]
    d2 = d * d
    n_z = len(code.z_plaquettes)
    n_x = len(code.x_plaquettes)
    data_mask = (1 << d2) - 1

    def anc_bit(ptype, idx):
        return d2 + idx if ptype == "Z" else d2 + n_z + idx

    # per-layer (control_bit, target_bit); Z-face ancilla is the target
    gate_bits = [
        [
            ((q, anc_bit(pt, i)) if pt == "Z" else (anc_bit(pt, i), q))
            for pt, i, q in layer
        ]
        for layer in layers
    ]

    def conjugate(x, z, from_layer):
        for k in range(from_layer, 4):
            for c, t in gate_bits[k]:
                if (x >> c) & 1:
                    x ^= 1 << t
                if (z >> t) & 1:
                    z ^= 1 << c
        return x, z

    def readout_flips(x, z):
        # Z-face ancillas read out in Z basis (flip iff X component);
        # X-face ancillas in X basis (flip iff Z component)
        fx = [i for i in _bit_indices((x >> d2) & ((1 << n_z) - 1))]
        fz = [j for j in _bit_indices(z >> (d2 + n_z))]
        return fx, fz

    def effects(x0, z0, after_layer):
        x, z = conjugate(x0, z0, after_layer + 1)
        f1x, f1z = readout_flips(x, z)
        rx, rz = x & data_mask, z & data_mask
        x2, z2 = conjugate(rx, rz, 0)
        if (x2 & data_mask) != rx or (z2 & data_mask) != rz:
            raise AssertionError("residual not invariant under an ideal round")
        f2x, f2z = readout_flips(x2, z2)

        def edge(f1, f2, resid, n_plaq, logical):
            ev = [a for a in f1] + [a + n_plaq for a in set(f1) ^ set(f2)]
            if len(ev) > 2:
                raise AssertionError("fault violates rank-2 after basis split")
            if not ev and resid:
                # syndrome-free residual: on weight-2 boundary faces the hook
                # equals the face stabilizer, which acts trivially; anything
                # logical here would be an undetectable failure of the code
                if bin(resid & logical).count("1") & 1:
                    raise AssertionError("syndrome-free fault acts as a logical")
                resid = 0
            return tuple(sorted(ev)), resid

        lx = sum(1 << q for q in code.logical_x)
        lz = sum(1 << q for q in code.logical_z)
        ex, rx = edge(f1x, f2x, rx, n_z, lz)
        ez, rz = edge(f1z, f2z, rz, n_x, lx)
        return ex, rx, ez, rz

    def pauli_bits(p, bitpos):
        x = (1 << bitpos) if p in "XY" else 0
        z = (1 << bitpos) if p in "ZY" else 0
        return x, z

    # gate faults: one location per gate, 15 two-qubit Paulis
    gx, gz, grx, grz = [], [], [], []
    n_gates = 0
    for k, layer in enumerate(layers):
        for (pt, i, q), (c, t) in zip(layer, gate_bits[k]):
            n_gates += 1
            for pc, ptgt in _PAULI2:
                xc, zc = pauli_bits(pc, c)
                xt, zt = pauli_bits(ptgt, t)
                ex, rx, ez, rz = effects(xc | xt, zc | zt, k)
                gx.append(ex)
                gz.append(ez)
                grx.append(rx)
                grz.append(rz)

    # idle-during-gate faults: every qubit not acted on in each layer
    ix, iz, irx, irz = [], [], [], []
    n_idle_g = 0
    all_bits = list(range(d2 + n_z + n_x))
    for k, layer in enumerate(layers):
        busy = {c for c, t in gate_bits[k]} | {t for c, t in gate_bits[k]}
        for b in all_bits:
            if b in busy:
                continue
            n_idle_g += 1
            for p in _PAULI1:
                xb, zb = pauli_bits(p, b)
                ex, rx, ez, rz = effects(xb, zb, k)
                ix.append(ex)
                iz.append(ez)
                irx.append(rx)
                irz.append(rz)

    # idle-during-readout faults on data qubits: nothing propagates this
    # round, so the effect is the residual alone, detected next round
    mx, mz, mrx, mrz = [], [], [], []
    for q in range(d2):
        for p in _PAULI1:
            xb, zb = pauli_bits(p, q)
            ex, rx, ez, rz = effects(xb, zb, 4)
            mx.append(ex)
            mz.append(ez)
            mrx.append(rx)
            mrz.append(rz)

    # ideal-readout flips: a vertical edge in the basis the plaquette detects
    fx, fz = [], []
    for i in range(n_z):
        fx.append((i, i + n_z))
        fz.append(())
    for j in range(n_x):
        fx.append(())
        fz.append((j, j + n_x))

    classes = [
        FaultClass("gate", 0.0, 15, n_gates, False, gx, gz, grx, grz),
        FaultClass("idle_gate", 0.0, 3, n_idle_g, False, ix, iz, irx, irz),
        FaultClass("idle_meas", 0.0, 3, d2, False, mx, mz, mrx, mrz),
        FaultClass(
            "meas_flip", 0.0, 1, n_z + n_x, False, fx, fz,
            [0] * (n_z + n_x), [0] * (n_z + n_x),
        ),
    ]
    return code, classes


# --------------------------------------------------------------------------
# graphical models
# --------------------------------------------------------------------------

class GraphicalModel:
    """One error basis of a spacetime fault model.

    The primary representation is a per-round template (fault classes with
    per-slot effects); the explicit fault graph over all layers is
    materialized lazily for inspection, validation and export.
    """

    def __init__(self, code, basis, rounds, classes, soft_model,
                 symmetrize=False, n_white_layer=0):
        if rounds < 1:
            raise ValueError("rounds must be >= 1")
        self.code = code
        self.basis = basis
        self.rounds = rounds
        self.classes = classes
        self.soft_model = soft_model
        self.symmetrize = symmetrize
        self.n_plaq = len(code.plaquettes(detector_type(basis)))
        self.n_white_layer = n_white_layer
        for cls in classes:
            if cls.prob >= 0.5:
                raise ValueError(f"class {cls.name}: p = {cls.prob} violates p < 0.5")
        self._build_template()
        self._graph_cache = None

    # -- template ----------------------------------------------------------
    def _build_template(self):
        ev, prob, resid, white, span, src = [], [], [], [], [], []
        self._slot_to_tmpl = []
        for ci, cls in enumerate(self.classes):
            events = cls.events(self.basis)
            resids = cls.resid(self.basis)
            whites = cls.white(self.basis)
            lut = np.full(cls.n_loc * cls.n_var, -1, dtype=np.int64)
            if cls.prob > 0.0:
                p_e = cls.prob / cls.n_var
                for slot in range(cls.n_loc * cls.n_var):
                    if not events[slot]:
                        continue
                    lut[slot] = len(ev)
                    ev.append(events[slot])
                    prob.append(p_e)
                    resid.append(resids[slot])
                    white.append(whites[slot] if whites is not None else None)
                    span.append(cls.span_full)
                    src.append((ci, slot))
            self._slot_to_tmpl.append(lut)
        self.tmpl_events = ev
        self.tmpl_probs = np.array(prob, dtype=float)
        self.tmpl_resid = resid
        self.tmpl_white = white
        self.tmpl_span_full = np.array(span, dtype=bool)
        self.tmpl_source = src
        self.n_tmpl = len(ev)
        self._final_rank = np.cumsum(self.tmpl_span_full) - 1

    @property
    def n_meas(self):
        return self.n_plaq * (self.rounds + 1)

    @property
    def n_boundary(self):
        if self.n_white_layer:
            return self.n_white_layer * (self.rounds + 1)
        return 1

    @property
    def measurement_vertices(self):
        return range(self.n_meas)

    @property
    def n_edges(self):
        return self.rounds * self.n_tmpl + int(self.tmpl_span_full.sum())

    def edge_id(self, t_idx: int, tmpl_idx: int) -> int:
        if t_idx < self.rounds:
            return t_idx * self.n_tmpl + tmpl_idx
        return self.rounds * self.n_tmpl + int(self._final_rank[tmpl_idx])

    def edge_layer_tmpl(self, eid: int):
        """Inverse of edge_id."""
        if eid < self.rounds * self.n_tmpl:
            return divmod(eid, self.n_tmpl)
        j = int(np.searchsorted(self._final_rank, eid - self.rounds * self.n_tmpl))
        while not self.tmpl_span_full[j]:
            j += 1
        return self.rounds, j

    def _edge_vertices(self, t_idx, tmpl_idx):
        base = t_idx * self.n_plaq
        verts = [base + o for o in self.tmpl_events[tmpl_idx]]
        if len(verts) == 1:
            w = self.tmpl_white[tmpl_idx]
            if w is None or not self.n_white_layer:
                verts.append(self.n_meas)  # shared boundary vertex
            else:
                verts.append(self.n_meas + t_idx * self.n_white_layer + w)
        return tuple(verts)

    # -- explicit graph (lazy) ----------------------------------------------
    def _materialize(self):
        if self._graph_cache is None:
            edges, probs, resid = [], [], []
            for t_idx in range(self.rounds + 1):
                for j in range(self.n_tmpl):
                    if t_idx == self.rounds and not self.tmpl_span_full[j]:
                        continue
                    edges.append(self._edge_vertices(t_idx, j))
                    probs.append(self.tmpl_probs[j])
                    resid.append(self.tmpl_resid[j])
            g = HyperGraph(self.n_meas + self.n_boundary, edges)
            self._graph_cache = (g, np.array(probs), resid)
        return self._graph_cache

    @property
    def fault_graph(self) -> HyperGraph:
        return self._materialize()[0]

    @property
    def edge_probs(self) -> np.ndarray:
        return self._materialize()[1]

    @property
    def residual_masks(self):
        return self._materialize()[2]

    @property
    def weights(self):
        """Hard-edge weights -log(p/(1-p)), aligned with the explicit edges."""
        p = self.edge_probs
        return -np.log(p / (1.0 - p))

    @property
    def vertex_models(self):
        noisy = self.rounds * self.n_plaq
        return [self.soft_model] * noisy + [None] * self.n_plaq

    # -- sampling ------------------------------------------------------------
    def _apply_faults(self, faults, events, resid):
        """XOR the effects of chosen (class, t_idx, loc, var) faults."""
        basis = self.basis
        for ci, t_idx, loc, var in faults:
            cls = self.classes[ci]
            slot = loc * cls.n_var + var
            base = t_idx * self.n_plaq
            for o in cls.events(basis)[slot]:
                events[base + o] ^= 1
            resid ^= cls.resid(basis)[slot]
        return resid

    def ideal_outcomes(self, events: np.ndarray) -> np.ndarray:
        """Prefix-XOR over layers: an event toggles all later outcomes."""
        ev = events.reshape(self.rounds + 1, self.n_plaq)
        return (np.cumsum(ev, axis=0) & 1).astype(np.uint8).reshape(-1)

    def make_record(self, events: np.ndarray, rng) -> SoftOutcomeRecord:
        T, n = self.rounds, self.n_plaq
        ideal = self.ideal_outcomes(events)
        n_noisy = T * n
        mu = np.empty(T * n + n)
        hard = np.empty(T * n + n, dtype=np.uint8)
        weight = np.full(T * n + n, np.inf)
        sym = np.zeros(T * n + n, dtype=np.uint8)
        if self.symmetrize:
            sym[:n_noisy] = rng.integers(0, 2, size=n_noisy, dtype=np.uint8)
        eff = ideal[:n_noisy] ^ sym[:n_noisy]
        ones = eff.astype(bool)
        m = self.soft_model
        mu_noisy = np.empty(n_noisy)
        n1 = int(ones.sum())
        if n1 < n_noisy:
            mu_noisy[~ones] = m.sample0(rng, n_noisy - n1)
        if n1:
            mu_noisy[ones] = m.sample1(rng, n1)
        w, bit = m.weight_and_bit(mu_noisy)
        mu[:n_noisy] = mu_noisy
        hard[:n_noisy] = bit ^ sym[:n_noisy]
        weight[:n_noisy] = w
        # perfect final layer: report the ideal outcome exactly
        mu[n_noisy:] = 1.0 - 2.0 * ideal[n_noisy:]
        hard[n_noisy:] = ideal[n_noisy:]
        return SoftOutcomeRecord(T, n, ideal, mu, hard, weight, sym)

    def draw_faults(self, rng):
        """One exclusive sample of fault locations, all classes."""
        out = []
        for ci, cls in enumerate(self.classes):
            for t_idx, loc, var in _draw_class(cls, self.rounds, rng):
                out.append((ci, t_idx, loc, var))
        return out

    def sample_arrays(self, rng):
        """(event parities, record, residual mask, faults) for one shot."""
        events = np.zeros(self.n_meas, dtype=np.uint8)
        faults = self.draw_faults(rng)
        resid = self._apply_faults(faults, events, 0)
        record = self.make_record(events, rng)
        return events, record, resid, faults

    def fault_chain(self, faults) -> Chain:
        """Edge ids (in the explicit graph) of the visible chosen faults."""
        ids = []
        for ci, t_idx, loc, var in faults:
            cls = self.classes[ci]
            j = self._slot_to_tmpl[ci][loc * cls.n_var + var]
            if j >= 0:
                ids.append(self.edge_id(t_idx, j))
        return Chain.make(1, ids)


def _draw_class(cls: FaultClass, rounds: int, rng):
    """Exact Bernoulli process over cls.n_loc * span locations."""
    span = rounds + 1 if cls.span_full else rounds
    n_total = cls.n_loc * span
    if cls.prob <= 0.0 or n_total == 0:
        return []
    if cls.prob * cls.n_loc * span * cls.prob > 0.05:
        # dense regime: per-location thinning
        hits = np.nonzero(rng.random(n_total) < cls.prob)[0]
    else:
        k = int(rng.binomial(n_total, cls.prob))
        if k == 0:
            return []
        hits = rng.integers(0, n_total, size=k)
        while len(np.unique(hits)) != k:  # collisions are rare; redraw exactly
            hits = rng.integers(0, n_total, size=k)
    if hits.size == 0:
        return []
    if cls.n_var > 1:
        variants = rng.integers(0, cls.n_var, size=hits.size)
    else:
        variants = np.zeros(hits.size, dtype=np.int64)
    t_idx, loc = np.divmod(hits, cls.n_loc)
    return list(zip(t_idx.tolist(), loc.tolist(), variants.tolist()))


@dataclass
class ModelPair:
    """X- and Z-basis graphical models of one noise process.

    For circuit noise the two bases share the physical fault locations, so a
    trial must draw them jointly; phenomenological noise treats the bases as
    independent processes.
    """

    x: GraphicalModel
    z: GraphicalModel
    correlated: bool

    def sample_trial(self, rng):
        """((events, record, resid) for X, same for Z), jointly sampled."""
        if self.correlated:
            faults = self.x.draw_faults(rng)
            ev_x = np.zeros(self.x.n_meas, dtype=np.uint8)
            ev_z = np.zeros(self.z.n_meas, dtype=np.uint8)
            rx = self.x._apply_faults(faults, ev_x, 0)
            rz = self.z._apply_faults(faults, ev_z, 0)
            rec_x = self.x.make_record(ev_x, rng)
            rec_z = self.z.make_record(ev_z, rng)
            return (ev_x, rec_x, rx), (ev_z, rec_z, rz)
        ev_x, rec_x, rx, _ = self.x.sample_arrays(rng)
        ev_z, rec_z, rz, _ = self.z.sample_arrays(rng)
        return (ev_x, rec_x, rx), (ev_z, rec_z, rz)


def sample(model: GraphicalModel, rng):
    """Spec-level single-basis sample: (fault chain, outcome record)."""
    _, record, _, faults = model.sample_arrays(rng)
    return model.fault_chain(faults), record


# --------------------------------------------------------------------------
# builders
# --------------------------------------------------------------------------

def _pheno_classes(code, basis, p_d, p_m):
    """'space' data errors every layer; 'time' outcome flips between layers."""
    dets = code.plaquettes(detector_type(basis))
    n_plaq = len(dets)
    incident = [[] for _ in range(code.n_qubits)]
    for i, plaq in enumerate(dets):
        for q in plaq:
            incident[q].append(i)
    # white endpoints numbered in qubit scan order, as in the base graph
    whites = {}
    for q in range(code.n_qubits):
        if len(incident[q]) == 1:
            whites[q] = len(whites)
    space_ev = [tuple(sorted(incident[q])) for q in range(code.n_qubits)]
    space_resid = [1 << q for q in range(code.n_qubits)]
    space_white = [whites.get(q) for q in range(code.n_qubits)]
    time_ev = [(a, a + n_plaq) for a in range(n_plaq)]
    empty = [()] * code.n_qubits
    zeros = [0] * code.n_qubits
    space = FaultClass(
        "space", p_d, 1, code.n_qubits, True,
        x_events=space_ev if basis == "X" else empty,
        z_events=space_ev if basis == "Z" else empty,
        x_resid=space_resid if basis == "X" else zeros,
        z_resid=space_resid if basis == "Z" else zeros,
        x_white=space_white if basis == "X" else None,
        z_white=space_white if basis == "Z" else None,
    )
    tzeros = [0] * n_plaq
    tempty = [()] * n_plaq
    time = FaultClass(
        "time", p_m, 1, n_plaq, False,
        x_events=time_ev if basis == "X" else tempty,
        z_events=time_ev if basis == "Z" else tempty,
        x_resid=tzeros, z_resid=tzeros,
    )
    return [space, time], len(whites)


def build_pheno_model(d, T, p_d, p_m, soft, symmetrize=False) -> ModelPair:
    """Stacked-layer model: data errors in all T+1 layers, flips in T gaps."""
    code = build_rotated_code(d)
    models = {}
    for basis in ("X", "Z"):
        classes, n_white = _pheno_classes(code, basis, p_d, p_m)
        models[basis] = GraphicalModel(
            code, basis, T, classes, soft, symmetrize, n_white_layer=n_white
        )
    return ModelPair(models["X"], models["Z"], correlated=False)


def build_circuit_model(d, T, spec: CircuitSpec, soft, symmetrize=False) -> ModelPair:
    """Circuit-level model from the six-step extraction schedule."""
    code, template = _circuit_template(d)
    probs = {
        "gate": spec.p_cnot,
        "idle_gate": spec.p_ig,
        "idle_meas": spec.p_im,
        "meas_flip": spec.p_m,
    }
    classes = [
        FaultClass(
            c.name, probs[c.name], c.n_var, c.n_loc, c.span_full,
            c.x_events, c.z_events, c.x_resid, c.z_resid,
        )
        for c in template
    ]
    mx = GraphicalModel(code, "X", T, classes, soft, symmetrize)
    mz = GraphicalModel(code, "Z", T, classes, soft, symmetrize)
    return ModelPair(mx, mz, correlated=True)


def build_parametric_circuit_model(d, T, tau_g, tau_m, tau_d, tau_a, tau_f,
                                   beta=None, symmetrize=True) -> ModelPair:
    """Circuit model with duration-derived probabilities and damping readout.

    p_ig = p_cnot = 1 - exp(-tau_g/tau_d), p_im = 1 - exp(-tau_m/tau_d),
    p_m = 0; the readout model is AmplitudeDamping(tau_m, tau_a, tau_f) with
    an optional explicit decision boundary.  Symmetrization defaults on since
    the damping model is asymmetric.
    """
    from .measurement import AmplitudeDampingModel

    p_ig = 1.0 - np.exp(-tau_g / tau_d)
    p_im = 1.0 - np.exp(-tau_m / tau_d)
    spec = CircuitSpec(p_ig=p_ig, p_im=p_im, p_cnot=p_ig, p_m=0.0)
    soft = AmplitudeDampingModel(tau_m, tau_a, tau_f, beta=beta)
    return build_circuit_model(d, T, spec, soft, symmetrize=symmetrize)


def validate(model) -> list:
    """C1/C2 and structural checks; empty list means the model is valid.

    Works on anything exposing fault_graph, edge_probs, residual_masks and
    n_meas, so hand-built models can be checked too.
    """
    problems = []
    g = model.fault_graph
    probs = model.edge_probs
    resid = model.residual_masks
    n_meas = model.n_meas
    data_mask = (1 << model.code.n_qubits) - 1
    for eid, verts in enumerate(g.edges):
        if len(verts) != 2:
            problems.append(f"C1: edge {eid} has rank {len(verts)}")
        if probs[eid] >= 0.5:
            problems.append(f"C2: edge {eid} has p = {probs[eid]}")
        if probs[eid] <= 0.0:
            problems.append(f"edge {eid} has nonpositive probability")
        if resid[eid] & ~data_mask:
            problems.append(f"edge {eid} residual leaves the data qubits")
        if all(v >= n_meas for v in verts) and len(set(verts)) == len(verts):
            if resid[eid] == 0:
                problems.append(f"edge {eid} joins only boundary vertices")
    return problems
