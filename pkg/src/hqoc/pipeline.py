"""Concrete circuits of the sampling scheme, measurement post-processing,
error budget, and the end-to-end run.

Circuit constructors (gate lists in application order):

* ``build_prep_circuit(n, delta)``: the comb preparation
  ``U = H V^{n-1} e^{iP} V H M_{1/2}^n M_{2^{-z}}^{ceil(log2 1/Delta)}`` with
  ``V = (ctrl e^{i pi Q}) H (ctrl e^{-iP}) M_2``; exact size
  ``5n + ceil(log2 1/Delta) + 3``; output approximates the L = 2^n
  integer-spaced comb of width Delta (times the qubit |0>).
* ``build_code_prep`` / ``build_aux_prep``: append dyadic squeezer repetitions
  reaching the net dilation ``sqrt(2 pi d)``.
* ``build_wprep``: one code prep per system mode plus the auxiliary prep,
  all sharing qubit 0.
* ``build_wu``: gate-by-gate recompilation of a logical circuit with opaque
  bit-transfer nodes (declared parameters from their published analysis).

Measurement decoding divides a homodyne outcome by the fine peak spacing
``sqrt(2 pi / d)``, rounds, and reduces mod d; per-mode bit strings are
concatenated and the trailing dummy bits discarded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import (
    Circuit,
    Gate,
    blackbox,
    ctrl_disp_p,
    ctrl_disp_q,
    disp_p,
    qubit_gate,
    squeeze,
)
from .gkp import CombStateSpec, GkpParams, aux_params, canonical_params, comb_wavefunction, default_comb_grid
from .moments import ceil_log2
from .simulator import GridSpec, HybridState, apply_circuit, homodyne_sample, vacuum_state


@dataclass(frozen=True)
class EncodingLayout:
    """Block assignment of n logical qubits to m modes of ell bits each.

    ``K = (-n) mod m`` dummy qubits pad ``n`` to ``n' = n + K`` divisible by
    ``m``.  Logical qubit ``q`` (1-based) lands in mode ``(q-1) // ell`` at
    within-mode bit index ``ell - k`` where ``k = q - (alpha-1) ell``, i.e.
    the first qubit of a block is the most significant bit of the mode's
    logical index.
    """

    n: int
    m: int

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be positive")
        if self.m > self.n:
            raise ValueError("layout requires m <= n")

    @property
    def K(self) -> int:
        return (-self.n) % self.m

    @property
    def n_prime(self) -> int:
        return self.n + self.K

    @property
    def ell(self) -> int:
        return self.n_prime // self.m

    @property
    def d(self) -> int:
        return 2 ** self.ell

    def mode_and_bit(self, q: int) -> tuple[int, int]:
        """Logical qubit q (1-based) -> (mode index, iota bit index)."""
        if not (1 <= q <= self.n_prime):
            raise ValueError("logical qubit index out of range")
        alpha = (q - 1) // self.ell
        k = q - alpha * self.ell
        return alpha, self.ell - k

    def indices_for_bits(self, bits) -> list[int]:
        """Logical basis bits (length n) -> per-mode logical indices j."""
        bits = list(bits) + [0] * self.K
        out = []
        for alpha in range(self.m):
            block = bits[alpha * self.ell : (alpha + 1) * self.ell]
            j = 0
            for b in block:  # first bit of the block is the most significant
                j = (j << 1) | int(b)
            out.append(j)
        return out

    def bits_for_indices(self, indices) -> tuple[int, ...]:
        """Per-mode logical indices -> logical basis bits (length n)."""
        bits: list[int] = []
        for j in indices:
            bits.extend((int(j) >> (self.ell - 1 - i)) & 1 for i in range(self.ell))
        return tuple(bits[: self.n])


def discretize(x: float, ell: int):
    """round(x / sqrt(2 pi 2^-ell)) mod 2^ell, ties to even.

    Dividing by the fine peak spacing sqrt(2 pi / d) sends the peak at
    sqrt(2 pi d) z + sqrt(2 pi / d) j to z d + j, so the residue mod d is the
    logical index.
    """
    spacing = math.sqrt(2.0 * math.pi * 2.0 ** (-ell))
    return np.mod(np.rint(np.asarray(x) / spacing).astype(np.int64), 2 ** ell)


def post_process(y, layout: EncodingLayout) -> tuple[int, ...]:
    """Per-mode discretize -> bits -> concatenate -> discard trailing dummies."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape[-1] != layout.m:
        raise ValueError(f"expected {layout.m} homodyne values")
    indices = [int(discretize(y[alpha], layout.ell)) for alpha in range(layout.m)]
    return layout.bits_for_indices(indices)


# -- preparation circuits ------------------------------------------------------


def z_fraction(value: float) -> tuple[float, int]:
    """(z, reps) with z = log2(value)/ceil(log2 value); M_{2^-z}^reps dilates by 1/value."""
    reps = ceil_log2(value)
    return math.log2(value) / reps, reps


def build_prep_circuit(n: int, delta: float) -> Circuit:
    """Comb preparation circuit on one mode and one qubit; exact closed-form size."""
    if not (0 < delta <= 0.25):
        raise ValueError("delta must lie in (0, 1/4]")
    if n < 1:
        raise ValueError("n must be >= 1")
    z, reps = z_fraction(1.0 / delta)
    v_block = [
        squeeze(0, 2.0),
        ctrl_disp_p(0, 0, 1.0),
        qubit_gate("H", 0),
        ctrl_disp_q(0, 0, math.pi),
    ]
    gates: list[Gate] = []
    gates += [squeeze(0, 2.0 ** -z)] * reps
    gates += [squeeze(0, 0.5)] * n
    gates += [qubit_gate("H", 0)]
    gates += v_block
    gates += [disp_p(0, -1.0)]
    for _ in range(n - 1):
        gates += v_block
    gates += [qubit_gate("H", 0)]
    return Circuit(m=1, r=1, gates=tuple(gates))


def prep_size_formula(n: int, delta: float) -> int:
    return 5 * n + ceil_log2(1.0 / delta) + 3


def _code_prep(ell: int, delta: float, d: int) -> Circuit:
    if not (0 < delta < 0.25) or delta > 2.0 ** -(ell + 1):
        raise ValueError("code preparation requires delta <= 2^-(ell+1) and delta < 1/4")
    n = 2 * (ceil_log2(1.0 / delta) - ell)
    base = build_prep_circuit(n, delta)
    z_d, reps = z_fraction(math.sqrt(2.0 * math.pi * d))
    gates = base.gates + tuple(squeeze(0, 2.0 ** z_d) for _ in range(reps))
    return Circuit(m=1, r=1, gates=gates)


def build_code_prep(ell: int, delta: float) -> Circuit:
    """Preparation of the j=0 code state of the 2^ell-dimensional comb code."""
    return _code_prep(ell, delta, 2 ** ell)


def build_aux_prep(ell: int, delta: float) -> Circuit:
    """Preparation of the auxiliary d=2 comb state with parameters from level ell."""
    return _code_prep(ell, delta, 2)


def build_wprep(m: int, ell: int, delta: float) -> Circuit:
    """Code prep on each of the m system modes, then the auxiliary prep, sharing qubit 0."""
    if m < 1:
        raise ValueError("m must be >= 1")
    code = build_code_prep(ell, delta)
    aux = build_aux_prep(ell, delta)
    gates: list[Gate] = []
    for alpha in range(m):
        gates += [_relabel_mode(g, alpha) for g in code.gates]
    gates += [_relabel_mode(g, m) for g in aux.gates]
    return Circuit(m=m + 1, r=1, gates=tuple(gates))


def _relabel_mode(g: Gate, alpha: int) -> Gate:
    from dataclasses import replace

    if g.kind == "qubit_gate":
        return g
    return replace(g, mode=alpha)


# -- logical circuit recompilation (blackbox bit-transfer nodes) ------------------


def bit_transfer_declared(ell: int) -> dict:
    """Declared analysis parameters of one bit-transfer unit at level ell."""
    return {
        "g_bar": 4.0 * 2.0 ** (37 * ell),
        "xi_bar": 18.0 * 2.0 ** ell,
        "eta": 1.0,
        "size": 36 * ell,
    }


def build_wu(u_logical: Circuit, m: int, ell: int) -> Circuit:
    """Recompiled implementation of a qubit-only logical circuit.

    Acts on m+1 modes (mode m is auxiliary) and 3 qubits.  Each logical gate
    becomes bit-transfer blackboxes onto qubits 1/2, the physical gate, and
    the adjoint transfers.
    """
    if u_logical.m != 0:
        raise ValueError("logical circuits act on qubits only")
    if u_logical.r > m * ell:
        raise ValueError("logical circuit does not fit the encoding")
    decl = bit_transfer_declared(ell)
    aux = m
    gates: list[Gate] = []
    for g in u_logical.gates:
        if g.kind != "qubit_gate":
            raise ValueError("logical circuits may contain qubit gates only")
        target_bits = g.qubits
        boxes = []
        for idx, q in enumerate(target_bits):
            alpha = q // ell  # mode holding logical qubit q (0-based)
            boxes.append(blackbox((alpha, aux), (0, 1 + idx), **decl))
        gates += boxes
        gates.append(qubit_gate(g.name if g.name else np.asarray(g.matrix),
                                tuple(1 + i for i in range(len(target_bits)))))
        gates += list(reversed(boxes))
    return Circuit(m=m + 1, r=3, gates=tuple(gates))


@dataclass(frozen=True)
class PipelineCircuits:
    u_prep: Circuit
    u_code_prep: Circuit
    v_aux_prep: Circuit
    w_prep: Circuit
    w_u: Circuit
    w_tot: Circuit


def build_pipeline_circuits(
    u_logical: Circuit, n: int, m: int, delta: float
) -> PipelineCircuits:
    layout = EncodingLayout(n=n, m=m)
    ell = layout.ell
    n_comb = 2 * (ceil_log2(1.0 / delta) - ell)
    w_prep = build_wprep(m, ell, delta)
    w_u = build_wu(u_logical, m, ell)
    w_prep3 = Circuit(m=m + 1, r=3, gates=w_prep.gates)
    w_tot = Circuit(m=m + 1, r=3, gates=w_prep3.gates + w_u.gates)
    return PipelineCircuits(
        u_prep=build_prep_circuit(n_comb, delta),
        u_code_prep=build_code_prep(ell, delta),
        v_aux_prep=build_aux_prep(ell, delta),
        w_prep=w_prep,
        w_u=w_u,
        w_tot=w_tot,
    )


# -- error budget ----------------------------------------------------------------


@dataclass(frozen=True)
class ErrorBudget:
    """Analytic L1 error budget and circuit sizes of the compiled scheme."""

    eps_prep: float
    eps_gate: float
    eps_final: float
    l1_bound: float  # eps_final clamped at the trivial bound 2
    t_prep: int
    t_logical: int
    t_total: int

    def to_dict(self) -> dict:
        return {
            "eps_prep": self.eps_prep,
            "eps_gate": self.eps_gate,
            "eps_final": self.eps_final,
            "l1_bound": self.l1_bound,
            "sizes": {
                "T_prep": self.t_prep,
                "T_logical": self.t_logical,
                "T_total": self.t_total,
            },
        }


def error_budget(m: int, ell: int, delta: float, s: int) -> ErrorBudget:
    """eps_prep = 50 m (sqrt(Delta) + 2^{2 ell} Delta^2), eps_gate = 600 s 2^{2 ell} Delta."""
    if m < 1 or ell < 1 or s < 0 or not (0 < delta < 1):
        raise ValueError("invalid budget parameters")
    eps_prep = 50.0 * m * (math.sqrt(delta) + 2.0 ** (2 * ell) * delta ** 2)
    eps_gate = 600.0 * s * 2.0 ** (2 * ell) * delta
    eps_final = eps_prep + eps_gate
    t_prep = build_wprep(m, ell, delta).size if delta <= 2.0 ** -(ell + 1) else 0
    decl_size = 36 * ell
    t_logical = s * (4 * decl_size + 1)
    return ErrorBudget(
        eps_prep=eps_prep,
        eps_gate=eps_gate,
        eps_final=eps_final,
        l1_bound=min(2.0, eps_final),
        t_prep=t_prep,
        t_logical=t_logical,
        t_total=t_prep + t_logical,
    )


# -- analytic encoding and the end-to-end sampling run -----------------------------


def encoding_grid(layout: EncodingLayout, delta: float) -> GridSpec:
    """Shared dyadic grid for all encoded states of the layout (see default_comb_grid)."""
    spec = CombStateSpec(params=canonical_params(delta, layout.d), j=0)
    return default_comb_grid(spec)


def encode_basis_state(
    bits, layout: EncodingLayout, delta: float, grids=None
) -> HybridState:
    """Analytic encoding of a computational basis state into m comb modes."""
    bits = tuple(int(b) for b in bits)
    if len(bits) != layout.n:
        raise ValueError(f"expected {layout.n} logical bits")
    params = canonical_params(delta, layout.d)
    if grids is None:
        grids = [encoding_grid(layout, delta)] * layout.m
    indices = layout.indices_for_bits(bits)
    amps = np.ones((), dtype=complex)
    for alpha, j in enumerate(indices):
        mode = comb_wavefunction(CombStateSpec(params=params, j=j), grids[alpha])
        amps = np.multiply.outer(amps, mode.amps)
    return HybridState(layout.m, 0, tuple(grids), amps)


def encode_state(
    amplitudes: dict, layout: EncodingLayout, delta: float, grids=None
) -> HybridState:
    """Analytic encoding of a superposition {bits: amplitude} (m <= 2)."""
    if layout.m > 2:
        raise ValueError("full encoded superpositions are capped at m <= 2")
    if grids is None:
        grids = [encoding_grid(layout, delta)] * layout.m
    total = None
    for bits, coeff in amplitudes.items():
        basis = encode_basis_state(bits, layout, delta, grids)
        term = coeff * basis.amps
        total = term if total is None else total + term
    state = HybridState(layout.m, 0, tuple(grids), total)
    return state.normalize()


@dataclass(frozen=True)
class SamplingRun:
    samples: np.ndarray  # (shots, n) bits
    budget: ErrorBudget
    energy_report: dict
    layout: EncodingLayout


def logical_x_shift(layout: EncodingLayout, q: int) -> float:
    """Displacement implementing logical X on 1-based qubit q: shift by sqrt(2 pi/d) 2^bit."""
    alpha, bit = layout.mode_and_bit(q)
    return math.sqrt(2.0 * math.pi / layout.d) * 2.0 ** bit


def run_sampling_scheme(
    u_logical: Circuit, n: int, m: int, delta: float, shots: int, seed: int
) -> SamplingRun:
    """End-to-end run for logical circuits of identity/X gates (desk scale).

    Logical X gates are realized as physical position shifts by
    ``sqrt(2 pi / d) * 2^bit`` of the encoding mode, which permute the comb
    states; homodyne sampling plus post-processing yields the output bits.
    """
    if m > 2:
        raise ValueError("full tensor simulation is capped at m <= 2 modes")
    layout = EncodingLayout(n=n, m=m)
    for i, g in enumerate(u_logical.gates, start=1):
        if g.kind != "qubit_gate" or g.name not in ("X",):
            raise ValueError(
                f"simulable logical gates are restricted to X (gate {i}); "
                "general circuits are analyzed via blackbox recompilation only"
            )
    state = encode_basis_state((0,) * n, layout, delta)
    shift_gates = []
    for g in u_logical.gates:
        q = g.qubits[0] + 1
        alpha, _bit = layout.mode_and_bit(q)
        shift_gates.append(disp_p(alpha, logical_x_shift(layout, q)))
    if shift_gates:
        state = apply_circuit(state, Circuit(m=m, r=0, gates=tuple(shift_gates)))
    ys, _zs = homodyne_sample(state, shots, seed)
    samples = np.array([post_process(y, layout) for y in ys], dtype=np.int64)
    from .moments import analysis_report

    u_ext = Circuit(m=0, r=layout.n_prime, gates=u_logical.gates)
    w_tot = build_pipeline_circuits(u_ext, n, m, delta).w_tot
    budget = error_budget(m, layout.ell, delta, s=len(u_logical.gates))
    return SamplingRun(
        samples=samples,
        budget=budget,
        energy_report=analysis_report(w_tot),
        layout=layout,
    )


def sample_encoded_state(
    state: HybridState, layout: EncodingLayout, shots: int, seed: int
) -> np.ndarray:
    """Homodyne + post-processing of an already-encoded state."""
    ys, _ = homodyne_sample(state, shots, seed)
    return np.array([post_process(y, layout) for y in ys], dtype=np.int64)


def simulate_prep(n: int, delta: float, margin: float = 0.3, mem_cap_mb: float = 2048.0):
    """Simulate the comb preparation from vacuum; returns (state, circuit)."""
    from .simulator import auto_grid

    c = build_prep_circuit(n, delta)
    grids = auto_grid(c, base_margin=margin, mem_cap_mb=mem_cap_mb)
    state = vacuum_state(1, 1, grids)
    return apply_circuit(state, c), c


def prep_target_state(n: int, delta: float, grid: GridSpec) -> HybridState:
    """Analytic target |Sha_{2^n, Delta}> (x) |0> on the given grid."""
    from .gkp import untruncated_comb_wavefunction

    comb = untruncated_comb_wavefunction(2 ** n, delta, grid)
    amps = np.zeros(comb.amps.shape + (2,), dtype=complex)
    amps[:, 0] = comb.amps
    return HybridState(1, 1, (grid,), amps)


def _with_qubit_zero(mode_state: HybridState) -> HybridState:
    amps = np.zeros(mode_state.amps.shape + (2,), dtype=complex)
    amps[:, 0] = mode_state.amps
    return HybridState(1, 1, mode_state.grids, amps)


def code_prep_target(ell: int, delta: float, grid: GridSpec) -> HybridState:
    """Analytic |Sha*_Delta(0)_{2^ell}> (x) |0> on the given grid."""
    spec = CombStateSpec(params=canonical_params(delta, 2 ** ell), j=0)
    return _with_qubit_zero(comb_wavefunction(spec, grid, samples_per_sigma=1.0))


def aux_prep_target(ell: int, delta: float, grid: GridSpec) -> HybridState:
    """Analytic auxiliary state (x) |0> on the given grid."""
    spec = CombStateSpec(params=aux_params(delta, ell), j=0)
    return _with_qubit_zero(comb_wavefunction(spec, grid, samples_per_sigma=1.0))


def simulate_wprep_factorized(m: int, ell: int, delta: float, margin: float = 0.3) -> dict:
    """Verify the initial-state preparation block by block.

    The preparation circuit acts on each mode-qubit pair in sequence and
    approximately returns the shared qubit to |0>, so the m+1 blocks can be
    simulated independently; block trace distances against the analytic
    targets accumulate (triangle inequality) into the preparation error,
    which must stay below 50 m (sqrt(Delta) + 2^{2 ell} Delta^2).
    """
    from .simulator import auto_grid, trace_distance
    from .moments import AnalysisError  # noqa: F401

    blocks = [("code", build_code_prep(ell, delta), code_prep_target)] * m
    blocks.append(("aux", build_aux_prep(ell, delta), aux_prep_target))
    per_block = []
    qubit_dev = 0.0
    total = 0.0
    for label, circ, target_fn in blocks:
        grids = auto_grid(circ, base_margin=margin)
        state = apply_circuit(vacuum_state(1, 1, grids), circ)
        target = target_fn(ell, delta, state.grids[0])
        td = trace_distance(state, target)
        dev = 1.0 - float(np.sum(np.abs(state.amps[:, 0]) ** 2))
        per_block.append({"block": label, "trace_distance": td, "qubit_deviation": dev})
        qubit_dev += dev
        total += td
    bound = 50.0 * m * (math.sqrt(delta) + 2.0 ** (2 * ell) * delta ** 2)
    return {
        "per_block": per_block,
        "total_error": total,
        "qubit_deviation": qubit_dev,
        "bound": bound,
        "ok": total <= bound,
    }
