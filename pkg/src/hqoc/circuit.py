"""Circuit IR for the hybrid qubit-oscillator elementary gate set.

A circuit acts on ``m`` oscillator modes and ``r`` qubits.  Oscillator gates
are single-mode only: displacements ``e^{itQ}`` / ``e^{-itP}``, their
qubit-controlled variants, and squeezers ``M_alpha``.  Qubit gates are named
(H, S, T, X, Z, CZ, CNOT) or explicit 2x2 / 4x4 unitaries.  Opaque "blackbox"
nodes stand in for composite subcircuits (e.g. bit-transfer units) whose
internals are not expanded; they carry declared analysis parameters
``(g_bar, xi_bar, eta)`` and a declared gate count.

Gate lists are stored in application order: ``gates[0]`` is applied first
(an operator product ``U_T ... U_1`` is stored as ``[U_1, ..., U_T]``).

Conventions pinned here and used throughout the package:

* ``disp_q(mode, t)``  is ``e^{itQ}``   (multiplies the wavefunction by ``e^{itx}``),
* ``disp_p(mode, t)``  is ``e^{-itP}``  (translates the wavefunction by ``+t``),
* ``squeeze(mode, alpha)`` is ``M_alpha`` with ``M_alpha^dag Q M_alpha = alpha Q``
  (a state peaked at ``x0`` is mapped to one peaked at ``alpha * x0``).
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

GATE_KINDS = (
    "disp_q",
    "disp_p",
    "ctrl_disp_q",
    "ctrl_disp_p",
    "squeeze",
    "qubit_gate",
    "blackbox",
)

DISPLACEMENT_KINDS = ("disp_q", "disp_p", "ctrl_disp_q", "ctrl_disp_p")
CONTROLLED_KINDS = ("ctrl_disp_q", "ctrl_disp_p")

_SQRT2 = math.sqrt(2.0)

NAMED_QUBIT_GATES: dict[str, tuple[tuple[complex, ...], ...]] = {
    "H": ((1 / _SQRT2, 1 / _SQRT2), (1 / _SQRT2, -1 / _SQRT2)),
    "X": ((0, 1), (1, 0)),
    "Z": ((1, 0), (0, -1)),
    "S": ((1, 0), (0, 1j)),
    "T": ((1, 0), (0, cmath.exp(1j * math.pi / 4))),
    "CZ": (
        (1, 0, 0, 0),
        (0, 1, 0, 0),
        (0, 0, 1, 0),
        (0, 0, 0, -1),
    ),
    "CNOT": (
        (1, 0, 0, 0),
        (0, 1, 0, 0),
        (0, 0, 0, 1),
        (0, 0, 1, 0),
    ),
}


class CircuitError(ValueError):
    """Raised on malformed gates/circuits; carries a 1-based gate position."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position


@dataclass(frozen=True, eq=False)
class Gate:
    """A single elementary operation (or an opaque blackbox node).

    Only the fields relevant to ``kind`` are set; the rest stay ``None``/empty.
    """

    kind: str
    mode: int | None = None
    qubit: int | None = None
    qubits: tuple[int, ...] = ()
    modes: tuple[int, ...] = ()
    t: float | None = None
    alpha: float | None = None
    name: str | None = None
    matrix: tuple[tuple[complex, ...], ...] | None = None
    g_bar: float | None = None
    xi_bar: float | None = None
    eta: float | None = None
    size: int | None = None

    def __eq__(self, other):
        if not isinstance(other, Gate):
            return NotImplemented
        if self.kind != other.kind:
            return False
        if self.kind == "qubit_gate":
            # Named gates and explicit matrices compare by their resolved unitary.
            return self.qubits == other.qubits and np.array_equal(
                gate_matrix(self), gate_matrix(other)
            )
        return (
            self.mode == other.mode
            and self.qubit == other.qubit
            and self.qubits == other.qubits
            and self.modes == other.modes
            and self.t == other.t
            and self.alpha == other.alpha
            and self.g_bar == other.g_bar
            and self.xi_bar == other.xi_bar
            and self.eta == other.eta
            and self.size == other.size
        )


def disp_q(mode: int, t: float) -> Gate:
    """``e^{itQ}`` on the given mode."""
    return Gate(kind="disp_q", mode=mode, t=float(t))


def disp_p(mode: int, t: float) -> Gate:
    """``e^{-itP}`` on the given mode (position shift by ``t``)."""
    return Gate(kind="disp_p", mode=mode, t=float(t))


def ctrl_disp_q(mode: int, qubit: int, t: float) -> Gate:
    """``ctrl e^{itQ}``: phase ``e^{itx}`` on the control-1 qubit branch."""
    return Gate(kind="ctrl_disp_q", mode=mode, qubit=qubit, t=float(t))


def ctrl_disp_p(mode: int, qubit: int, t: float) -> Gate:
    """``ctrl e^{-itP}``: position shift by ``t`` on the control-1 branch."""
    return Gate(kind="ctrl_disp_p", mode=mode, qubit=qubit, t=float(t))


def squeeze(mode: int, alpha: float) -> Gate:
    """``M_alpha`` on the given mode, ``alpha > 0``."""
    return Gate(kind="squeeze", mode=mode, alpha=float(alpha))


def qubit_gate(name_or_matrix, qubits) -> Gate:
    """A named one-/two-qubit gate or an explicit 2x2 / 4x4 unitary matrix."""
    if isinstance(qubits, int):
        qubits = (qubits,)
    qubits = tuple(int(q) for q in qubits)
    if isinstance(name_or_matrix, str):
        return Gate(kind="qubit_gate", name=name_or_matrix, qubits=qubits)
    mat = np.asarray(name_or_matrix, dtype=complex)
    return Gate(
        kind="qubit_gate",
        matrix=tuple(tuple(complex(v) for v in row) for row in mat),
        qubits=qubits,
    )


def blackbox(
    modes,
    qubits,
    g_bar: float,
    xi_bar: float,
    eta: float = 1.0,
    size: int | None = None,
) -> Gate:
    """An opaque subcircuit node with declared analysis parameters."""
    return Gate(
        kind="blackbox",
        modes=tuple(int(a) for a in modes),
        qubits=tuple(int(q) for q in qubits),
        g_bar=float(g_bar),
        xi_bar=float(xi_bar),
        eta=float(eta),
        size=None if size is None else int(size),
    )


def gate_matrix(g: Gate) -> np.ndarray:
    """Resolve a qubit gate to its dense unitary matrix."""
    if g.kind != "qubit_gate":
        raise CircuitError(f"gate of kind {g.kind!r} has no qubit matrix")
    if g.name is not None:
        if g.name not in NAMED_QUBIT_GATES:
            raise CircuitError(f"unknown qubit gate name {g.name!r}")
        return np.asarray(NAMED_QUBIT_GATES[g.name], dtype=complex)
    return np.asarray(g.matrix, dtype=complex)


def target_modes(g: Gate) -> tuple[int, ...]:
    """Modes a gate acts on non-trivially (empty for qubit-only gates)."""
    if g.kind == "blackbox":
        return g.modes
    if g.kind == "qubit_gate":
        return ()
    return (g.mode,)


def acts_on_mode(g: Gate, alpha: int) -> bool:
    return alpha in target_modes(g)


def _validate_gate(g: Gate, m: int, r: int, pos: int) -> None:
    if g.kind not in GATE_KINDS:
        raise CircuitError(f"unknown gate kind {g.kind!r} at gate {pos}", pos)
    if g.kind in DISPLACEMENT_KINDS or g.kind == "squeeze":
        if g.mode is None or not (0 <= g.mode < m):
            raise CircuitError(f"mode index out of range at gate {pos}", pos)
    if g.kind in DISPLACEMENT_KINDS:
        if g.t is None or not math.isfinite(g.t):
            raise CircuitError(f"missing displacement strength t at gate {pos}", pos)
    if g.kind in CONTROLLED_KINDS:
        if g.qubit is None or not (0 <= g.qubit < r):
            raise CircuitError(f"qubit index out of range at gate {pos}", pos)
    if g.kind == "squeeze":
        if g.alpha is None or not (g.alpha > 0) or not math.isfinite(g.alpha):
            raise CircuitError(f"non-positive alpha at gate {pos}", pos)
    if g.kind == "qubit_gate":
        if (g.name is None) == (g.matrix is None):
            raise CircuitError(
                f"qubit gate needs exactly one of name/matrix at gate {pos}", pos
            )
        mat = gate_matrix(g)
        dim = mat.shape[0]
        if mat.shape not in ((2, 2), (4, 4)):
            raise CircuitError(f"qubit matrix must be 2x2 or 4x4 at gate {pos}", pos)
        expected = {2: 1, 4: 2}[dim]
        if len(g.qubits) != expected:
            raise CircuitError(
                f"qubit gate arity mismatch ({len(g.qubits)} targets for "
                f"{dim}x{dim} matrix) at gate {pos}",
                pos,
            )
        if len(set(g.qubits)) != len(g.qubits):
            raise CircuitError(f"repeated qubit target at gate {pos}", pos)
        for q in g.qubits:
            if not (0 <= q < r):
                raise CircuitError(f"qubit index out of range at gate {pos}", pos)
        dev = np.abs(mat @ mat.conj().T - np.eye(dim)).max()
        if dev > 1e-12:
            raise CircuitError(f"non-unitary matrix at gate {pos}", pos)
    if g.kind == "blackbox":
        if not g.modes:
            raise CircuitError(f"blackbox needs at least one mode at gate {pos}", pos)
        for a in g.modes:
            if not (0 <= a < m):
                raise CircuitError(f"mode index out of range at gate {pos}", pos)
        for q in g.qubits:
            if not (0 <= q < r):
                raise CircuitError(f"qubit index out of range at gate {pos}", pos)
        if g.g_bar is None or g.g_bar < 1:
            raise CircuitError(f"blackbox requires g_bar >= 1 at gate {pos}", pos)
        if g.xi_bar is None or g.xi_bar < 0:
            raise CircuitError(f"blackbox requires xi_bar >= 0 at gate {pos}", pos)
        if g.eta is None or not (g.eta > 0):
            raise CircuitError(f"blackbox requires eta > 0 at gate {pos}", pos)
        if g.g_bar < max(g.eta, 1.0 / g.eta) - 1e-12:
            raise CircuitError(
                f"blackbox g_bar must dominate max(eta, 1/eta) at gate {pos}", pos
            )


@dataclass(frozen=True)
class Circuit:
    """An ordered gate list on ``m`` modes and ``r`` qubits (index 0 applied first)."""

    m: int
    r: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.m < 0 or self.r < 0:
            raise CircuitError("mode and qubit counts must be non-negative")
        for i, g in enumerate(self.gates, start=1):
            _validate_gate(g, self.m, self.r, i)

    @property
    def size(self) -> int:
        """Gate count, blackboxes counted at their declared sizes."""
        total = 0
        for g in self.gates:
            total += g.size if (g.kind == "blackbox" and g.size) else 1
        return total

    def __len__(self) -> int:
        return len(self.gates)


@dataclass(frozen=True)
class StrengthBounds:
    """Strength caps ``(alpha, zeta)`` of the bounded set Uelem(alpha, zeta)."""

    alpha: float = 2.0
    zeta: float = 1.0

    def __post_init__(self):
        if self.alpha < 1 or self.zeta < 1:
            raise ValueError("strength bounds require alpha >= 1 and zeta >= 1")


def conforms_to(c: Circuit, bounds: StrengthBounds) -> bool:
    """Check membership in Uelem(alpha, zeta), closed intervals at the caps."""
    for g in c.gates:
        if g.kind in DISPLACEMENT_KINDS and abs(g.t) > bounds.zeta:
            return False
        if g.kind == "squeeze" and not (
            1.0 / bounds.alpha <= g.alpha <= bounds.alpha
        ):
            return False
        if g.kind == "blackbox":
            return False
    return True


@dataclass(frozen=True)
class GateParams:
    """Per-gate squeezing/displacement scalars ``(eta, xi)``."""

    eta: float
    xi: float


def gate_params(g: Gate) -> GateParams:
    """``eta = alpha`` for squeezers, ``xi = |t|`` for displacements, else (1, 0).

    Blackbox nodes return their declared ``eta`` and total ``xi_bar``.
    """
    if g.kind == "squeeze":
        return GateParams(eta=g.alpha, xi=0.0)
    if g.kind in DISPLACEMENT_KINDS:
        return GateParams(eta=1.0, xi=abs(g.t))
    if g.kind == "blackbox":
        return GateParams(eta=g.eta, xi=g.xi_bar)
    return GateParams(eta=1.0, xi=0.0)


def restrict_to_mode(c: Circuit, alpha: int) -> Circuit:
    """Subsequence of gates acting non-trivially on mode ``alpha``, relabeled to m=1."""
    if not (0 <= alpha < c.m):
        raise CircuitError(f"mode index {alpha} out of range for m={c.m}")
    restricted = []
    for g in c.gates:
        if not acts_on_mode(g, alpha):
            continue
        if g.kind == "blackbox":
            restricted.append(replace(g, modes=(0,)))
        else:
            restricted.append(replace(g, mode=0))
    return Circuit(m=1, r=c.r, gates=tuple(restricted))


def adjoint_gate(g: Gate) -> Gate:
    """Gate-wise adjoint; blackbox declared parameters are adjoint-invariant."""
    if g.kind in DISPLACEMENT_KINDS:
        return replace(g, t=-g.t)
    if g.kind == "squeeze":
        return replace(g, alpha=1.0 / g.alpha)
    if g.kind == "qubit_gate":
        mat = gate_matrix(g).conj().T
        if g.name is not None and np.array_equal(mat, gate_matrix(g)):
            return g  # self-adjoint named gate
        return qubit_gate(mat, g.qubits)
    return g


def adjoint_circuit(c: Circuit) -> Circuit:
    """Reverse the gate order and replace each gate by its adjoint."""
    return Circuit(m=c.m, r=c.r, gates=tuple(adjoint_gate(g) for g in reversed(c.gates)))


# -- serialization ------------------------------------------------------------
#
# Circuit document: UTF-8 JSON {"m": int, "r": int, "gates": [...]}.
# Complex matrix entries are [re, im] pairs; reals are IEEE-754 doubles.


def gate_to_dict(g: Gate) -> dict:
    d: dict = {"kind": g.kind}
    if g.kind in DISPLACEMENT_KINDS:
        d["mode"] = g.mode
        d["t"] = g.t
        if g.kind in CONTROLLED_KINDS:
            d["qubit"] = g.qubit
    elif g.kind == "squeeze":
        d["mode"] = g.mode
        d["alpha"] = g.alpha
    elif g.kind == "qubit_gate":
        d["qubits"] = list(g.qubits)
        if g.name is not None:
            d["name"] = g.name
        else:
            d["matrix"] = [[[v.real, v.imag] for v in row] for row in g.matrix]
    elif g.kind == "blackbox":
        d["modes"] = list(g.modes)
        d["qubits"] = list(g.qubits)
        d["g_bar"] = g.g_bar
        d["xi_bar"] = g.xi_bar
        d["eta"] = g.eta
        if g.size is not None:
            d["size"] = g.size
    return d


def gate_from_dict(d: dict, pos: int) -> Gate:
    if not isinstance(d, dict) or "kind" not in d:
        raise CircuitError(f"gate object missing 'kind' at gate {pos}", pos)
    kind = d["kind"]
    try:
        if kind == "disp_q":
            return disp_q(d["mode"], d["t"])
        if kind == "disp_p":
            return disp_p(d["mode"], d["t"])
        if kind == "ctrl_disp_q":
            return ctrl_disp_q(d["mode"], d["qubit"], d["t"])
        if kind == "ctrl_disp_p":
            return ctrl_disp_p(d["mode"], d["qubit"], d["t"])
        if kind == "squeeze":
            return squeeze(d["mode"], d["alpha"])
        if kind == "qubit_gate":
            qubits = d.get("qubits", d.get("qubit"))
            if qubits is None:
                raise KeyError("qubits")
            if "name" in d:
                return qubit_gate(d["name"], qubits)
            mat = [[complex(re, im) for re, im in row] for row in d["matrix"]]
            return qubit_gate(mat, qubits)
        if kind == "blackbox":
            return blackbox(
                d["modes"],
                d.get("qubits", ()),
                d["g_bar"],
                d["xi_bar"],
                d.get("eta", 1.0),
                d.get("size"),
            )
    except KeyError as exc:
        raise CircuitError(
            f"missing field {exc.args[0]!r} for {kind!r} at gate {pos}", pos
        ) from exc
    except (TypeError, ValueError) as exc:
        raise CircuitError(f"malformed gate at gate {pos}: {exc}", pos) from exc
    raise CircuitError(f"unknown gate kind {kind!r} at gate {pos}", pos)


def circuit_to_dict(c: Circuit) -> dict:
    return {"m": c.m, "r": c.r, "gates": [gate_to_dict(g) for g in c.gates]}


def circuit_from_dict(doc: dict) -> Circuit:
    if not isinstance(doc, dict):
        raise CircuitError("circuit document must be a JSON object")
    for key in ("m", "r", "gates"):
        if key not in doc:
            raise CircuitError(f"circuit document missing {key!r}")
    gates = tuple(
        gate_from_dict(g, i) for i, g in enumerate(doc["gates"], start=1)
    )
    return Circuit(m=int(doc["m"]), r=int(doc["r"]), gates=gates)


def serialize_circuit(c: Circuit) -> str:
    return json.dumps(circuit_to_dict(c), sort_keys=True)


def parse_circuit(text: str) -> Circuit:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitError(f"invalid JSON: {exc}") from exc
    return circuit_from_dict(doc)
