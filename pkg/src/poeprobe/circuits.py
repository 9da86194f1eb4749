"""Gate definitions and cycle unitaries.

Qubit 0 is the most significant bit of the computational-basis index, so the
label ``"+0"`` means qubit 0 in ``|+>`` and qubit 1 in ``|0>``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .liouville import ORACLE_TOL

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

GATE_KINDS = ("XX", "Y", "X", "Z", "H")

DEMO_THETA = 1.0
DEMO_PHI = 2.4


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class GateSpec:
    """One gate of a drive cycle.

    ``XX`` and ``Y`` are rotations ``exp(-i angle/2 P)`` and need an angle.
    ``X`` and ``Z`` are Pauli gates without an angle and rotations with one.
    ``H`` never takes an angle.
    """

    kind: str
    targets: tuple[int, ...]
    angle: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if self.kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        n_targets = 2 if self.kind == "XX" else 1
        if len(self.targets) != n_targets:
            raise CircuitError(f"{self.kind} needs {n_targets} target(s), got {self.targets}")
        if len(set(self.targets)) != len(self.targets):
            raise CircuitError(f"repeated target in {self.targets}")
        if self.kind in ("XX", "Y") and self.angle is None:
            raise CircuitError(f"{self.kind} requires an angle")
        if self.kind == "H" and self.angle is not None:
            raise CircuitError("H takes no angle")
        if self.angle is not None and not math.isfinite(self.angle):
            raise CircuitError("gate angle must be finite")


@dataclass(frozen=True)
class CircuitSpec:
    """A drive cycle: ``gates`` applied left to right on ``n_qubits`` qubits."""

    n_qubits: int
    gates: tuple[GateSpec, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_qubits < 1:
            raise CircuitError("n_qubits must be positive")
        if not self.gates:
            raise CircuitError("circuit needs at least one gate")
        for g in self.gates:
            if any(t < 0 or t >= self.n_qubits for t in g.targets):
                raise CircuitError(f"targets {g.targets} outside a {self.n_qubits}-qubit register")

    @property
    def dim(self) -> int:
        return 2**self.n_qubits


def embed(op: np.ndarray, target: int, n_qubits: int) -> np.ndarray:
    """Lift a single-qubit operator onto ``target`` of an ``n_qubits`` register."""
    out = np.ones((1, 1), dtype=complex)
    for q in range(n_qubits):
        out = np.kron(out, op if q == target else PAULI_I)
    return out


def _rotation(pauli: np.ndarray, angle: float) -> np.ndarray:
    # Exact for any operator squaring to the identity.
    dim = pauli.shape[0]
    return math.cos(angle / 2) * np.eye(dim) - 1j * math.sin(angle / 2) * pauli


def gate_matrix(g: GateSpec, n_qubits: int) -> np.ndarray:
    if any(t < 0 or t >= n_qubits for t in g.targets):
        raise CircuitError(f"targets {g.targets} outside a {n_qubits}-qubit register")
    if g.kind == "XX":
        j, k = g.targets
        xx = embed(PAULI_X, j, n_qubits) @ embed(PAULI_X, k, n_qubits)
        return _rotation(xx, g.angle)
    (t,) = g.targets
    if g.kind == "H":
        return embed(HADAMARD, t, n_qubits)
    pauli = {"Y": PAULI_Y, "X": PAULI_X, "Z": PAULI_Z}[g.kind]
    if g.angle is None:
        return embed(pauli, t, n_qubits)
    return embed(_rotation(pauli, g.angle), t, n_qubits)


def cycle_unitary(c: CircuitSpec) -> np.ndarray:
    """Product of the gate matrices with the first listed gate acting first."""
    u = np.eye(c.dim, dtype=complex)
    for g in c.gates:
        u = gate_matrix(g, c.n_qubits) @ u
    dev = np.max(np.abs(u.conj().T @ u - np.eye(c.dim)))
    if dev > ORACLE_TOL:
        raise CircuitError(f"cycle unitary drifted from unitarity by {dev:.3g}")
    return u


def paper_circuit(theta: float = DEMO_THETA, phi: float = DEMO_PHI, y_qubit: int = 0) -> CircuitSpec:
    """Two-qubit demo cycle: ``XX(theta)`` on (0, 1) followed by ``Y(phi)`` on ``y_qubit``."""
    return CircuitSpec(
        n_qubits=2,
        gates=(GateSpec("XX", (0, 1), theta), GateSpec("Y", (y_qubit,), phi)),
    )


def with_xx_offset(c: CircuitSpec, offset: float) -> CircuitSpec:
    """Copy of ``c`` with every XX angle shifted by ``offset`` radians."""
    gates = tuple(replace(g, angle=g.angle + offset) if g.kind == "XX" else g for g in c.gates)
    return replace(c, gates=gates)


_SINGLE_QUBIT_KETS = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / math.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / math.sqrt(2),
}


def product_ket(label: str) -> np.ndarray:
    """State vector for a label such as ``"00"`` or ``"+0"`` (qubit 0 first)."""
    if not label or any(ch not in _SINGLE_QUBIT_KETS for ch in label):
        raise CircuitError(f"bad state label {label!r}; use characters from '01+-'")
    psi = np.ones(1, dtype=complex)
    for ch in label:
        psi = np.kron(psi, _SINGLE_QUBIT_KETS[ch])
    return psi


def basis_ket(index: int, n_qubits: int) -> np.ndarray:
    psi = np.zeros(2**n_qubits, dtype=complex)
    psi[index] = 1.0
    return psi


def circuit_from_gates(n_qubits: int, gates: Sequence[dict]) -> CircuitSpec:
    return CircuitSpec(
        n_qubits=n_qubits,
        gates=tuple(GateSpec(g["kind"], tuple(g["targets"]), g.get("angle")) for g in gates),
    )
