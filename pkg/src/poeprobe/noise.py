"""Error models injected into the drive cycle, plus state-prep and readout errors."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import liouville as lv
from .circuits import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    CircuitSpec,
    GateSpec,
    cycle_unitary,
    embed,
    gate_matrix,
    with_xx_offset,
)

NOISE_KINDS = ("none", "amplitude_damping", "miscalibration", "drift", "dephasing", "depolarizing")
SPAM_TOL = 1e-12


class NoiseSpecError(ValueError):
    pass


@dataclass(frozen=True)
class SpamSpec:
    """State-preparation mixture and readout confusion matrix.

    ``prep_mixture`` holds ``(probability, gates)`` pairs; each gate list is a
    unitary applied to the ideal initial state (an empty list is the identity).
    ``detector_matrix[i, j]`` is the probability of reporting outcome ``i`` when
    the true outcome is ``j``, so each column sums to one.  ``None`` means
    perfect readout.
    """

    prep_mixture: tuple[tuple[float, tuple[GateSpec, ...]], ...] = ((1.0, ()),)
    detector_matrix: Optional[np.ndarray] = None

    def __post_init__(self):
        mix = tuple((float(p), tuple(gates)) for p, gates in self.prep_mixture)
        object.__setattr__(self, "prep_mixture", mix)
        if not mix:
            raise NoiseSpecError("prep mixture is empty")
        probs = np.array([p for p, _ in mix])
        if np.any(probs < 0) or np.any(probs > 1):
            raise NoiseSpecError("prep probabilities must lie in [0, 1]")
        if abs(probs.sum() - 1.0) > SPAM_TOL:
            raise NoiseSpecError(f"prep probabilities sum to {probs.sum():.15g}, expected 1")
        if self.detector_matrix is not None:
            m = np.asarray(self.detector_matrix, dtype=float)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise NoiseSpecError("detector matrix must be square")
            if np.any(m < 0) or np.any(m > 1):
                raise NoiseSpecError("detector matrix entries must lie in [0, 1]")
            col_sums = m.sum(axis=0)
            if np.max(np.abs(col_sums - 1.0)) > SPAM_TOL:
                raise NoiseSpecError(
                    "detector matrix columns must sum to 1 "
                    "(entry [i, j] = P(report i | true j))"
                )
            m.setflags(write=False)
            object.__setattr__(self, "detector_matrix", m)


@dataclass(frozen=True)
class NoiseSpec:
    """One error model for the drive cycle.

    Only the parameter belonging to ``kind`` is read:
    ``t1_in_cycles`` (amplitude_damping), ``delta_theta`` (miscalibration),
    ``dtheta_per_cycle`` (drift) and ``p`` (dephasing, depolarizing).
    ``split_damping`` places half of the damping before and half after the
    cycle unitary instead of all of it after.
    """

    kind: str = "none"
    t1_in_cycles: Optional[float] = None
    delta_theta: Optional[float] = None
    dtheta_per_cycle: Optional[float] = None
    p: Optional[float] = None
    split_damping: bool = False
    spam: Optional[SpamSpec] = None

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise NoiseSpecError(f"unknown noise kind {self.kind!r}")
        if self.kind == "amplitude_damping":
            if self.t1_in_cycles is None or not self.t1_in_cycles > 0:
                raise NoiseSpecError("amplitude damping needs t1_in_cycles > 0")
        elif self.kind == "miscalibration":
            if self.delta_theta is None or not math.isfinite(self.delta_theta):
                raise NoiseSpecError("miscalibration needs a finite delta_theta")
        elif self.kind == "drift":
            if self.dtheta_per_cycle is None or not math.isfinite(self.dtheta_per_cycle):
                raise NoiseSpecError("drift needs a finite dtheta_per_cycle")
        elif self.kind in ("dephasing", "depolarizing"):
            if self.p is None or not 0.0 <= self.p <= 1.0:
                raise NoiseSpecError(f"{self.kind} needs a probability p in [0, 1]")

    @property
    def periodic(self) -> bool:
        """True when every cycle applies the same channel."""
        return self.kind != "drift"


NOISELESS = NoiseSpec()


def damping_gamma(t1_in_cycles: float) -> float:
    """Per-cycle decay probability of ``|1>`` for a lifetime given in cycles."""
    if not t1_in_cycles > 0:
        raise NoiseSpecError("lifetime must be positive")
    return -math.expm1(-1.0 / t1_in_cycles)


def amplitude_damping_kraus(gamma: float) -> list[np.ndarray]:
    return [
        np.array([[1, 0], [0, math.sqrt(1 - gamma)]], dtype=complex),
        np.array([[0, math.sqrt(gamma)], [0, 0]], dtype=complex),
    ]


def dephasing_kraus(p: float) -> list[np.ndarray]:
    return [math.sqrt(1 - p) * np.eye(2, dtype=complex), math.sqrt(p) * PAULI_Z]


def depolarizing_kraus(p: float) -> list[np.ndarray]:
    return [math.sqrt(1 - 3 * p / 4) * np.eye(2, dtype=complex)] + [
        math.sqrt(p / 4) * pauli for pauli in (PAULI_X, PAULI_Y, PAULI_Z)
    ]


def per_qubit_channel(kraus_1q: Sequence[np.ndarray], n_qubits: int) -> np.ndarray:
    """Superoperator applying the same single-qubit channel independently to every qubit."""
    out = lv.identity_superop(2**n_qubits)
    for q in range(n_qubits):
        out = lv.compose(out, lv.kraus_superop([embed(k, q, n_qubits) for k in kraus_1q]))
    return out


def cycle_channel(circuit: CircuitSpec, noise: NoiseSpec, k: int) -> np.ndarray:
    """Superoperator of drive cycle ``k`` (0-based) under ``noise``."""
    if k < 0:
        raise NoiseSpecError("cycle index must be non-negative")
    n = circuit.n_qubits
    if noise.kind == "miscalibration":
        return lv.unitary_superop(cycle_unitary(with_xx_offset(circuit, noise.delta_theta)))
    if noise.kind == "drift":
        return lv.unitary_superop(cycle_unitary(with_xx_offset(circuit, k * noise.dtheta_per_cycle)))
    ideal = lv.unitary_superop(cycle_unitary(circuit))
    if noise.kind == "amplitude_damping":
        if noise.split_damping:
            half = per_qubit_channel(amplitude_damping_kraus(damping_gamma(2 * noise.t1_in_cycles)), n)
            return lv.compose(lv.compose(half, ideal), half)
        damp = per_qubit_channel(amplitude_damping_kraus(damping_gamma(noise.t1_in_cycles)), n)
        return lv.compose(ideal, damp)
    if noise.kind == "dephasing":
        return lv.compose(ideal, per_qubit_channel(dephasing_kraus(noise.p), n))
    if noise.kind == "depolarizing":
        return lv.compose(ideal, per_qubit_channel(depolarizing_kraus(noise.p), n))
    return ideal


def prep_unitary(gates: Sequence[GateSpec], n_qubits: int) -> np.ndarray:
    u = np.eye(2**n_qubits, dtype=complex)
    for g in gates:
        u = gate_matrix(g, n_qubits) @ u
    return u


def prepare(v: np.ndarray, spam: Optional[SpamSpec]) -> np.ndarray:
    """Apply the preparation mixture ``sum_m p_m U_m rho U_m^dagger`` to a density vector."""
    if spam is None:
        return np.asarray(v, dtype=complex)
    dim = int(round(math.sqrt(len(v))))
    n_qubits = dim.bit_length() - 1
    out = np.zeros_like(v, dtype=complex)
    for p, gates in spam.prep_mixture:
        if p == 0:
            continue
        out = out + p * lv.apply(lv.unitary_superop(prep_unitary(gates, n_qubits)), v)
    return out


def measure(q: np.ndarray, spam: Optional[SpamSpec]) -> np.ndarray:
    """Map true basis-outcome probabilities ``q`` to reported ones, ``M q``."""
    q = np.asarray(q, dtype=float)
    if spam is None or spam.detector_matrix is None:
        return q
    m = spam.detector_matrix
    if m.shape[1] != q.shape[0]:
        raise NoiseSpecError(f"detector matrix {m.shape} does not match {q.shape[0]} outcomes")
    return m @ q


def apply_spam(v: np.ndarray, spam: SpamSpec, side: str) -> np.ndarray:
    """``side="prep"`` transforms a density vector, ``side="measure"`` an outcome distribution."""
    if side == "prep":
        return prepare(v, spam)
    if side == "measure":
        return measure(v, spam)
    raise ValueError(f"side must be 'prep' or 'measure', not {side!r}")


def measurement_effect(target: np.ndarray, spam: Optional[SpamSpec]) -> np.ndarray:
    """Density-vector form of the effective POVM element used to score a run.

    ``target`` is the vectorized operator whose overlap with the evolved state
    is the ideal signal.  With perfect readout it is returned unchanged.  With
    a detector matrix the target must be diagonal in the computational basis;
    the reported signal is then ``sum_i target_ii (M q)_i``.
    """
    target = np.asarray(target, dtype=complex)
    if spam is None or spam.detector_matrix is None:
        return target
    mat = lv.devectorize(target)
    if np.max(np.abs(mat - np.diag(np.diag(mat)))) > lv.VALIDATION_TOL:
        raise NoiseSpecError("readout confusion is only defined for computational-basis targets")
    weights = np.diag(mat).real
    m = spam.detector_matrix
    if m.shape[0] != weights.shape[0]:
        raise NoiseSpecError(f"detector matrix {m.shape} does not match dimension {weights.shape[0]}")
    return lv.vectorize(np.diag(m.T @ weights).astype(complex), validate=False)


def tensor_detector(single: np.ndarray, n_qubits: int) -> np.ndarray:
    """Readout matrix for independent, identical single-qubit confusion."""
    out = np.ones((1, 1))
    for _ in range(n_qubits):
        out = np.kron(out, np.asarray(single, dtype=float))
    return out
