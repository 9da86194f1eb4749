import math

import numpy as np
import pytest
from scipy.linalg import expm

from poeprobe.circuits import (
    PAULI_X,
    PAULI_Y,
    CircuitError,
    CircuitSpec,
    GateSpec,
    cycle_unitary,
    gate_matrix,
    paper_circuit,
    product_ket,
)

I2 = np.eye(2)


def _max_unitarity_defect(m):
    return np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))


def test_xx_zero_is_identity():
    assert np.allclose(gate_matrix(GateSpec("XX", (0, 1), 0.0), 2), np.eye(4), atol=0)


def test_y_rotation_on_zero():
    phi = 2.4
    out = gate_matrix(GateSpec("Y", (0,), phi), 1) @ np.array([1, 0])
    np.testing.assert_allclose(out, [math.cos(phi / 2), math.sin(phi / 2)], atol=1e-15)


def test_xx_pi_transfers_population():
    out = gate_matrix(GateSpec("XX", (0, 1), math.pi), 2) @ np.array([1, 0, 0, 0])
    np.testing.assert_allclose(out, [0, 0, 0, -1j], atol=1e-15)


@pytest.mark.parametrize("theta", [0.3, 1.0, 2.7, -1.1])
def test_xx_matches_matrix_exponential(theta):
    want = expm(-0.5j * theta * np.kron(PAULI_X, PAULI_X))
    np.testing.assert_allclose(gate_matrix(GateSpec("XX", (0, 1), theta), 2), want, atol=1e-14)
    closed = math.cos(theta / 2) * np.eye(4) - 1j * math.sin(theta / 2) * np.kron(PAULI_X, PAULI_X)
    np.testing.assert_allclose(gate_matrix(GateSpec("XX", (1, 0), theta), 2), closed, atol=1e-14)


def test_qubit_zero_is_most_significant():
    y = gate_matrix(GateSpec("Y", (0,), 0.9), 2)
    np.testing.assert_allclose(y, np.kron(expm(-0.45j * PAULI_Y), I2), atol=1e-14)
    np.testing.assert_allclose(product_ket("+0"), np.array([1, 0, 1, 0]) / math.sqrt(2), atol=1e-15)


def test_cycle_order_first_gate_acts_first():
    c = paper_circuit()
    xx, y = (gate_matrix(g, 2) for g in c.gates)
    np.testing.assert_allclose(cycle_unitary(c), y @ xx, atol=1e-15)
    assert np.max(np.abs(y @ xx - xx @ y)) > 1e-3


def test_single_gate_and_double_x():
    g = GateSpec("H", (1,))
    np.testing.assert_array_equal(cycle_unitary(CircuitSpec(2, (g,))), gate_matrix(g, 2))
    xx = CircuitSpec(1, (GateSpec("X", (0,)), GateSpec("X", (0,))))
    np.testing.assert_allclose(cycle_unitary(xx), np.eye(2), atol=0)


def test_demo_circuit_shape():
    c = paper_circuit()
    assert c.n_qubits == 2
    assert len(c.gates) == 2
    assert c.gates[0] == GateSpec("XX", (0, 1), 1.0)
    assert c.gates[1] == GateSpec("Y", (0,), 2.4)
    assert _max_unitarity_defect(cycle_unitary(c)) <= 1e-12


@pytest.mark.parametrize("kind,targets,angle", [("XX", (0, 1), 0.4), ("Y", (1,), 1.3), ("X", (2,), None),
                                                 ("X", (0,), 0.2), ("Z", (1,), None), ("Z", (2,), 2.2),
                                                 ("H", (0,), None)])
def test_every_gate_is_unitary(kind, targets, angle):
    assert _max_unitarity_defect(gate_matrix(GateSpec(kind, targets, angle), 3)) <= 1e-12


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="XX", targets=(0, 0), angle=1.0),
        dict(kind="XX", targets=(0,), angle=1.0),
        dict(kind="Y", targets=(0,)),
        dict(kind="H", targets=(0,), angle=1.0),
        dict(kind="Q", targets=(0,)),
        dict(kind="Y", targets=(0,), angle=float("nan")),
    ],
)
def test_bad_gate_specs(kwargs):
    with pytest.raises(CircuitError):
        GateSpec(**kwargs)


def test_targets_outside_register():
    with pytest.raises(CircuitError):
        CircuitSpec(2, (GateSpec("Y", (2,), 1.0),))
    with pytest.raises(CircuitError):
        gate_matrix(GateSpec("Y", (3,), 1.0), 2)
    with pytest.raises(CircuitError):
        CircuitSpec(2, ())
