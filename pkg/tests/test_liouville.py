import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poeprobe import liouville as lv
from poeprobe.circuits import PAULI_X, cycle_unitary, paper_circuit
from poeprobe.noise import amplitude_damping_kraus

from conftest import random_pure, random_unitary

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)


def proj(psi):
    return np.outer(psi, psi.conj())


@pytest.mark.parametrize(
    "rho, expected",
    [
        (proj(KET0), [1, 0, 0, 0]),
        (np.eye(2) / 2, [0.5, 0, 0, 0.5]),
        (proj(PLUS), [0.5, 0.5, 0.5, 0.5]),
    ],
)
def test_vectorize_examples(rho, expected):
    np.testing.assert_allclose(lv.vectorize(rho), expected, atol=1e-15)
    np.testing.assert_allclose(lv.devectorize(np.array(expected, dtype=complex)), rho, atol=1e-15)


def test_vectorize_is_row_major():
    rho = np.array([[0.7, 0.1 - 0.2j], [0.1 + 0.2j, 0.3]])
    v = lv.vectorize(rho)
    assert v[0 * 2 + 1] == rho[0, 1]
    assert v[1 * 2 + 0] == rho[1, 0]


@pytest.mark.parametrize(
    "bad",
    [
        np.ones((2, 3)),
        np.array([[0.5, 0.2], [0.1, 0.5]]),  # not Hermitian
        np.array([[0.6, 0], [0, 0.6]]),  # trace 1.2
        np.array([[1.2, 0], [0, -0.2]]),  # negative eigenvalue
    ],
)
def test_vectorize_rejects_invalid(bad):
    with pytest.raises(lv.InvalidStateError):
        lv.vectorize(bad)


def test_devectorize_rejects_non_square_length():
    with pytest.raises(lv.InvalidStateError):
        lv.devectorize(np.ones(5))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n_qubits=st.integers(1, 3))
def test_round_trip_is_exact(seed, n_qubits):
    v = random_pure(2**n_qubits, np.random.default_rng(seed))
    assert np.array_equal(lv.vectorize(lv.devectorize(v)), v)


def test_unitary_superop_identity_and_flip():
    assert np.array_equal(lv.unitary_superop(np.eye(2)), np.eye(4))
    out = lv.apply(lv.unitary_superop(PAULI_X), lv.vectorize(proj(KET0)))
    np.testing.assert_allclose(out, lv.vectorize(proj(KET1)), atol=1e-15)


def test_unitary_superop_rejects_non_unitary():
    with pytest.raises(lv.InvalidStateError):
        lv.unitary_superop(np.array([[1, 1], [0, 1]]))


def test_demo_circuit_superop_matches_conjugation(rho00):
    u = cycle_unitary(paper_circuit())
    rho = lv.devectorize(rho00)
    got = lv.apply(lv.unitary_superop(u), rho00)
    np.testing.assert_allclose(got, (u @ rho @ u.conj().T).reshape(-1), atol=1e-12)
    twice = lv.apply(lv.unitary_superop(u), got)
    u2 = u @ u
    np.testing.assert_allclose(twice, (u2 @ rho @ u2.conj().T).reshape(-1), atol=1e-12)


def test_kraus_superop_examples():
    assert np.array_equal(lv.kraus_superop([np.eye(2)]), np.eye(4))
    full = lv.kraus_superop(amplitude_damping_kraus(1.0))
    np.testing.assert_allclose(lv.apply(full, lv.vectorize(proj(KET1))), lv.vectorize(proj(KET0)), atol=1e-15)
    half = lv.kraus_superop(amplitude_damping_kraus(0.5))
    rho = lv.devectorize(lv.apply(half, lv.vectorize(proj(KET1))))
    np.testing.assert_allclose(np.diag(rho).real, [0.5, 0.5], atol=1e-15)


def test_kraus_superop_rejects_incomplete_set():
    with pytest.raises(lv.InvalidStateError):
        lv.kraus_superop([np.diag([1.0, 0.5])])


def test_inner_examples():
    v0, v1, vp = (lv.vectorize(proj(k)) for k in (KET0, KET1, PLUS))
    assert lv.inner(v0, v0) == pytest.approx(1.0, abs=1e-15)
    assert lv.inner(v0, v1) == 0.0
    assert lv.inner(v0, vp) == pytest.approx(0.5, abs=1e-15)


def test_inner_rejects_mismatch_and_complex_overlap():
    with pytest.raises(lv.InvalidStateError):
        lv.inner(np.ones(4), np.ones(16))
    with pytest.raises(lv.InvalidStateError):
        lv.inner(np.array([1, 1j, 0, 0]), np.array([1, 1, 0, 0]))


def test_apply_and_compose_mismatch():
    with pytest.raises(lv.InvalidStateError):
        lv.apply(np.eye(4), np.ones(16))
    with pytest.raises(lv.InvalidStateError):
        lv.compose(np.eye(4), np.eye(16))


def test_compose_order(rng):
    x = lv.unitary_superop(PAULI_X)
    assert np.array_equal(lv.compose(x, lv.identity_superop(2)), x)
    np.testing.assert_allclose(lv.compose(x, x), np.eye(4), atol=1e-15)
    u = lv.unitary_superop(random_unitary(2, rng))
    damp = lv.kraus_superop(amplitude_damping_kraus(0.3))
    v = random_pure(2, rng)
    np.testing.assert_allclose(lv.apply(lv.compose(u, damp), v), lv.apply(damp, lv.apply(u, v)), atol=1e-12)
    # ``first`` really is applied first: the two orders differ here.
    assert np.max(np.abs(lv.compose(u, damp) - lv.compose(damp, u))) > 1e-3


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n_qubits=st.integers(1, 3))
def test_single_step_overlap_matches_matrix_algebra(seed, n_qubits):
    rng = np.random.default_rng(seed)
    dim = 2**n_qubits
    u = random_unitary(dim, rng)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    v = lv.vectorize(rho)
    got = lv.inner(v, lv.apply(lv.unitary_superop(u), v))
    want = np.trace(rho @ u @ rho @ u.conj().T).real
    assert abs(got - want) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n_qubits=st.integers(1, 3), k=st.integers(0, 12))
def test_survival_probability_identity(seed, n_qubits, k):
    rng = np.random.default_rng(seed)
    dim = 2**n_qubits
    u = random_unitary(dim, rng)
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi /= np.linalg.norm(psi)
    v0 = lv.pure_state(psi)
    s = np.linalg.matrix_power(lv.unitary_superop(u), k)
    want = abs(psi.conj() @ np.linalg.matrix_power(u, k) @ psi) ** 2
    assert abs(lv.inner(v0, lv.apply(s, v0)) - want) <= 1e-12


def test_cptp_preserves_trace_and_hermiticity(rng):
    damp = lv.kraus_superop(amplitude_damping_kraus(0.37))
    assert lv.is_trace_preserving(damp)
    for _ in range(10):
        lv.apply(damp, random_pure(2, rng), validate=True)
