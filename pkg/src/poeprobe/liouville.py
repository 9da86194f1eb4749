"""Dense Liouville-space algebra for density vectors and superoperators.

Conventions used throughout the package:

* A density matrix ``rho`` of shape ``(N, N)`` is vectorized by row-major
  flattening, ``v[i * N + j] = rho[i, j]``.  This is exactly ``rho.reshape(-1)``.
* Under that convention the channel ``rho -> U rho U^dagger`` is the
  superoperator ``kron(U, conj(U))`` and a Kraus channel is
  ``sum_i kron(K_i, conj(K_i))``.
* Superoperators act on density vectors from the left, so ``compose(first,
  second)`` returns ``second @ first``: *first is applied first*.

Density vectors and superoperators are plain ``numpy`` arrays; the helpers here
validate them against the physical invariants.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

#: Tolerance for validating physical invariants (Hermiticity, trace, PSD, unitarity).
VALIDATION_TOL = 1e-10
#: Agreement tolerance for comparisons against independent matrix oracles.
ORACLE_TOL = 1e-12


class InvalidStateError(ValueError):
    """Raised when an array violates a density-matrix or channel invariant."""


def _hilbert_dim(length: int) -> int:
    dim = int(round(np.sqrt(length)))
    if dim * dim != length or dim == 0:
        raise InvalidStateError(f"length {length} is not a perfect square")
    return dim


def check_density_matrix(rho: np.ndarray, tol: float = VALIDATION_TOL) -> None:
    """Raise :class:`InvalidStateError` unless ``rho`` is Hermitian, unit-trace and PSD."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"density matrix must be square, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise InvalidStateError("density matrix has non-finite entries")
    herm_dev = np.max(np.abs(rho - rho.conj().T))
    if herm_dev > tol:
        raise InvalidStateError(f"density matrix not Hermitian (deviation {herm_dev:.3g})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol:
        raise InvalidStateError(f"density matrix trace is {tr.real:.12g}, expected 1")
    lowest = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lowest < -tol:
        raise InvalidStateError(f"density matrix not PSD (min eigenvalue {lowest:.3g})")


def vectorize(rho: np.ndarray, validate: bool = True) -> np.ndarray:
    """Flatten an ``N x N`` density matrix into a length ``N**2`` complex vector."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"density matrix must be square, got shape {rho.shape}")
    if validate:
        check_density_matrix(rho)
    return rho.reshape(-1).copy()


def devectorize(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1:
        raise InvalidStateError(f"density vector must be 1-D, got shape {v.shape}")
    dim = _hilbert_dim(v.size)
    return v.reshape(dim, dim).copy()


def check_density_vector(v: np.ndarray, tol: float = VALIDATION_TOL) -> None:
    check_density_matrix(devectorize(v), tol)


def pure_state(psi: Sequence[complex]) -> np.ndarray:
    """Density vector of the normalized pure state ``|psi><psi|``."""
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise InvalidStateError("zero state vector")
    psi = psi / norm
    return vectorize(np.outer(psi, psi.conj()))


def is_unitary(u: np.ndarray, tol: float = VALIDATION_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)


def unitary_superop(u: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> U rho U^dagger`` (``kron(U, conj(U))``)."""
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u):
        raise InvalidStateError("matrix is not unitary within tolerance")
    return np.kron(u, u.conj())


def kraus_superop(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """Superoperator ``sum_i kron(K_i, conj(K_i))`` of a trace-preserving Kraus set."""
    ops = [np.asarray(k, dtype=complex) for k in kraus]
    if not ops:
        raise InvalidStateError("empty Kraus set")
    dim = ops[0].shape[0]
    if any(k.shape != (dim, dim) for k in ops):
        raise InvalidStateError("Kraus operators must be square and share one shape")
    completeness = sum(k.conj().T @ k for k in ops)
    dev = np.max(np.abs(completeness - np.eye(dim)))
    if dev > VALIDATION_TOL:
        raise InvalidStateError(f"Kraus set not trace preserving (deviation {dev:.3g})")
    return sum(np.kron(k, k.conj()) for k in ops)


def identity_superop(dim: int) -> np.ndarray:
    return np.eye(dim * dim, dtype=complex)


def inner(a: np.ndarray, b: np.ndarray) -> float:
    """Hilbert-Schmidt overlap ``Tr(A^dagger B)`` as a real number.

    For Hermitian arguments the result is real; an imaginary part above
    ``VALIDATION_TOL`` means one of the vectors is corrupted.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise InvalidStateError(f"dimension mismatch: {a.shape} vs {b.shape}")
    val = np.vdot(a, b)
    if abs(val.imag) > VALIDATION_TOL:
        raise InvalidStateError(f"overlap has imaginary part {val.imag:.3g}")
    return float(val.real)


def apply(s: np.ndarray, v: np.ndarray, validate: bool = False) -> np.ndarray:
    """Apply superoperator ``s`` to density vector ``v``.

    With ``validate=True`` the output is checked against the density-matrix
    invariants, which is appropriate whenever ``s`` is CPTP and ``v`` a state.
    """
    s = np.asarray(s)
    v = np.asarray(v)
    if s.ndim != 2 or s.shape[1] != v.shape[0]:
        raise InvalidStateError(f"dimension mismatch: {s.shape} @ {v.shape}")
    out = s @ v
    if validate:
        check_density_vector(out)
    return out


def compose(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Channel that applies ``first`` and then ``second``."""
    first = np.asarray(first)
    second = np.asarray(second)
    if first.shape != second.shape:
        raise InvalidStateError(f"dimension mismatch: {first.shape} vs {second.shape}")
    return second @ first


def is_trace_preserving(s: np.ndarray, tol: float = VALIDATION_TOL) -> bool:
    """Check ``Tr(S(|i><j|)) = delta_ij`` on every matrix unit."""
    s = np.asarray(s)
    dim = _hilbert_dim(s.shape[0])
    trace_row = np.eye(dim).reshape(-1)
    return bool(np.max(np.abs(trace_row @ s - trace_row)) <= tol)
