"""Spectrum of the positive operator ``F = 1/2 - (U + U^dagger)/4`` in Liouville space.

Under unitary periodic evolution ``S_n = sum_j lambda_j**n |<rho0|j>|**2``; the
largest eigenvalue visible to ``rho0`` sets the asymptotic slope of ``ln S_n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import liouville as lv

OVERLAP_CUTOFF = 1e-12
DEGENERACY_TOL = 1e-9


class SpectralError(ValueError):
    pass


@dataclass
class SpectralReport:
    eigenvalues: np.ndarray
    overlaps: np.ndarray
    lambda_max: Optional[float]
    lambda_max2: Optional[float]
    overlap_max: float
    overlap_max2: float
    predicted_slope: Optional[float]
    predicted_offset: Optional[float]
    n_star: float
    has_decay_mode: bool

    def expansion_sn(self, n: int) -> float:
        """``sum_j lambda_j**n * overlap_j``."""
        lam = np.clip(self.eigenvalues, 0.0, None)
        if n == 0:
            return float(self.overlaps.sum())
        return float(np.sum(lam**n * self.overlaps))

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "overlaps": [float(x) for x in self.overlaps],
            "lambda_max": self.lambda_max,
            "lambda_max2": self.lambda_max2,
            "overlap_max": self.overlap_max,
            "overlap_max2": self.overlap_max2,
            "predicted_slope": self.predicted_slope,
            "predicted_offset": self.predicted_offset,
            "n_star": self.n_star,
            "has_decay_mode": self.has_decay_mode,
        }


def build_F(u_super: np.ndarray) -> np.ndarray:
    """``F = I/2 - (U_L + U_L^dagger)/4`` for a unitary-channel superoperator ``U_L``."""
    u_super = np.asarray(u_super, dtype=complex)
    if not lv.is_unitary(u_super):
        raise SpectralError("F is only positive for unitary channels; got a non-unitary superoperator")
    dim = u_super.shape[0]
    return 0.5 * np.eye(dim) - (u_super + u_super.conj().T) / 4


def _clusters(eigenvalues: np.ndarray, overlaps: np.ndarray) -> list[tuple[float, float]]:
    """Group descending eigenvalues closer than ``DEGENERACY_TOL``; sum their overlaps."""
    groups: list[list[int]] = []
    for i, lam in enumerate(eigenvalues):
        if groups and eigenvalues[groups[-1][0]] - lam <= DEGENERACY_TOL:
            groups[-1].append(i)
        else:
            groups.append([i])
    return [(float(np.mean(eigenvalues[g])), float(overlaps[g].sum())) for g in groups]


def spectral_report(
    u_super: np.ndarray, rho0: np.ndarray, overlap_cutoff: float = OVERLAP_CUTOFF
) -> SpectralReport:
    """Eigen-decompose ``F`` and predict the decay law seen from ``rho0``.

    ``lambda_max`` is the largest eigenvalue cluster whose overlap with
    ``rho0`` exceeds ``overlap_cutoff``; modes that ``rho0`` cannot see are
    skipped.  ``n_star`` is the cycle count after which the dominant mode
    outweighs the runner-up, clamped at zero.
    """
    f = build_F(u_super)
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (f.shape[0],):
        raise SpectralError("initial state does not match the superoperator dimension")
    evals, evecs = np.linalg.eigh(f)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]
    overlaps = np.abs(evecs.conj().T @ rho0) ** 2
    visible = [(lam, ov) for lam, ov in _clusters(evals, overlaps) if ov > overlap_cutoff]
    # Clusters at zero contribute nothing for n >= 1.
    decaying = [(lam, ov) for lam, ov in visible if lam > DEGENERACY_TOL]
    if not decaying:
        return SpectralReport(evals, overlaps, None, None, 0.0, 0.0, None, None, 0.0, False)
    lam1, ov1 = decaying[0]
    lam1 = min(lam1, 1.0)
    if len(decaying) > 1:
        lam2, ov2 = decaying[1]
        n_star = math.log(math.sqrt(ov2) / math.sqrt(ov1)) / math.log(lam1 / lam2)
        n_star = max(n_star, 0.0)
    else:
        lam2, ov2 = (0.0, 0.0)
        n_star = 0.0
    return SpectralReport(
        eigenvalues=evals,
        overlaps=overlaps,
        lambda_max=lam1,
        lambda_max2=lam2,
        overlap_max=ov1,
        overlap_max2=ov2,
        predicted_slope=math.log(lam1),
        predicted_offset=math.log(ov1),
        n_star=n_star,
        has_decay_mode=True,
    )


def direct_sn(u_super: np.ndarray, rho0: np.ndarray, n: int) -> float:
    """``<rho0|F^n|rho0>`` by repeated matrix-vector products."""
    return direct_tn(u_super, rho0, rho0, n)


def direct_tn(u_super: np.ndarray, a: np.ndarray, b: np.ndarray, n: int) -> float:
    """``<b|F^n|a>`` by repeated matrix-vector products."""
    if n < 0:
        raise SpectralError("n must be non-negative")
    f = build_F(u_super)
    v = np.asarray(a, dtype=complex)
    for _ in range(n):
        v = f @ v
    val = np.vdot(np.asarray(b, dtype=complex), v)
    if abs(val.imag) > lv.VALIDATION_TOL:
        raise SpectralError(f"<b|F^n|a> has imaginary part {val.imag:.3g}; convention bug")
    return float(val.real)
