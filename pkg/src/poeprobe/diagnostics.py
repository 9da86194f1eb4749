"""Exponential-law fits, shape checks and the overall detection verdict."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .poe import SnSeries, inequality_check

CONSISTENT = "consistent_with_POE"
DETECTED = "POE_sensitive_error_detected"
INSUFFICIENT = "insufficient_data"

DEFAULT_ALPHA = 0.01
EXACT_SHAPE_TOL = 1e-10
#: Exact-mode detection threshold on max |S_n - fit| / fit inside the window.
EXACT_REL_RESIDUAL_TOL = 1e-6
NOISE_FLOOR_SIGMAS = 3.0
RESIDUAL_UNITS = ("absolute", "relative")


@dataclass
class FitReport:
    slope: float
    intercept: float
    slope_stderr: float
    intercept_stderr: float
    fit_window: tuple[int, int]
    n_used: np.ndarray
    residuals_ppt: np.ndarray
    chi2: Optional[float]
    dof: int
    p_value: Optional[float]
    verdict: str
    exact: bool
    residual_units: str = "absolute"
    max_rel_residual: float = float("nan")

    @property
    def max_abs_residual_ppt(self) -> float:
        if self.residuals_ppt.size == 0:
            return float("nan")
        return float(np.max(np.abs(self.residuals_ppt)))

    def predict(self, n) -> np.ndarray:
        return np.exp(self.intercept + self.slope * np.asarray(n, dtype=float))

    def to_dict(self) -> dict:
        return {
            "slope": _num(self.slope),
            "intercept": _num(self.intercept),
            "slope_stderr": _num(self.slope_stderr),
            "intercept_stderr": _num(self.intercept_stderr),
            "fit_window": list(self.fit_window),
            "n_used": [int(n) for n in self.n_used],
            "residuals_ppt": [float(r) for r in self.residuals_ppt],
            "residual_units": self.residual_units,
            "max_abs_residual_ppt": _num(self.max_abs_residual_ppt),
            "max_rel_residual": _num(self.max_rel_residual),
            "chi2": self.chi2,
            "dof": self.dof,
            "p_value": self.p_value,
            "verdict": self.verdict,
            "exact": self.exact,
        }


def _num(x: float) -> Optional[float]:
    return None if x is None or not math.isfinite(x) else float(x)


def _insufficient(window, exact, units) -> FitReport:
    nan = float("nan")
    return FitReport(nan, nan, nan, nan, window, np.array([], int), np.array([]), None, 0, None,
                     INSUFFICIENT, exact, units)


def fit_exponential(
    s: SnSeries,
    window: Optional[Sequence[int]] = None,
    alpha: float = DEFAULT_ALPHA,
    residual_units: str = "absolute",
    exact_rel_tol: float = EXACT_REL_RESIDUAL_TOL,
) -> FitReport:
    """Least-squares line through ``ln S_n`` versus ``n``.

    Points with ``S_n <= 0`` are dropped, as are exact values at round-off
    level and sampled values below three standard deviations.
    Sampled series are weighted by ``S_n**2 / Var(S_n)`` and tested with a
    chi-square on the linear-space residuals; exact series are fitted
    unweighted and flagged when the largest relative residual exceeds
    ``exact_rel_tol``.
    """
    if residual_units not in RESIDUAL_UNITS:
        raise ValueError(f"residual_units must be one of {RESIDUAL_UNITS}")
    n_all = np.asarray(s.n)
    lo, hi = (int(n_all.min()), int(n_all.max())) if window is None else (int(window[0]), int(window[1]))
    lo = max(lo, 1)
    if hi < lo:
        raise ValueError(f"empty fit window [{lo}, {hi}]")
    vals = np.asarray(s.values, dtype=float)
    var = np.asarray(s.variances, dtype=float)
    mask = (n_all >= lo) & (n_all <= hi) & (vals > 0)
    if s.exact:
        # round-off sized values carry no decay information
        mask &= vals > EXACT_SHAPE_TOL
    else:
        mask &= vals >= NOISE_FLOOR_SIGMAS * np.sqrt(var)
    if mask.sum() < 3:
        return _insufficient((lo, hi), s.exact, residual_units)

    n = n_all[mask].astype(float)
    y = vals[mask]
    v = var[mask]
    design = np.column_stack([np.ones_like(n), n])
    if s.exact:
        w = np.ones_like(n)
    else:
        floor = v[v > 0].min() if np.any(v > 0) else 1.0
        w = y**2 / np.where(v > 0, v, floor)
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(design * sw[:, None], np.log(y) * sw, rcond=None)
    intercept, slope = float(coef[0]), float(coef[1])
    xtwx_inv = np.linalg.inv(design.T @ (design * w[:, None]))
    dof = int(n.size - 2)
    fitted = np.exp(intercept + slope * n)
    diff = y - fitted
    if s.exact:
        log_resid = np.log(y) - (intercept + slope * n)
        s2 = float(log_resid @ log_resid) / dof
        cov = s2 * xtwx_inv
        chi2 = p_value = None
        max_rel = float(np.max(np.abs(diff) / fitted))
        verdict = DETECTED if max_rel > exact_rel_tol else CONSISTENT
    else:
        cov = xtwx_inv
        chi2 = float(np.sum(diff**2 / np.where(v > 0, v, floor)))
        p_value = float(stats.chi2.sf(chi2, dof))
        max_rel = float(np.max(np.abs(diff) / fitted))
        verdict = DETECTED if p_value < alpha else CONSISTENT
    resid = diff * 1000 if residual_units == "absolute" else diff / fitted * 1000
    return FitReport(
        slope=slope,
        intercept=intercept,
        slope_stderr=float(math.sqrt(max(cov[1, 1], 0.0))),
        intercept_stderr=float(math.sqrt(max(cov[0, 0], 0.0))),
        fit_window=(lo, hi),
        n_used=n.astype(int),
        residuals_ppt=resid,
        chi2=chi2,
        dof=dof,
        p_value=p_value,
        verdict=verdict,
        exact=s.exact,
        residual_units=residual_units,
        max_rel_residual=max_rel,
    )


@dataclass
class Comparison:
    n: np.ndarray
    diff_ppt: np.ndarray
    sigma_ppt: np.ndarray


def compare_to_reference(measured: SnSeries, reference: SnSeries) -> Comparison:
    """Per-n ``(measured - reference) * 1000`` with the combined standard deviation."""
    if len(measured) != len(reference):
        raise ValueError(f"series lengths differ: {len(measured)} vs {len(reference)}")
    return Comparison(
        n=np.asarray(measured.n),
        diff_ppt=(measured.values - reference.values) * 1000,
        sigma_ppt=np.sqrt(measured.variances + reference.variances) * 1000,
    )


@dataclass
class ShapeReport:
    monotonicity: list = field(default_factory=list)
    curvature: list = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.monotonicity and not self.curvature


def shape_check(s: SnSeries, tol: Optional[float] = None) -> ShapeReport:
    """Find increases ``S_{n+1} - S_n > tol`` and negative second differences.

    Entries are ``(n, difference)``; a curvature entry's ``n`` is the middle
    point.  Without ``tol``, exact series use ``1e-10`` and sampled series
    use three combined standard deviations per difference.
    """
    v = np.asarray(s.values, dtype=float)
    var = np.asarray(s.variances, dtype=float)
    ns = np.asarray(s.n)
    report = ShapeReport()
    if v.size < 3:
        return report
    d1 = v[1:] - v[:-1]
    d2 = v[2:] - 2 * v[1:-1] + v[:-2]
    if tol is not None:
        t1 = np.full(d1.shape, tol)
        t2 = np.full(d2.shape, tol)
    elif s.exact:
        t1 = np.full(d1.shape, EXACT_SHAPE_TOL)
        t2 = np.full(d2.shape, EXACT_SHAPE_TOL)
    else:
        t1 = NOISE_FLOOR_SIGMAS * np.sqrt(var[1:] + var[:-1])
        t2 = NOISE_FLOOR_SIGMAS * np.sqrt(var[2:] + 4 * var[1:-1] + var[:-2])
    report.monotonicity = [(int(ns[i]), float(d1[i])) for i in np.flatnonzero(d1 > t1)]
    report.curvature = [(int(ns[i + 1]), float(d2[i])) for i in np.flatnonzero(d2 < -t2)]
    return report


@dataclass
class Verdict:
    status: str
    evidence: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"status": self.status, "evidence": list(self.evidence)}


def verdict(
    fit: Optional[FitReport] = None,
    shape: Optional[ShapeReport] = None,
    ineq: Optional[list] = None,
    alpha: float = DEFAULT_ALPHA,
) -> Verdict:
    """Combine the individual signatures into one decision."""
    if fit is None and shape is None and ineq is None:
        raise ValueError("verdict needs at least one input")
    evidence = []
    if fit is not None and fit.verdict != INSUFFICIENT:
        if fit.exact and fit.verdict == DETECTED:
            evidence.append(
                f"fit residuals: max relative residual {fit.max_rel_residual:.3g} "
                f"over n={fit.fit_window[0]}..{fit.fit_window[1]}"
            )
        elif not fit.exact and fit.p_value is not None and fit.p_value < alpha:
            evidence.append(f"fit residuals: chi2={fit.chi2:.4g}, dof={fit.dof}, p={fit.p_value:.3g}")
    if shape is not None:
        for n, d in shape.monotonicity:
            evidence.append(f"monotonicity: S_{n + 1} - S_{n} = {d:.3g} > 0")
        for n, d in shape.curvature:
            evidence.append(f"convexity: second difference at n={n} is {d:.3g} < 0")
    for n, val in ineq or []:
        evidence.append(f"positivity inequality: S_{n} = {val:.3g} < 0")
    if evidence:
        return Verdict(DETECTED, evidence)
    if fit is not None and fit.verdict == INSUFFICIENT:
        return Verdict(INSUFFICIENT, ["too few usable points for the exponential fit"])
    return Verdict(CONSISTENT, [])


@dataclass
class Analysis:
    series: SnSeries
    fit: FitReport
    shape: ShapeReport
    inequality: Optional[list]
    verdict: Verdict


def analyze_series(
    s: SnSeries,
    window: Optional[Sequence[int]] = None,
    alpha: float = DEFAULT_ALPHA,
    residual_units: str = "absolute",
    n_star: Optional[float] = None,
) -> Analysis:
    """Full diagnostic pass shared by simulated and ingested data.

    Without an explicit ``window`` the fit runs over ``[max(ceil(n_star), 1), n_max]``.
    """
    if window is None:
        lo = max(int(math.ceil(n_star)) if n_star else 1, 1)
        window = (lo, int(np.max(s.n)))
    fit = fit_exponential(s, window, alpha, residual_units)
    shape = shape_check(s)
    ineq = inequality_check(s) if s.kind == "S" and s.exact else None
    if s.kind == "S" and not s.exact:
        ineq = [(int(n), float(v)) for n, v, var in zip(s.n, s.values, s.variances)
                if v < -NOISE_FLOOR_SIGMAS * math.sqrt(var)]
    return Analysis(s, fit, shape, ineq, verdict(fit, shape, ineq, alpha))
