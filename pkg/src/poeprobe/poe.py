"""Periodic-evolution measurement records and the binomial-weighted S_n / T_n series.

A record holds one probability per cycle count ``k = 0..n_max``.  Records are
assembled from one or more *measurement families* (independent experiment
series).  Simulated and ingested data go through the same assembly function,
:func:`record_from_families`, so they are analysed identically.

For a recurrence record ``R_k`` the series value is

    S_n = sum_k w_k R_k,   w_0 = C(2n, n) / 4**n,   w_k = 2 (-1)**k C(2n, n-k) / 4**n,

which equals ``<rho0|F^n|rho0>`` with ``F = 1/2 - (U + U^dagger)/4`` whenever
the evolution is unitary and periodic.  For cross-state records the same
weights are applied to the symmetrized transition series, with ``w_0``
multiplying the known overlap ``<b|a>``; the result is ``<b|F^n|a>``.

Note on the cross-state weights: the alternating sign ``(-1)**k`` is kept.
Dropping it (and halving the sum) does not reproduce ``<b|F^n|a>``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import liouville as lv
from .circuits import CircuitSpec
from .noise import NoiseSpec, cycle_channel, measurement_effect, prepare

RECORD_KINDS = ("recurrence", "cross_state", "subsystem")
EXACT_RANGE_TOL = 1e-12
DEFAULT_SHOTS = 1000


class RecordError(ValueError):
    pass


@dataclass
class PoeRecord:
    """Per-cycle probabilities with their variance estimates.

    ``families`` maps a family name to its raw per-cycle probabilities;
    ``counts`` holds the success counts when the record was sampled or
    ingested (``shots > 0``).  ``values`` is the combined series that feeds
    :func:`sn_from_record`.
    """

    kind: str
    values: np.ndarray
    variances: np.ndarray
    shots: int = 0
    families: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    scale: float = 1.0
    overlap: Optional[float] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in RECORD_KINDS:
            raise RecordError(f"unknown record kind {self.kind!r}")
        self.values = np.asarray(self.values, dtype=float)
        self.variances = np.asarray(self.variances, dtype=float)
        if self.values.shape != self.variances.shape or self.values.ndim != 1:
            raise RecordError("values and variances must be 1-D arrays of equal length")
        if self.values.size < 2:
            raise RecordError("a record needs at least k = 0 and k = 1")
        lo, hi = (-EXACT_RANGE_TOL, 1 + EXACT_RANGE_TOL) if self.shots == 0 else (0.0, 1.0)
        if np.any(self.values < lo) or np.any(self.values > hi):
            raise RecordError("record values must lie in [0, 1]")

    @property
    def n_max(self) -> int:
        return self.values.size - 1

    @property
    def series_kind(self) -> str:
        return "T" if self.kind == "cross_state" else "S"


@dataclass
class SnSeries:
    """S_n (or T_n) for ``n = 1..n_max`` with propagated variances."""

    kind: str
    n: np.ndarray
    values: np.ndarray
    variances: np.ndarray
    weights_used: list = field(default_factory=list)
    exact: bool = True

    def __len__(self):
        return self.values.size


def binomial_weights(n: int) -> np.ndarray:
    """Weights ``w_0..w_n`` with ``S_n = sum_k w_k R_k``.

    ``C(2n, n) / 4**n`` is built as the running product of ``(2j - 1) / (2j)``
    and the remaining coefficients by the ratio
    ``C(2n, n-k-1) = C(2n, n-k) (n-k) / (n+k+1)``, so no factorial is formed.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError("n must be a positive integer")
    central = 1.0
    for j in range(1, n + 1):
        central = central * (2 * j - 1) / (2 * j)
    w = np.empty(n + 1)
    w[0] = central
    c = central
    for k in range(1, n + 1):
        c = c * (n - k + 1) / (n + k)
        w[k] = 2.0 * c if k % 2 == 0 else -2.0 * c
    return w


def _family_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _evolve(circuit: CircuitSpec, noise: NoiseSpec, state: np.ndarray, effect: np.ndarray, n_max: int) -> np.ndarray:
    """Probabilities ``<effect|rho_k>`` for ``k = 0..n_max``."""
    probs = np.empty(n_max + 1)
    channel = cycle_channel(circuit, noise, 0) if noise.periodic else None
    rho = state
    for k in range(n_max + 1):
        probs[k] = lv.inner(effect, rho)
        if k == n_max:
            break
        step = channel if channel is not None else cycle_channel(circuit, noise, k)
        rho = lv.apply(step, rho, validate=True)
    return probs


def _combine(kind: str, probs: list[np.ndarray], variances: list[np.ndarray], scale: float):
    if kind == "cross_state":
        if len(probs) != 2:
            raise RecordError("cross-state records need exactly two families")
        return (probs[0] + probs[1]) / 2, (variances[0] + variances[1]) / 4
    m = len(probs)
    if kind == "recurrence" and m != 1:
        raise RecordError("recurrence records have a single family")
    values = scale * np.mean(probs, axis=0)
    var = scale**2 * np.sum(variances, axis=0) / m**2
    return values, var


def record_from_families(
    kind: str,
    families: dict,
    shots: int = 0,
    scale: float = 1.0,
    overlap: Optional[float] = None,
    metadata: Optional[dict] = None,
    totals: Optional[dict] = None,
) -> PoeRecord:
    """Assemble a record from per-family data.

    With ``shots == 0`` each family entry is an array of exact probabilities.
    Otherwise each entry is an integer array of success counts out of
    ``shots`` (or out of the per-point ``totals[family]`` when given), and
    the binomial variance ``p (1 - p) / shots`` is attached.
    Family order matters for cross-state records: forward first, then reverse.
    """
    names = list(families)
    if not names:
        raise RecordError("no measurement families")
    counts = {}
    if shots == 0:
        probs = [np.asarray(families[f], dtype=float) for f in names]
        fam_vars = [np.zeros_like(p) for p in probs]
    else:
        probs, fam_vars = [], []
        for f in names:
            c = np.asarray(families[f])
            t = np.full(c.shape, shots) if totals is None else np.asarray(totals[f])
            if np.any(t <= 0) or np.any(c < 0) or np.any(c > t):
                raise RecordError(f"family {f!r}: counts outside [0, total_shots]")
            counts[f] = c.astype(np.int64)
            p = counts[f] / t
            probs.append(p)
            fam_vars.append(p * (1 - p) / t)
    if len({p.size for p in probs}) != 1:
        raise RecordError("families have different lengths")
    values, var = _combine(kind, probs, fam_vars, scale)
    return PoeRecord(
        kind=kind,
        values=values,
        variances=var,
        shots=shots,
        families=dict(zip(names, probs)),
        counts=counts,
        scale=scale,
        overlap=overlap,
        metadata=dict(metadata or {}),
    )


def _sample(exact: dict, shots: int, seed: Optional[int]) -> dict:
    if seed is None:
        raise RecordError("sampled runs need a seed")
    out = {}
    for index, (name, p) in enumerate(exact.items()):
        rng = _family_rng(seed, index)
        out[name] = rng.binomial(shots, np.clip(p, 0.0, 1.0))
    return out


def _build(kind, exact_families, shots, seed, scale=1.0, overlap=None, metadata=None):
    if shots < 0:
        raise RecordError("shots must be non-negative")
    meta = dict(metadata or {})
    meta["seed"] = seed
    if shots == 0:
        return record_from_families(kind, exact_families, 0, scale, overlap, meta)
    return record_from_families(kind, _sample(exact_families, shots, seed), shots, scale, overlap, meta)


def _check_dims(circuit: CircuitSpec, *states: np.ndarray) -> None:
    for s in states:
        if s.size != circuit.dim**2:
            raise RecordError(f"state of length {s.size} does not match a {circuit.n_qubits}-qubit circuit")
        lv.check_density_vector(s)


def _check_n_max(n_max: int) -> None:
    if n_max < 1:
        raise RecordError("n_max must be at least 1")


def run_recurrence(
    circuit: CircuitSpec,
    noise: NoiseSpec,
    rho0: np.ndarray,
    n_max: int,
    shots: int = 0,
    seed: Optional[int] = None,
    metadata: Optional[dict] = None,
) -> PoeRecord:
    """Survival probabilities ``R_k`` of ``rho0`` after ``k`` noisy drive cycles."""
    _check_n_max(n_max)
    rho0 = np.asarray(rho0, dtype=complex)
    _check_dims(circuit, rho0)
    state = prepare(rho0, noise.spam)
    effect = measurement_effect(rho0, noise.spam)
    probs = _evolve(circuit, noise, state, effect, n_max)
    return _build("recurrence", {"recurrence": probs}, shots, seed, metadata=metadata)


def _check_pure(v: np.ndarray, name: str) -> None:
    purity = lv.inner(v, v)
    if abs(purity - 1.0) > lv.VALIDATION_TOL:
        raise RecordError(f"cross-state test state {name} must be pure (purity {purity:.6g})")


def run_cross_state(
    circuit: CircuitSpec,
    noise: NoiseSpec,
    a: np.ndarray,
    b: np.ndarray,
    n_max: int,
    shots: int = 0,
    seed: Optional[int] = None,
    metadata: Optional[dict] = None,
) -> PoeRecord:
    """Symmetrized transition series ``(P_k^{a->b} + P_k^{b->a}) / 2``.

    The forward family starts in ``a`` and is scored against ``b``; the
    reverse family starts in ``b`` and is scored against ``a``.
    """
    _check_n_max(n_max)
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _check_dims(circuit, a, b)
    _check_pure(a, "a")
    _check_pure(b, "b")
    spam = noise.spam
    forward = _evolve(circuit, noise, prepare(a, spam), measurement_effect(b, spam), n_max)
    reverse = _evolve(circuit, noise, prepare(b, spam), measurement_effect(a, spam), n_max)
    return _build(
        "cross_state",
        {"forward": forward, "reverse": reverse},
        shots,
        seed,
        overlap=lv.inner(b, a),
        metadata=metadata,
    )


SUBSYSTEM_MODES = ("direct_mixed", "emulated_average")


def run_subsystem(
    circuit: CircuitSpec,
    noise: NoiseSpec,
    pure_part: np.ndarray,
    n_max: int,
    shots: int = 0,
    seed: Optional[int] = None,
    mode: str = "direct_mixed",
    metadata: Optional[dict] = None,
) -> PoeRecord:
    """Recurrence of ``pure_part (x) I / 2**(N-d)`` on the full register.

    ``pure_part`` lives on the first ``d`` qubits.  ``direct_mixed`` evolves
    the mixed product state itself; ``emulated_average`` runs one family per
    computational basis state of the remaining qubits and averages them.  In
    both cases the probe qubits alone are scored, and the result is scaled by
    ``1 / 2**(N-d)`` so that ``R_k = <rho_m|rho_m(k)>``.
    """
    _check_n_max(n_max)
    if mode not in SUBSYSTEM_MODES:
        raise RecordError(f"unknown subsystem mode {mode!r}")
    pure_part = np.asarray(pure_part, dtype=complex)
    rho_p = lv.devectorize(pure_part)
    lv.check_density_matrix(rho_p)
    d_dim = rho_p.shape[0]
    d = d_dim.bit_length() - 1
    if 2**d != d_dim:
        raise RecordError("probe state dimension is not a power of two")
    n_anc = circuit.n_qubits - d
    if n_anc < 0:
        raise RecordError(f"probe has {d} qubits but the circuit only {circuit.n_qubits}")
    anc_dim = 2**n_anc
    scale = 1.0 / anc_dim
    spam = noise.spam
    effect = measurement_effect(lv.vectorize(np.kron(rho_p, np.eye(anc_dim)), validate=False), spam)
    meta = dict(metadata or {})
    meta.update(subsystem_mode=mode, probe_qubits=d)
    if mode == "direct_mixed":
        rho_m = lv.vectorize(np.kron(rho_p, np.eye(anc_dim) / anc_dim))
        families = {"direct": _evolve(circuit, noise, prepare(rho_m, spam), effect, n_max)}
    else:
        families = {}
        for j in range(anc_dim):
            anc = np.zeros((anc_dim, anc_dim), dtype=complex)
            anc[j, j] = 1.0
            start = lv.vectorize(np.kron(rho_p, anc))
            families[f"prep_{j}"] = _evolve(circuit, noise, prepare(start, spam), effect, n_max)
    return _build("subsystem", families, shots, seed, scale=scale, metadata=meta)


def sn_from_record(rec: PoeRecord, n: int) -> tuple[float, float]:
    """Value and variance of S_n (or T_n for cross-state records)."""
    if n < 1 or n > rec.n_max:
        raise RecordError(f"n = {n} outside 1..{rec.n_max}")
    w = binomial_weights(n)
    vals = rec.values[: n + 1].copy()
    var = rec.variances[: n + 1].copy()
    if rec.kind == "cross_state" and rec.overlap is not None:
        vals[0] = rec.overlap
        var[0] = 0.0
    return float(w @ vals), float((w**2) @ var)


def sn_series(rec: PoeRecord) -> SnSeries:
    ns = np.arange(1, rec.n_max + 1)
    pairs = [sn_from_record(rec, int(n)) for n in ns]
    return SnSeries(
        kind=rec.series_kind,
        n=ns,
        values=np.array([p[0] for p in pairs]),
        variances=np.array([p[1] for p in pairs]),
        weights_used=[binomial_weights(int(n)) for n in ns],
        exact=rec.shots == 0,
    )


def inequality_check(s: SnSeries, tol: float = lv.VALIDATION_TOL) -> list[tuple[int, float]]:
    """Every ``(n, S_n)`` with ``S_n < -tol``.  Only defined for S series."""
    if s.kind != "S":
        raise ValueError("no positivity inequality holds for cross-state T_n series")
    return [(int(n), float(v)) for n, v in zip(s.n, s.values) if v < -tol]
