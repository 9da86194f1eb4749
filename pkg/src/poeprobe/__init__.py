"""Signatures of unitary periodic evolution and the diagnostics built on them."""
from .circuits import CircuitSpec, GateSpec, cycle_unitary, gate_matrix, paper_circuit
from .diagnostics import analyze_series, compare_to_reference, fit_exponential, shape_check, verdict
from .liouville import apply, compose, devectorize, inner, kraus_superop, unitary_superop, vectorize
from .noise import NoiseSpec, SpamSpec, cycle_channel, damping_gamma
from .poe import (
    PoeRecord,
    SnSeries,
    binomial_weights,
    inequality_check,
    run_cross_state,
    run_recurrence,
    run_subsystem,
    sn_from_record,
    sn_series,
)
from .spectral import build_F, direct_sn, direct_tn, spectral_report

__version__ = "0.1.0"
