import math

import numpy as np
import pytest

from poeprobe import liouville as lv
from poeprobe.circuits import GateSpec, cycle_unitary, paper_circuit, with_xx_offset
from poeprobe.noise import (
    NoiseSpec,
    NoiseSpecError,
    SpamSpec,
    amplitude_damping_kraus,
    apply_spam,
    cycle_channel,
    damping_gamma,
    measurement_effect,
    per_qubit_channel,
    tensor_detector,
)

X0 = (GateSpec("X", (0,)),)


def test_damping_gamma_values():
    assert damping_gamma(1.0) == pytest.approx(1 - math.exp(-1), abs=1e-15)
    assert damping_gamma(1.0) == pytest.approx(0.63212, abs=1e-5)
    assert damping_gamma(10.0) == pytest.approx(0.09516, abs=1e-5)
    assert damping_gamma(1e12) == pytest.approx(1e-12, rel=1e-6)
    for bad in (0.0, -3.0):
        with pytest.raises(NoiseSpecError):
            damping_gamma(bad)


def test_noiseless_channel_is_the_unitary(circuit):
    want = lv.unitary_superop(cycle_unitary(circuit))
    for k in (0, 3, 17):
        assert np.array_equal(cycle_channel(circuit, NoiseSpec(), k), want)


def test_miscalibration_angle_and_k_independence(circuit):
    spec = NoiseSpec("miscalibration", delta_theta=0.1 * circuit.gates[0].angle)
    assert with_xx_offset(circuit, 0.1).gates[0].angle == pytest.approx(1.1, abs=1e-15)
    want = lv.unitary_superop(cycle_unitary(paper_circuit(theta=1.1)))
    c0 = cycle_channel(circuit, spec, 0)
    np.testing.assert_allclose(c0, want, atol=1e-15)
    assert all(np.array_equal(c0, cycle_channel(circuit, spec, k)) for k in (1, 9, 30))


def test_drift_depends_on_cycle(circuit):
    spec = NoiseSpec("drift", dtheta_per_cycle=0.01)
    assert not spec.periodic
    diff = np.max(np.abs(cycle_channel(circuit, spec, 0) - cycle_channel(circuit, spec, 5)))
    assert diff > 0
    np.testing.assert_allclose(
        cycle_channel(circuit, spec, 5),
        lv.unitary_superop(cycle_unitary(paper_circuit(theta=1.05))),
        atol=1e-14,
    )


@pytest.mark.parametrize(
    "spec",
    [
        NoiseSpec(),
        NoiseSpec("amplitude_damping", t1_in_cycles=3.0),
        NoiseSpec("amplitude_damping", t1_in_cycles=3.0, split_damping=True),
        NoiseSpec("miscalibration", delta_theta=0.1),
        NoiseSpec("drift", dtheta_per_cycle=0.05),
        NoiseSpec("dephasing", p=0.1),
        NoiseSpec("depolarizing", p=0.2),
    ],
)
def test_every_channel_is_trace_preserving(circuit, spec):
    for k in (0, 4):
        assert lv.is_trace_preserving(cycle_channel(circuit, spec, k))


def test_damping_applied_after_unitary(circuit, rho00):
    spec = NoiseSpec("amplitude_damping", t1_in_cycles=4.0)
    g = damping_gamma(4.0)
    u = cycle_unitary(circuit)
    rho = u @ lv.devectorize(rho00) @ u.conj().T
    for q in range(2):
        ks = [np.kron(k, np.eye(2)) if q == 0 else np.kron(np.eye(2), k) for k in amplitude_damping_kraus(g)]
        rho = sum(k @ rho @ k.conj().T for k in ks)
    got = lv.apply(cycle_channel(circuit, spec, 0), rho00)
    np.testing.assert_allclose(got, rho.reshape(-1), atol=1e-14)


def test_weak_damping_approaches_noiseless(circuit):
    ideal = lv.unitary_superop(cycle_unitary(circuit))
    for t1 in (1e3, 1e5, 1e7):
        g = damping_gamma(t1)
        chan = cycle_channel(circuit, NoiseSpec("amplitude_damping", t1_in_cycles=t1), 0)
        assert np.max(np.abs(chan - ideal)) <= 10 * g


def test_per_qubit_channel_single_qubit_matches_kraus():
    ks = amplitude_damping_kraus(0.3)
    np.testing.assert_allclose(per_qubit_channel(ks, 1), lv.kraus_superop(ks), atol=1e-15)


def test_trivial_spam_is_identity(rho00):
    spam = SpamSpec(detector_matrix=np.eye(4))
    np.testing.assert_array_equal(apply_spam(rho00, spam, "prep"), rho00)
    q = np.array([0.1, 0.2, 0.3, 0.4])
    np.testing.assert_array_equal(apply_spam(q, spam, "measure"), q)


def test_detector_matrix_is_column_stochastic():
    spam = SpamSpec(detector_matrix=[[0.99, 0.02], [0.01, 0.98]])
    np.testing.assert_allclose(apply_spam(np.array([1.0, 0.0]), spam, "measure"), [0.99, 0.01], atol=1e-15)
    # Row-stochastic input is refused: it would not conserve probability.
    with pytest.raises(NoiseSpecError):
        SpamSpec(detector_matrix=[[0.99, 0.01], [0.02, 0.98]])


def test_prep_mixture_populations():
    spam = SpamSpec(prep_mixture=((0.9, ()), (0.1, X0)))
    v = apply_spam(lv.vectorize(np.diag([1.0, 0.0])), spam, "prep")
    np.testing.assert_allclose(np.diag(lv.devectorize(v)).real, [0.9, 0.1], atol=1e-15)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(prep_mixture=((0.5, ()), (0.4, X0))),
        dict(prep_mixture=((1.2, ()), (-0.2, X0))),
        dict(prep_mixture=()),
        dict(detector_matrix=[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
        dict(detector_matrix=[[1.1, 0.0], [-0.1, 1.0]]),
    ],
)
def test_bad_spam(kwargs):
    with pytest.raises(NoiseSpecError):
        SpamSpec(**kwargs)


def test_bad_noise_specs():
    for kwargs in (dict(kind="bogus"), dict(kind="amplitude_damping"), dict(kind="amplitude_damping", t1_in_cycles=-1),
                   dict(kind="miscalibration"), dict(kind="drift", dtheta_per_cycle=float("inf")),
                   dict(kind="dephasing", p=1.5)):
        with pytest.raises(NoiseSpecError):
            NoiseSpec(**kwargs)


def test_measurement_effect_with_readout_error(rho00):
    single = np.array([[0.98, 0.03], [0.02, 0.97]])
    spam = SpamSpec(detector_matrix=tensor_detector(single, 2))
    eff = lv.devectorize(measurement_effect(rho00, spam))
    # P(report 00 | true j) for j = 00, 01, 10, 11
    want = [0.98 * 0.98, 0.98 * 0.03, 0.03 * 0.98, 0.03 * 0.03]
    np.testing.assert_allclose(np.diag(eff).real, want, atol=1e-15)
    plus = lv.pure_state(np.array([1, 0, 1, 0]) / math.sqrt(2))
    with pytest.raises(NoiseSpecError):
        measurement_effect(plus, spam)


def test_spam_never_touches_the_cycle_channel(circuit):
    spam = SpamSpec(prep_mixture=((0.95, ()), (0.05, X0)), detector_matrix=np.eye(4))
    assert np.array_equal(cycle_channel(circuit, NoiseSpec(spam=spam), 2), cycle_channel(circuit, NoiseSpec(), 2))
