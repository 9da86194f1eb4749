"""Experiment configuration: a single versioned JSON document.

Example::

    {
      "schema_version": 1,
      "circuit": "demo",
      "initial_state": "00",
      "mode": "recurrence",
      "noise": {"kind": "amplitude_damping", "t1_in_cycles": 5},
      "n_max": 35,
      "shots": 0,
      "fit": {"window": null, "alpha": 0.01, "residual_units": "absolute"},
      "outputs": [{"format": "csv", "path": "out/series.csv"}]
    }

Relative output paths resolve against the directory holding the config file.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .circuits import CircuitError, CircuitSpec, GateSpec, circuit_from_gates, paper_circuit, product_ket
from .diagnostics import DEFAULT_ALPHA, RESIDUAL_UNITS
from .liouville import InvalidStateError, pure_state
from .noise import NoiseSpec, NoiseSpecError, SpamSpec, tensor_detector
from .poe import SUBSYSTEM_MODES

SCHEMA_VERSION = 1
OUTPUT_FORMATS = ("csv", "json", "svg", "record")
MODES = ("recurrence", "cross_state", "subsystem")
DEMO_PRESETS = ("demo",)


class ConfigError(ValueError):
    """The config file is unreadable or violates the schema."""


@dataclass(frozen=True)
class FitConfig:
    window: Optional[tuple[int, int]] = None
    alpha: float = DEFAULT_ALPHA
    residual_units: str = "absolute"


@dataclass(frozen=True)
class OutputSpec:
    format: str
    path: Path


@dataclass(frozen=True)
class ExperimentConfig:
    circuit: CircuitSpec
    mode: str
    noise: NoiseSpec
    n_max: int
    shots: int = 0
    seed: Optional[int] = None
    initial_state: Any = "00"
    state_a: Any = None
    state_b: Any = None
    subsystem_d: Optional[int] = None
    subsystem_mode: str = "direct_mixed"
    fit: FitConfig = field(default_factory=FitConfig)
    outputs: tuple[OutputSpec, ...] = ()
    name: str = "experiment"


def state_vector(spec: Any) -> np.ndarray:
    """Density vector from a label such as ``"+0"`` or an amplitude list.

    Amplitudes may be real numbers or ``[re, im]`` pairs.
    """
    if isinstance(spec, str):
        return pure_state(product_ket(spec))
    if isinstance(spec, dict) and "amplitudes" in spec:
        spec = spec["amplitudes"]
    if isinstance(spec, list) and spec:
        amps = [complex(a[0], a[1]) if isinstance(a, list) else complex(a) for a in spec]
        n = len(amps)
        if n & (n - 1):
            raise ConfigError(f"amplitude list length {n} is not a power of two")
        return pure_state(amps)
    raise ConfigError(f"cannot interpret state {spec!r}")


def state_label(spec: Any) -> str:
    return spec if isinstance(spec, str) else json.dumps(spec, separators=(",", ":"))


def _gates(raw) -> tuple[GateSpec, ...]:
    return tuple(GateSpec(g["kind"], tuple(g["targets"]), g.get("angle")) for g in raw)


def _circuit(raw) -> CircuitSpec:
    if raw in DEMO_PRESETS:
        return paper_circuit()
    if isinstance(raw, dict) and raw.get("preset") in DEMO_PRESETS:
        return paper_circuit(raw.get("theta", 1.0), raw.get("phi", 2.4), raw.get("y_qubit", 0))
    if isinstance(raw, dict):
        return circuit_from_gates(int(raw["n_qubits"]), raw["gates"])
    raise ConfigError("circuit must be 'demo', a demo preset, or {n_qubits, gates}")


def _spam(raw, n_qubits: int) -> Optional[SpamSpec]:
    if raw is None:
        return None
    mix = raw.get("prep_mixture", [{"p": 1.0, "gates": []}])
    prep = tuple((float(m["p"]), _gates(m.get("gates", []))) for m in mix)
    det = None
    if raw.get("detector_matrix") is not None:
        det = np.array(raw["detector_matrix"], dtype=float)
    elif raw.get("detector_per_qubit") is not None:
        det = tensor_detector(np.array(raw["detector_per_qubit"], dtype=float), n_qubits)
    if det is not None and det.shape != (2**n_qubits, 2**n_qubits):
        raise ConfigError(f"detector matrix shape {det.shape} does not fit {n_qubits} qubits")
    return SpamSpec(prep_mixture=prep, detector_matrix=det)


def _noise(raw, n_qubits: int) -> NoiseSpec:
    if raw is None:
        return NoiseSpec()
    known = {"kind", "t1_in_cycles", "delta_theta", "dtheta_per_cycle", "p", "split_damping", "spam"}
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"unknown noise keys {sorted(extra)}")
    return NoiseSpec(
        kind=raw.get("kind", "none"),
        t1_in_cycles=raw.get("t1_in_cycles"),
        delta_theta=raw.get("delta_theta"),
        dtheta_per_cycle=raw.get("dtheta_per_cycle"),
        p=raw.get("p"),
        split_damping=bool(raw.get("split_damping", False)),
        spam=_spam(raw.get("spam"), n_qubits),
    )


def parse_config(doc: dict, base_dir: Path = Path(".")) -> ExperimentConfig:
    """Validate a decoded config document; raises :class:`ConfigError`."""
    try:
        return _parse(doc, Path(base_dir))
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError, CircuitError, NoiseSpecError, InvalidStateError) as exc:
        raise ConfigError(f"invalid config: {exc!r}") from exc


def _parse(doc: dict, base_dir: Path) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}")
    circuit = _circuit(doc.get("circuit", "demo"))
    raw_mode = doc.get("mode", "recurrence")
    mode_doc = {"kind": raw_mode} if isinstance(raw_mode, str) else dict(raw_mode)
    mode = mode_doc.get("kind")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}")
    n_max = doc.get("n_max")
    if not isinstance(n_max, int) or n_max < 3:
        raise ConfigError("n_max must be an integer >= 3")
    shots = doc.get("shots", 0)
    if not isinstance(shots, int) or shots < 0:
        raise ConfigError("shots must be a non-negative integer")
    seed = doc.get("seed")
    if shots > 0 and not isinstance(seed, int):
        raise ConfigError("a seed is required when shots > 0")
    if seed is not None and not (isinstance(seed, int) and 0 <= seed < 2**64):
        raise ConfigError("seed must be a 64-bit unsigned integer")

    fit_doc = doc.get("fit") or {}
    window = fit_doc.get("window")
    if window is not None:
        if len(window) != 2 or window[0] < 1 or window[1] < window[0]:
            raise ConfigError("fit.window must be [n_lo, n_hi] with 1 <= n_lo <= n_hi")
        window = (int(window[0]), int(window[1]))
    units = fit_doc.get("residual_units", "absolute")
    if units not in RESIDUAL_UNITS:
        raise ConfigError(f"fit.residual_units must be one of {RESIDUAL_UNITS}")
    fit = FitConfig(window, float(fit_doc.get("alpha", DEFAULT_ALPHA)), units)

    outputs = []
    for out in doc.get("outputs", []):
        if out.get("format") not in OUTPUT_FORMATS:
            raise ConfigError(f"output format must be one of {OUTPUT_FORMATS}")
        if out["format"] == "record" and shots == 0:
            raise ConfigError("record export needs sampled data (shots > 0)")
        outputs.append(OutputSpec(out["format"], base_dir / os.fspath(out["path"])))

    initial = doc.get("initial_state", "0" * circuit.n_qubits)
    cfg = ExperimentConfig(
        circuit=circuit,
        mode=mode,
        noise=_noise(doc.get("noise"), circuit.n_qubits),
        n_max=n_max,
        shots=shots,
        seed=seed,
        initial_state=initial,
        state_a=mode_doc.get("a", initial) if mode == "cross_state" else None,
        state_b=mode_doc.get("b", "+" + "0" * (circuit.n_qubits - 1)) if mode == "cross_state" else None,
        subsystem_d=mode_doc.get("d"),
        subsystem_mode=mode_doc.get("emulation", "direct_mixed"),
        fit=fit,
        outputs=tuple(outputs),
        name=str(doc.get("name", "experiment")),
    )
    _check_states(cfg)
    return cfg


def _check_states(cfg: ExperimentConfig) -> None:
    dim2 = cfg.circuit.dim**2
    if cfg.mode == "cross_state":
        if cfg.state_a is None or cfg.state_b is None:
            raise ConfigError("cross_state mode needs states a and b")
        for s in (cfg.state_a, cfg.state_b):
            if state_vector(s).size != dim2:
                raise ConfigError(f"state {s!r} does not match the circuit size")
    elif cfg.mode == "subsystem":
        if cfg.subsystem_mode not in SUBSYSTEM_MODES:
            raise ConfigError(f"subsystem emulation must be one of {SUBSYSTEM_MODES}")
        probe = state_vector(cfg.initial_state)
        d = (int(round(np.sqrt(probe.size))).bit_length() - 1)
        if cfg.subsystem_d is not None and cfg.subsystem_d != d:
            raise ConfigError(f"mode.d = {cfg.subsystem_d} but the probe state has {d} qubits")
        if d > cfg.circuit.n_qubits:
            raise ConfigError("probe state is larger than the register")
    elif state_vector(cfg.initial_state).size != dim2:
        raise ConfigError("initial_state does not match the circuit size")


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return parse_config(doc, path.parent)
