"""End-to-end runs: simulate or ingest, build the series, diagnose, emit files."""
from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import liouville as lv
from .circuits import cycle_unitary
from .config import ConfigError, ExperimentConfig, load_config, state_label, state_vector
from .diagnostics import INSUFFICIENT, Analysis, analyze_series
from .noise import NoiseSpecError
from .plots import emit_plot, overlay_svg, series_svg
from .poe import PoeRecord, RecordError, run_cross_state, run_recurrence, run_subsystem, sn_series
from .records import export_record, ingest
from .spectral import SpectralError, SpectralReport, spectral_report
from .writers import atomic_write_text, report_json, series_csv

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_INSUFFICIENT = 4
EXIT_IO = 5

INVARIANT_ERRORS = (RecordError, SpectralError, NoiseSpecError, lv.InvalidStateError)


@dataclass
class RunResult:
    record: PoeRecord
    analysis: Analysis
    spectral: Optional[SpectralReport] = None


def reference_state(cfg: ExperimentConfig) -> np.ndarray:
    """The density vector the spectral analysis is taken against."""
    if cfg.mode == "cross_state":
        return state_vector(cfg.state_a)
    probe = state_vector(cfg.initial_state)
    if cfg.mode == "subsystem":
        anc_dim = cfg.circuit.dim // int(round(np.sqrt(probe.size)))
        rho_p = lv.devectorize(probe)
        return lv.vectorize(np.kron(rho_p, np.eye(anc_dim) / anc_dim))
    return probe


def spectral_for(cfg: ExperimentConfig) -> SpectralReport:
    """Spectral report of the noiseless cycle seen from the configured state."""
    return spectral_report(lv.unitary_superop(cycle_unitary(cfg.circuit)), reference_state(cfg))


def simulate(cfg: ExperimentConfig) -> PoeRecord:
    if cfg.mode == "cross_state":
        meta = {"state_a": state_label(cfg.state_a), "state_b": state_label(cfg.state_b)}
        return run_cross_state(
            cfg.circuit, cfg.noise, state_vector(cfg.state_a), state_vector(cfg.state_b),
            cfg.n_max, cfg.shots, cfg.seed, metadata=meta,
        )
    meta = {"state": state_label(cfg.initial_state)}
    if cfg.mode == "subsystem":
        return run_subsystem(
            cfg.circuit, cfg.noise, state_vector(cfg.initial_state), cfg.n_max,
            cfg.shots, cfg.seed, mode=cfg.subsystem_mode, metadata=meta,
        )
    return run_recurrence(cfg.circuit, cfg.noise, state_vector(cfg.initial_state), cfg.n_max,
                          cfg.shots, cfg.seed, metadata=meta)


def analyze_record(
    record: PoeRecord,
    window: Optional[Sequence[int]] = None,
    alpha: float = 0.01,
    residual_units: str = "absolute",
    n_star: Optional[float] = None,
) -> Analysis:
    """The single diagnostics path for simulated and ingested records."""
    return analyze_series(sn_series(record), window, alpha, residual_units, n_star)


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    record = simulate(cfg)
    spectral = spectral_for(cfg) if cfg.shots == 0 else None
    n_star = spectral.n_star if spectral is not None and spectral.has_decay_mode else None
    analysis = analyze_record(record, cfg.fit.window, cfg.fit.alpha, cfg.fit.residual_units, n_star)
    return RunResult(record, analysis, spectral)


def render_outputs(result: RunResult, outputs, title: str = "") -> dict:
    """Text for every requested output, keyed by path; nothing touches disk here."""
    files = {}
    for out in outputs:
        if out.format == "csv":
            files[out.path] = series_csv(result.analysis)
        elif out.format == "json":
            files[out.path] = report_json(result.analysis, result.record, result.spectral)
        elif out.format == "svg":
            files[out.path] = series_svg(result.analysis, title)
        elif out.format == "record":
            files[out.path] = result.record
    return files


def write_outputs(files: dict) -> None:
    for path, content in files.items():
        if isinstance(content, PoeRecord):
            export_record(content, path)
        elif str(path).lower().endswith(".svg"):
            emit_plot(content, path)
        elif content is None:
            log.warning("nothing to write for %s", path)
        else:
            atomic_write_text(path, content)


def _status(result: RunResult) -> int:
    return EXIT_INSUFFICIENT if result.analysis.fit.verdict == INSUFFICIENT else EXIT_OK


def run_config(path) -> int:
    """``run <config>``: exit code per the EXIT_* constants."""
    code, _ = _run_config_path(path)
    return code


def _run_config_path(path):
    try:
        cfg = load_config(path)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG, None
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_IO, None
    try:
        result = run_experiment(cfg)
        files = render_outputs(result, cfg.outputs, cfg.name)
    except INVARIANT_ERRORS as exc:
        log.error("invariant violation: %s", exc)
        return EXIT_INVARIANT, None
    try:
        write_outputs(files)
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO, None
    log.info("%s: %s", cfg.name, result.analysis.verdict.status)
    return _status(result), (cfg.name, result.analysis)


def analyze_file(
    path,
    window: Optional[Sequence[int]] = None,
    alpha: float = 0.01,
    residual_units: str = "absolute",
    out_dir=None,
    stdout=None,
) -> int:
    """``analyze <record-file>``: diagnostics for an ingested record."""
    try:
        record = ingest(path)
    except OSError as exc:
        log.error("cannot read record: %s", exc)
        return EXIT_IO
    except RecordError as exc:
        log.error("%s", exc)
        return EXIT_INVARIANT
    result = RunResult(record, analyze_record(record, window, alpha, residual_units))
    if out_dir is None:
        if stdout is not None:
            stdout.write(report_json(result.analysis, record))
        return _status(result)
    out_dir = Path(out_dir)
    stem = Path(path).stem
    try:
        write_outputs({
            out_dir / f"{stem}_series.csv": series_csv(result.analysis),
            out_dir / f"{stem}_report.json": report_json(result.analysis, record),
            out_dir / f"{stem}_plot.svg": series_svg(result.analysis, stem),
        })
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO
    return _status(result)


def spectrum(path, stdout) -> int:
    """``spectrum <config>``: print the spectral report of the noiseless cycle."""
    try:
        cfg = load_config(path)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_IO
    try:
        report = spectral_for(cfg)
    except INVARIANT_ERRORS as exc:
        log.error("invariant violation: %s", exc)
        return EXIT_INVARIANT
    stdout.write(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def sweep(config_dir, out_dir=None, jobs: int = 1) -> int:
    """``sweep <config-dir>``: run every ``*.json`` config and overlay the residuals.

    Writes ``sweep_residuals.svg`` and ``sweep_summary.json`` into ``out_dir``
    (default ``<config-dir>/sweep_out``).  Returns the largest exit code seen.
    """
    config_dir = Path(config_dir)
    paths = sorted(config_dir.glob("*.json"))
    if not paths:
        log.error("no *.json configs in %s", config_dir)
        return EXIT_IO
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_config_path, paths))
    else:
        results = [_run_config_path(p) for p in paths]
    summary = {}
    overlay = []
    for path, (code, payload) in zip(paths, results):
        entry = {"exit_code": code}
        if payload is not None:
            name, analysis = payload
            entry.update(name=name, verdict=analysis.verdict.status,
                         max_abs_residual_ppt=analysis.fit.to_dict()["max_abs_residual_ppt"])
            overlay.append((name, analysis))
        summary[path.name] = entry
    out_dir = Path(out_dir) if out_dir is not None else config_dir / "sweep_out"
    try:
        atomic_write_text(out_dir / "sweep_summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
        emit_plot(overlay_svg(overlay, "fit residuals by configuration"), out_dir / "sweep_residuals.svg")
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO
    return max(code for code, _ in results)
