"""Deterministic CSV/JSON emitters and atomic file writes."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Optional


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(x: Optional[float]) -> str:
    """17 significant digits; empty for missing or non-finite values."""
    if x is None or not math.isfinite(x):
        return ""
    return format(float(x), ".17g")


def series_csv(analysis) -> str:
    s = analysis.series
    resid = dict(zip((int(n) for n in analysis.fit.n_used), analysis.fit.residuals_ppt))
    name = "T_n" if s.kind == "T" else "S_n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(["n", name, f"ln_{name}", "variance", "residual_ppt"])
    for n, v, var in zip(s.n, s.values, s.variances):
        writer.writerow([int(n), fmt(v), fmt(math.log(v)) if v > 0 else "", fmt(var), fmt(resid.get(int(n)))])
    return buf.getvalue()


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def report_dict(analysis, record, spectral=None) -> dict:
    s = analysis.series
    doc = {
        "record": {
            "kind": record.kind,
            "n_max": record.n_max,
            "shots": record.shots,
            "scale": record.scale,
            "overlap": record.overlap,
        },
        "series": {
            "kind": s.kind,
            "n": [int(n) for n in s.n],
            "values": [float(v) for v in s.values],
            "variances": [float(v) for v in s.variances],
        },
        "fit": analysis.fit.to_dict(),
        "shape": {
            "monotonicity": [list(x) for x in analysis.shape.monotonicity],
            "curvature": [list(x) for x in analysis.shape.curvature],
        },
        "inequality_violations": None if analysis.inequality is None else [list(x) for x in analysis.inequality],
        "verdict": analysis.verdict.to_dict(),
    }
    if spectral is not None:
        doc["spectral"] = spectral.to_dict()
    return _clean(doc)


def report_json(analysis, record, spectral=None) -> str:
    return json.dumps(report_dict(analysis, record, spectral), indent=2, sort_keys=True) + "\n"
