"""Measurement-record files: export of sampled runs and ingestion of device data.

CSV layout (``#`` lines form the header, then one row per family and cycle)::

    # poeprobe-record 1
    # mode=cross_state
    # n_max=35
    # shots=1000
    # overlap=0.5
    # state_a=00
    # state_b=+0
    family,k,success_count,total_shots
    forward,0,500,1000
    ...

The JSON layout carries the same content as
``{"format": "poeprobe-record", "version": 1, "header": {...},
"families": {name: {"success_count": [...], "total_shots": [...]}}}``.

Recognised header keys: ``mode`` (recurrence, cross_state, subsystem),
``n_max``, ``shots``, ``scale`` (subsystem prefactor, default 1),
``overlap`` (cross-state ``<b|a>``, optional) and free-form state labels.
Cross-state files must provide the families ``forward`` (start in a, score
against b) and ``reverse``.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .poe import RECORD_KINDS, PoeRecord, RecordError, record_from_families
from .writers import atomic_write_text

FORMAT_TAG = "poeprobe-record"
VERSION = 1
_NUMERIC_KEYS = {"n_max": int, "shots": int, "scale": float, "overlap": float}


def _header(rec: PoeRecord) -> dict:
    head = {"mode": rec.kind, "n_max": rec.n_max, "shots": rec.shots}
    if rec.scale != 1.0:
        head["scale"] = rec.scale
    if rec.overlap is not None:
        head["overlap"] = rec.overlap
    for key, val in sorted(rec.metadata.items()):
        if key.startswith("state") or key == "subsystem_mode":
            head[key] = val
    return head


def _ordered_families(rec: PoeRecord) -> list[str]:
    if rec.kind == "cross_state":
        return ["forward", "reverse"]
    return list(rec.counts)


def export_record(rec: PoeRecord, path) -> None:
    """Write the counts of a sampled record to ``path`` (.csv or .json)."""
    if not rec.counts:
        raise RecordError("only sampled records (with counts) can be exported")
    path = Path(path)
    head = _header(rec)
    names = _ordered_families(rec)
    if path.suffix.lower() == ".json":
        doc = {
            "format": FORMAT_TAG,
            "version": VERSION,
            "header": head,
            "families": {
                f: {
                    "success_count": [int(c) for c in rec.counts[f]],
                    "total_shots": [rec.shots] * (rec.n_max + 1),
                }
                for f in names
            },
        }
        atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return
    buf = io.StringIO()
    buf.write(f"# {FORMAT_TAG} {VERSION}\n")
    for key, val in head.items():
        buf.write(f"# {key}={val!r}\n" if isinstance(val, float) else f"# {key}={val}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["family", "k", "success_count", "total_shots"])
    for f in names:
        for k, c in enumerate(rec.counts[f]):
            writer.writerow([f, k, int(c), rec.shots])
    atomic_write_text(path, buf.getvalue())


def _coerce_header(raw: dict) -> dict:
    head = dict(raw)
    for key, typ in _NUMERIC_KEYS.items():
        if key in head and head[key] is not None:
            head[key] = typ(head[key])
    return head


def _read_csv(text: str):
    head = {}
    rows = []
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            content = line[1:].strip()
            if "=" in content:
                key, _, val = content.partition("=")
                head[key.strip()] = val.strip()
        elif line.strip():
            body.append(line)
    reader = csv.DictReader(body)
    needed = {"family", "k", "success_count", "total_shots"}
    if reader.fieldnames is None or not needed <= set(reader.fieldnames):
        raise RecordError(f"record CSV needs columns {sorted(needed)}")
    for row in reader:
        rows.append((row["family"], int(row["k"]), int(row["success_count"]), int(row["total_shots"])))
    return head, rows


def _read_json(text: str):
    doc = json.loads(text)
    if doc.get("format") != FORMAT_TAG:
        raise RecordError("not a poeprobe record document")
    rows = []
    for f, fam in doc["families"].items():
        for k, (c, t) in enumerate(zip(fam["success_count"], fam["total_shots"])):
            rows.append((f, k, int(c), int(t)))
    return doc.get("header", {}), rows


def ingest(path) -> PoeRecord:
    """Read a measurement-record file into a :class:`PoeRecord`.

    Counts become probabilities with binomial variance estimates, assembled
    by the same code path as simulated records.
    """
    path = Path(path)
    text = path.read_text()
    try:
        raw_head, rows = _read_json(text) if path.suffix.lower() == ".json" else _read_csv(text)
        head = _coerce_header(raw_head)
    except (ValueError, KeyError, TypeError) as exc:
        raise RecordError(f"{path}: malformed record file ({exc})") from exc
    mode = head.get("mode")
    if mode not in RECORD_KINDS:
        raise RecordError(f"{path}: header mode must be one of {RECORD_KINDS}")
    by_family: dict[str, list] = {}
    for f, k, c, t in rows:
        by_family.setdefault(f, []).append((k, c, t))
    if not by_family:
        raise RecordError(f"{path}: no data rows")
    if mode == "cross_state":
        if set(by_family) != {"forward", "reverse"}:
            raise RecordError(f"{path}: cross-state records need families 'forward' and 'reverse'")
        by_family = {f: by_family[f] for f in ("forward", "reverse")}
    counts, totals = {}, {}
    for f, entries in by_family.items():
        entries.sort()
        ks = [e[0] for e in entries]
        if ks != list(range(len(ks))):
            raise RecordError(f"{path}: family {f!r} has cycle counts that are not contiguous from 0")
        c = np.array([e[1] for e in entries])
        t = np.array([e[2] for e in entries])
        if np.any(c > t) or np.any(c < 0):
            raise RecordError(f"{path}: family {f!r} has success counts outside [0, total_shots]")
        counts[f], totals[f] = c, t
    n_max = head.get("n_max", len(ks) - 1)
    if any(len(c) != n_max + 1 for c in counts.values()):
        raise RecordError(f"{path}: header n_max={n_max} does not match the data rows")
    shots = int(head.get("shots") or max(int(t.max()) for t in totals.values()))
    meta = {k: v for k, v in head.items() if k not in ("mode", "n_max", "shots", "scale", "overlap")}
    return record_from_families(
        mode,
        counts,
        shots=shots,
        scale=float(head.get("scale", 1.0)),
        overlap=head.get("overlap"),
        metadata=meta,
        totals=totals,
    )
