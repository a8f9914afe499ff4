"""Deterministic CSV/JSON artifact writers.

Reruns on unchanged inputs must produce byte-identical files, so floats are
written with repr (shortest round-trip form), JSON keys are sorted, and
timestamps are confined to the run manifest.
"""

from __future__ import annotations

import json
import math
from datetime import datetime, timezone
from pathlib import Path

SCHEMA_VERSION = 1


def fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        value = float(value)  # numpy scalars repr differently
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        if value == int(value) and abs(value) < 1e15:
            return str(int(value))
        return repr(value)
    return str(value)


def write_csv(path: str | Path, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_cell(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _sanitize(obj):
    """Replace non-finite floats with strings so the JSON stays parseable."""
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return obj
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def write_json(path: str | Path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"schema_version": SCHEMA_VERSION}
    doc.update(payload)
    path.write_text(
        json.dumps(_sanitize(doc), sort_keys=True, indent=2, allow_nan=False) + "\n",
        encoding="utf-8",
    )
    return path


def write_run_manifest(out_dir: str | Path, subcommand: str, config: dict) -> Path:
    """The one artifact allowed to carry a timestamp."""
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "subcommand": subcommand,
        "config": _sanitize(config),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    path = Path(out_dir) / "run_manifest.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(manifest, sort_keys=True, indent=2, default=str) + "\n", encoding="utf-8"
    )
    return path
