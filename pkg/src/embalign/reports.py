"""Canonical report emission: deterministic JSON/CSV with atomic writes.

Floats are fixed at 9 significant digits so identical runs produce
byte-identical files regardless of worker parallelism.
"""

from __future__ import annotations

import hashlib
import json
import math
import os

from .errors import IoError

TOOL_VERSION = "0.1.0"


def _canon(value):
    if isinstance(value, float):
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return float(f"{value:.9g}")
    if isinstance(value, dict):
        return {str(k): _canon(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canon(v) for v in value]
    return value


def canonical_json(obj) -> str:
    """Serialize with sorted keys and 9-significant-digit floats."""
    return json.dumps(_canon(obj), sort_keys=True, indent=2) + "\n"


def _atomic_write_text(path: str, text: str) -> None:
    tmp = path + ".tmp"
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise IoError(str(exc)) from exc


def file_sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def provenance(config: dict, input_paths) -> dict:
    return {
        "tool_version": TOOL_VERSION,
        "input_hashes": {p: file_sha256(p) for p in input_paths},
        "config": _canon(config),
    }


def write_report(path: str, config: dict, protocol: str, body: dict, input_paths=()):
    """Emit the standard report envelope as canonical JSON."""
    doc = {
        "config": _canon(config),
        "protocol": protocol,
        **body,
        "provenance": provenance(config, input_paths),
    }
    _atomic_write_text(path, canonical_json(doc))


def write_csv(path: str, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join(f"{v:.9g}" if isinstance(v, float) else str(v) for v in row)
        )
    _atomic_write_text(path, "\n".join(lines) + "\n")


def cmc_csv_rows(summary: dict):
    """rank, accuracy_mean, accuracy_std rows from a retrieval summary."""
    mean = summary["cmc"]["mean"]
    std = summary["cmc"]["std"]
    return [(k + 1, float(m), float(s)) for k, (m, s) in enumerate(zip(mean, std))]


def roc_csv_rows(summary: dict):
    """fmr, tmr rows of the vertically averaged ROC."""
    grid = summary["roc_grid"]
    return [(float(f), float(t)) for f, t in zip(grid["fmr"], grid["tmr_mean"])]
