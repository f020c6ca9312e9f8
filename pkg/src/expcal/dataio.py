"""Logits CSV files and JSON reports.

Logits files have a header ``logit_0,...,logit_{K-1},label`` followed by one
row per sample: K decimal floats and a 0-based integer label. Floats are
written with 17 significant digits so that reading back is bit-exact.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from pathlib import Path

import numpy as np

from .metrics import LabeledLogits

SCHEMA_VERSION = "expcal.report/1"


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _parse_header(header: list[str]) -> int:
    if len(header) < 3 or header[-1].strip() != "label":
        raise ParseError("header must be 'logit_0,...,logit_{K-1},label' with K >= 2", 1)
    K = len(header) - 1
    for k, name in enumerate(header[:-1]):
        if name.strip() != f"logit_{k}":
            raise ParseError(f"expected column 'logit_{k}', got {name!r}", 1)
    return K


def read_logits_csv(path) -> LabeledLogits:
    """Parse a logits file; any malformed row raises :class:`ParseError` with its line number."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", 1) from None
        K = _parse_header(header)
        logits, labels = [], []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != K + 1:
                raise ParseError(f"expected {K + 1} fields, got {len(row)}", line)
            try:
                vals = [float(c) for c in row[:K]]
            except ValueError:
                raise ParseError(f"non-numeric logit in {row[:K]!r}", line) from None
            if not all(math.isfinite(v) for v in vals):
                raise ParseError("logits must be finite", line)
            try:
                lab = int(row[K].strip())
            except ValueError:
                raise ParseError(f"label {row[K]!r} is not an integer", line) from None
            if not 0 <= lab < K:
                raise ParseError(f"label {lab} outside [0, {K})", line)
            logits.append(vals)
            labels.append(lab)
    if not labels:
        raise ParseError("no data rows")
    return LabeledLogits(np.array(logits, dtype=float), np.array(labels, dtype=np.int64))


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def logits_to_csv_text(data: LabeledLogits) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"logit_{k}" for k in range(data.K)] + ["label"])
    for row, lab in zip(data.logits, data.labels):
        w.writerow([format_float(v) for v in row] + [int(lab)])
    return buf.getvalue()


def write_logits_csv(data: LabeledLogits, path) -> None:
    Path(path).write_text(logits_to_csv_text(data), encoding="utf-8")


def _jsonable(obj):
    if hasattr(obj, "to_dict"):
        return _jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def report_to_json(report, kind: str | None = None) -> str:
    """Serialize a report (object with ``to_dict`` or plain dict) with a schema tag."""
    payload = _jsonable(report)
    if not isinstance(payload, dict):
        raise TypeError("report must serialize to a JSON object")
    payload = {"schema": SCHEMA_VERSION, **({"kind": kind} if kind else {}), **payload}
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report_json(report, path, kind: str | None = None) -> None:
    text = report_to_json(report, kind)
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_rows_csv(rows, columns, path) -> None:
    """Write dict rows with the given column order; floats at 17 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in columns])


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    return v
