"""Input validation for the documented artifact schemas.

CSV files may start with '#' comment lines (the producing tool stamps a
config hash there); the first non-comment line is the header. Any missing
column or empty body is a SchemaError naming the problem.
"""

from __future__ import annotations

import csv
import json


class SchemaError(ValueError):
    pass


SUMMARY_COLUMNS = ["method", "scenario", "mean_return", "stderr", "mean_perf", "mean_cost"]
DENSITY_COLUMNS = ["t", "frac_sparse", "frac_mid", "frac_dense", "frac_very"]
GROUPED_COLUMNS = ["t", "group_vision", "mean_degree", "mean_betweenness"]
TRACE_KEYS = {"episode", "t", "agent_pos", "landmark_pos", "topology_bits"}


def read_csv(path: str, expected_columns: list[str]) -> list[dict]:
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    if not lines:
        raise SchemaError(f"{path}: empty file")
    reader = csv.DictReader(lines)
    header = reader.fieldnames or []
    for col in expected_columns:
        if col not in header:
            raise SchemaError(f"{path}: missing column {col!r} (header: {header})")
    extra = [c for c in header if c not in expected_columns]
    if extra:
        raise SchemaError(f"{path}: unexpected columns {extra}")
    rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def read_trace(path: str) -> list[dict]:
    records = []
    with open(path) as fh:
        for i, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{i + 1}: invalid JSON ({exc})")
            missing = TRACE_KEYS - set(rec)
            if missing:
                raise SchemaError(f"{path}:{i + 1}: missing keys {sorted(missing)}")
            records.append(rec)
    if not records:
        raise SchemaError(f"{path}: empty trace file")
    return records


def as_float(row: dict, key: str, path: str) -> float:
    try:
        return float(row[key])
    except (TypeError, ValueError):
        raise SchemaError(f"{path}: column {key!r} has non-numeric value {row[key]!r}")
