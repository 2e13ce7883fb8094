"""Readers for the solver's on-disk interfaces.

Both formats are versioned; parsing is header-name driven, so column
reordering or extra columns in future CSV revisions cannot silently corrupt
a plot.
"""

from __future__ import annotations

import csv
import json
import os

import numpy as np

SNAPSHOT_MAGIC = "# nsstab-field v1"


class SchemaError(ValueError):
    """An input file does not match its documented schema."""


def read_timeseries(path, columns=("t", "E")):
    """Columns from a timeseries.csv, by header name.

    Returns a dict name -> float array (empty cells become NaN).
    """
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty time series")
        missing = [c for c in columns if c not in reader.fieldnames]
        if missing:
            raise SchemaError(
                f"{path}: missing column(s) {missing}; found {reader.fieldnames}"
            )
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: time series has a header but no rows")
    out = {}
    for c in columns:
        out[c] = np.array(
            [float(r[c]) if r[c] not in ("", None) else np.nan for r in rows]
        )
    return out


def read_manifest(path):
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def sibling_manifest(timeseries_path):
    """The manifest.json next to a timeseries.csv, if present."""
    path = os.path.join(os.path.dirname(os.path.abspath(timeseries_path)), "manifest.json")
    return read_manifest(path) if os.path.exists(path) else None


def read_snapshot(path):
    """A v1 field snapshot; returns (u, v, p arrays, meta dict)."""
    with open(path, "r", encoding="utf-8") as f:
        lines = [ln.rstrip("\n") for ln in f]
    if not lines or lines[0] != SNAPSHOT_MAGIC:
        raise SchemaError(f"{path}: not a {SNAPSHOT_MAGIC!r} file")
    head = lines[1].split()
    if len(head) != 11 or head[1::2] != ["nx", "ny", "hx", "hy", "t"]:
        raise SchemaError(f"{path}: malformed header {lines[1]!r}")
    meta = {
        "nx": int(head[2]),
        "ny": int(head[4]),
        "hx": float(head[6]),
        "hy": float(head[8]),
        "t": float(head[10]),
    }
    nx, ny = meta["nx"], meta["ny"]
    blocks = {}
    i = 2
    while i < len(lines) and len(blocks) < 3:
        label = lines[i]
        if label not in ("u", "v", "p") or label in blocks:
            raise SchemaError(f"{path}: unexpected block label {label!r} at line {i + 1}")
        rows = lines[i + 1 : i + 1 + nx]
        if len(rows) != nx:
            raise SchemaError(f"{path}: block {label!r} truncated")
        arr = np.array([[float(x) for x in row.split()] for row in rows])
        if arr.shape != (nx, ny):
            raise SchemaError(f"{path}: block {label!r} shape {arr.shape} != {(nx, ny)}")
        blocks[label] = arr
        i += 1 + nx
    missing = {"u", "v", "p"} - set(blocks)
    if missing:
        raise SchemaError(f"{path}: missing block(s) {sorted(missing)}")
    return blocks["u"], blocks["v"], blocks["p"], meta


def read_convergence(path):
    """Rows of a convergence.csv as dicts with floats where parseable."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty convergence table")
        for col in ("scheme", "tau", "u_linf"):
            if col not in reader.fieldnames:
                raise SchemaError(f"{path}: missing column {col!r}")
        rows = []
        for r in reader:
            row = dict(r)
            for key, val in r.items():
                if key == "scheme":
                    continue
                row[key] = float(val) if val not in ("", None) else np.nan
            rows.append(row)
    if not rows:
        raise SchemaError(f"{path}: convergence table has no rows")
    return rows
