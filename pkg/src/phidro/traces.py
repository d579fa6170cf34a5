"""Trace file round-tripping: per-run CSVs, JSON sidecars, seed aggregates.

Floats are written with ``repr`` so a parsed trace reproduces the
in-memory rows bit for bit.  Every trace CSV gets a JSON sidecar
carrying the resolved configuration, the event log, and a SHA-256 of
the CSV bytes so a plot can always be traced back to its inputs.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .optimizer import RunTrace, TraceRow

__all__ = [
    "TRACE_HEADER",
    "write_trace",
    "read_trace",
    "sidecar_path",
    "read_sidecar",
    "aggregate_rows",
    "write_aggregate",
    "read_aggregate",
]

TRACE_HEADER = (
    "t",
    "M",
    "w",
    "W",
    "wall_ms",
    "robust_train",
    "erm_train",
    "test_err",
    "alpha",
    "lambda",
    "grad_norm",
)

# TraceRow attribute behind each header column
_FIELDS = (
    "t",
    "m",
    "w",
    "w_total",
    "wall_ms",
    "robust_train",
    "erm_train",
    "test_err",
    "alpha",
    "lam",
    "grad_norm",
)

_AGGREGATE_HEADER = ("method", "t", "n_seeds") + TRACE_HEADER[1:]


def sidecar_path(trace_path) -> Path:
    path = Path(trace_path)
    return path.with_suffix(path.suffix + ".meta.json")


def write_trace(path, trace: RunTrace, resolved_config: dict | None = None) -> Path:
    """Write one run's rows as CSV plus a JSON sidecar; returns the CSV path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(TRACE_HEADER)
        for row in trace.rows:
            writer.writerow(
                [repr(getattr(row, name)) for name in _FIELDS]
            )
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    sidecar = {
        "trace": path.name,
        "sha256": digest,
        "rows": len(trace.rows),
        "error": trace.error,
        "events": trace.events,
        "config": {} if resolved_config is None else resolved_config,
    }
    sidecar_path(path).write_text(json.dumps(sidecar, indent=2, sort_keys=True))
    return path


def read_trace(path) -> list:
    """Parse a trace CSV back into TraceRow records (exact round trip)."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = tuple(next(reader))
        if header != TRACE_HEADER:
            raise ValueError(f"{path}: unexpected trace header {header}")
        rows = []
        for record in reader:
            values = dict(zip(_FIELDS, record))
            rows.append(
                TraceRow(
                    t=int(values["t"]),
                    m=int(values["m"]),
                    **{
                        name: float(values[name])
                        for name in _FIELDS[2:]
                    },
                )
            )
    return rows


def read_sidecar(trace_path) -> dict:
    return json.loads(sidecar_path(trace_path).read_text())


def aggregate_rows(per_seed: list) -> list:
    """Per-iteration arithmetic means across seed traces.

    Rows are grouped by their ``t`` value; each group's columns are
    averaged with ``np.mean`` over the seeds that reached that t.
    Returns tuples (t, n_seeds, mean of every non-t column).
    """
    by_t: dict = {}
    for rows in per_seed:
        for row in rows:
            by_t.setdefault(row.t, []).append(row)
    out = []
    for t in sorted(by_t):
        group = by_t[t]
        means = [
            float(np.mean([getattr(row, name) for row in group]))
            for name in _FIELDS[1:]
        ]
        out.append((t, len(group), *means))
    return out


def write_aggregate(path, traces_by_method: dict) -> Path:
    """Write one aggregate CSV covering all methods.

    ``traces_by_method`` maps a method name to that method's per-seed
    row lists.  Columns: method, t, n_seeds, then the per-iteration
    means of every trace column.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(_AGGREGATE_HEADER)
        for method in traces_by_method:
            for t, n_seeds, *means in aggregate_rows(traces_by_method[method]):
                writer.writerow([method, repr(t), repr(n_seeds)] + [repr(v) for v in means])
    return path


def read_aggregate(path) -> list:
    """Aggregate CSV rows as dicts keyed by column name."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = tuple(next(reader))
        if header != _AGGREGATE_HEADER:
            raise ValueError(f"{path}: unexpected aggregate header {header}")
        out = []
        for record in reader:
            entry = {"method": record[0], "t": int(record[1]), "n_seeds": int(record[2])}
            for name, value in zip(_AGGREGATE_HEADER[3:], record[3:]):
                entry[name] = float(value)
            out.append(entry)
    return out
