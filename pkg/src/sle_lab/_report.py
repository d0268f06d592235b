"""Deterministic on-disk formats shared by the CLI and the demos.

All numbers are written at 12 significant digits so records produced by
repeated runs with the same seed are byte-identical; wall-clock facts
live in a separate sidecar file, never in the record itself.
"""

from __future__ import annotations

import csv
import json
import math
from typing import Sequence

import numpy as np

__all__ = [
    "fmt12",
    "canonical",
    "write_json",
    "read_json",
    "write_table",
    "read_table",
    "write_trace_csv",
    "read_trace_csv",
]


def fmt12(x) -> str:
    return "%.12g" % float(x)


def canonical(obj):
    """Round every float to 12 significant digits, recursively.

    Keeps ints and strings as they are; numpy scalars and arrays become
    plain Python so json can handle them.  Non-finite floats turn into
    strings, which keeps the record valid strict JSON.
    """
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [canonical(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return repr(x)
        return float(fmt12(x))
    return obj


def write_json(path, obj) -> None:
    with open(path, "w") as f:
        json.dump(canonical(obj), f, sort_keys=True, indent=2)
        f.write("\n")


def read_json(path):
    with open(path) as f:
        return json.load(f)


def write_table(path, header: Sequence[str], columns) -> None:
    """CSV with one %.12g-formatted column per header entry."""
    columns = [np.asarray(c) for c in columns]
    if len(columns) != len(header):
        raise ValueError("header and columns must align")
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([fmt12(v) for v in row])


def read_table(path):
    """(header, columns) round trip of write_table."""
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    header = rows[0]
    data = np.array([[float(v) for v in row] for row in rows[1:]])
    if data.size == 0:
        return header, [np.array([]) for _ in header]
    return header, [data[:, j] for j in range(len(header))]


def write_trace_csv(path, trace_obj) -> None:
    write_table(
        path, ["t", "re", "im"],
        [trace_obj.times, trace_obj.points.real, trace_obj.points.imag],
    )


def read_trace_csv(path):
    header, cols = read_table(path)
    if header != ["t", "re", "im"]:
        raise ValueError(f"unexpected trace header {header}")
    return cols[0], cols[1] + 1j * cols[2]
