"""CSV and summary-file output.

Floats are written with ``repr`` (shortest round-trip decimal), so reading a
file back reproduces the in-memory arrays bit for bit.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np


def _fmt(x) -> str:
    x = float(x)
    return "nan" if math.isnan(x) else repr(x)


def write_csv(curves: Mapping[str, Sequence[float]], path, times: Optional[Sequence[float]] = None) -> Path:
    """Write ``time_s`` followed by one column per curve, rows in time order."""
    path = Path(path)
    columns = {name: np.asarray(values, dtype=float) for name, values in curves.items()}
    times = np.asarray([] if times is None else times, dtype=float)
    for name, values in columns.items():
        if values.shape != times.shape:
            raise ValueError(f"column {name!r} has {values.size} rows, expected {times.size}")
    order = np.argsort(times, kind="stable")
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["time_s", *columns])
        for i in order:
            writer.writerow([_fmt(times[i]), *(_fmt(v[i]) for v in columns.values())])
    return path


def read_csv(path) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if not header or header[0] != "time_s":
        raise ValueError(f"{path}: first column must be time_s")
    data = np.array([[float(v) for v in row] for row in body], dtype=float).reshape(len(body), len(header))
    return data[:, 0].copy(), {name: data[:, k].copy() for k, name in enumerate(header[1:], start=1)}


def write_summary(values: Mapping[str, object], path) -> Path:
    """Flat ``key = value`` text file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for key, value in values.items():
        if isinstance(value, float):
            value = _fmt(value)
        lines.append(f"{key} = {value}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_summary(path) -> Dict[str, str]:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out
