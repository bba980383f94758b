"""Deterministic JSON/CSV writers.

Data files never contain timings or timestamps; those go to a
``<out>.meta.json`` sidecar so two runs of the same config produce
byte-identical reports.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def fmt_real(x) -> str:
    """17 significant digits, ``.`` decimal, no grouping."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _plain(obj):
    # numpy scalars/arrays -> builtins, non-finite floats -> strings (strict JSON)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else fmt_real(x)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def to_json(payload: dict) -> str:
    return json.dumps(_plain(payload), indent=2, sort_keys=True) + "\n"


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_real(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def emit(text: str, out: str | Path | None) -> None:
    """Write ``text`` to ``out``, or to stdout when ``out`` is None or ``-``."""
    if out is None or str(out) == "-":
        sys.stdout.write(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def write_meta(out: str | Path | None, meta: dict) -> Path | None:
    """Sidecar with non-deterministic run facts (timings, versions)."""
    if out is None or str(out) == "-":
        return None
    path = Path(str(out) + ".meta.json")
    path.write_text(to_json(meta), encoding="utf-8")
    return path


# -- payload builders -----------------------------------------------------------

def solution_rows(grid) -> list[tuple]:
    levels = grid.level_grid.levels
    nx, ny = grid.shape
    return [(i, j, float(grid.nodes_x[i]), float(grid.nodes_y[j]), float(r),
             float(grid.lo[i, j, k]), float(grid.hi[i, j, k]))
            for i in range(nx) for j in range(ny) for k, r in enumerate(levels)]


SOLUTION_HEADER = ("i", "j", "x", "y", "level", "lo", "hi")
CONVERGENCE_HEADER = ("N", "error", "iterations", "runtime_ms", "status")
TRACE_HEADER = ("n", "D_measured", "bound_value", "margin")
RULE_HEADER = ("i", "chebyshev_x", "gl_node", "gl_weight")


def convergence_rows(rows) -> list[tuple]:
    # runtime column kept for shape; the value lives in the meta sidecar
    return [(r.N, float(r.error), r.iterations, "", r.status) for r in rows]


def rule_payload(n: int) -> dict:
    from .quadrature import chebyshev_nodes, gauss_legendre
    rule = gauss_legendre(n)
    return {"order": n,
            "chebyshev_x": chebyshev_nodes(n).points.tolist(),
            "gl_nodes": rule.nodes.tolist(),
            "gl_weights": rule.weights.tolist(),
            "weight_sum": math.fsum(rule.weights)}


def rule_rows(n: int) -> list[tuple]:
    p = rule_payload(n)
    return [(i, p["chebyshev_x"][i], p["gl_nodes"][i], p["gl_weights"][i])
            for i in range(n + 1)]
