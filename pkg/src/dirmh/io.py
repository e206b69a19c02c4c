"""CSV/JSON serialization of chains and reports."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _fmt(v: float) -> str:
    return format(v, ".17g")


def emit_chain_csv(chain, path) -> None:
    """Write states with header ``x1..xd``; 17 significant digits round-trip exactly."""
    states = chain.states if hasattr(chain, "states") else np.asarray(chain, dtype=float)
    states = np.atleast_2d(states)
    if states.ndim != 2:
        raise ValueError("states must be n x d")
    d = states.shape[1]
    lines = [",".join(f"x{i + 1}" for i in range(d))]
    lines.extend(",".join(map(_fmt, row)) for row in states.tolist())
    Path(path).write_text("\n".join(lines) + "\n")


def read_chain_csv(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [[float(v) for v in line.split(",")] for line in fh if line.strip()]
    if not header or header != [f"x{i + 1}" for i in range(len(header))]:
        raise ValueError(f"{path}: header must be x1..xd")
    out = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return out
