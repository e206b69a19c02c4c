"""Static SVG figures: trace, ACF and adaptation scale.

Uses the object-oriented matplotlib API (no pyplot state) with a fixed hash
salt and no date stamp, so the same data renders to identical bytes.
"""

from __future__ import annotations

import numpy as np
import matplotlib

matplotlib.rcParams["svg.hashsalt"] = "dirmh"
from matplotlib.figure import Figure  # noqa: E402

from .diagnostics import IACT_CUTOFF, acf  # noqa: E402

MAX_TRACE_POINTS = 4000


def _save(fig: Figure, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})


def trace_svg(states, path, labels=None) -> None:
    states = np.atleast_2d(np.asarray(states, dtype=float))
    n, d = states.shape
    stride = max(1, -(-n // MAX_TRACE_POINTS))
    idx = np.arange(0, n, stride)
    fig = Figure(figsize=(7, 1.6 * d + 0.6))
    axes = fig.subplots(d, 1, sharex=True, squeeze=False)[:, 0]
    for j, ax in enumerate(axes):
        ax.plot(idx, states[idx, j], lw=0.6)
        ax.set_ylabel(labels[j] if labels else f"x{j + 1}")
    axes[-1].set_xlabel("iteration" if stride == 1 else f"iteration (every {stride}th)")
    fig.tight_layout()
    _save(fig, path)


def acf_svg(states, path, max_lag: int = 50) -> None:
    states = np.atleast_2d(np.asarray(states, dtype=float))
    n, d = states.shape
    fig = Figure(figsize=(7, 1.6 * d + 0.6))
    axes = fig.subplots(d, 1, sharex=True, squeeze=False)[:, 0]
    for j, ax in enumerate(axes):
        if np.ptp(states[:, j]) > 0:
            rho = acf(states[:, j], max_lag)
            ax.bar(np.arange(rho.shape[0]), rho, width=0.6)
        ax.axhline(IACT_CUTOFF, color="red", lw=0.8, ls="--")
        ax.set_ylabel(f"acf x{j + 1}")
    axes[-1].set_xlabel("lag")
    fig.tight_layout()
    _save(fig, path)


def sigma_svg(trace, path) -> None:
    fig = Figure(figsize=(7, 3))
    ax = fig.subplots()
    ax.plot(trace.batch_index, np.exp(trace.log_sigma), lw=0.8)
    ax.set_xlabel("batch")
    ax.set_ylabel("proposal sd (sigma)")
    ax.set_yscale("log")
    fig.tight_layout()
    _save(fig, path)
