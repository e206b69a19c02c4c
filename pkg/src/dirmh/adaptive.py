"""Batchwise adaptation of the global proposal scale.

After every batch of ``batch_size`` steps, ``log_sigma`` moves up by
``delta(b)`` if the batch acceptance fraction reached the target rate and down
otherwise, then is clamped to ``[-M, M]``. The kernel runs with
``t = exp(2 * log_sigma)``; ``h`` and ``s`` stay fixed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .exceptions import InvalidBatchIndex
from .kernels import Chain, ChainRunner, KernelConfig, _check_lengths
from .targets import TargetDensity

MAX_DELTA = 0.01


def delta(b: int) -> float:
    """Step size for batch ``b``: ``min(0.01, b**-0.5)``."""
    if b < 1:
        raise InvalidBatchIndex(f"batch index must be >= 1, got {b}")
    return min(MAX_DELTA, b ** -0.5)


def scale_to_variance(log_sigma: float) -> float:
    return math.exp(2.0 * log_sigma)


@dataclass(frozen=True)
class AdaptState:
    log_sigma: float = 2.0
    M: float = 2.0
    target_rate: float = 0.45
    batch_size: int = 100
    b: int = 1

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError("M must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.b < 1:
            raise InvalidBatchIndex(f"batch index must be >= 1, got {self.b}")
        if not -self.M <= self.log_sigma <= self.M:
            raise ValueError(f"log_sigma={self.log_sigma} outside [-{self.M}, {self.M}]")


def update_scale(state: AdaptState, batch_acceptance: float,
                 delta_fn: Callable[[int], float] = delta) -> AdaptState:
    step = delta_fn(state.b)
    if batch_acceptance >= state.target_rate:
        new = state.log_sigma + step
    else:
        new = state.log_sigma - step
    new = min(state.M, max(-state.M, new))
    return replace(state, log_sigma=new, b=state.b + 1)


@dataclass(frozen=True)
class AdaptTrace:
    """Per-batch record; ``log_sigma[k]`` is the value in force during batch ``k + 1``."""

    batch_index: np.ndarray
    log_sigma: np.ndarray
    batch_acceptance: np.ndarray
    final_log_sigma: float

    def increments(self) -> np.ndarray:
        return np.diff(np.append(self.log_sigma, self.final_log_sigma))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["batch_index", "log_sigma", "batch_acceptance"])
            for b, ls, acc in zip(self.batch_index, self.log_sigma, self.batch_acceptance):
                w.writerow([int(b), repr(float(ls)), repr(float(acc))])


def run_adaptive_chain(rng_seed: int, target: TargetDensity, config: KernelConfig, adapt: AdaptState,
                       x0, n_steps: int, burn_in: int = 0, thin: int = 1,
                       delta_fn: Callable[[int], float] = delta) -> tuple[Chain, AdaptTrace]:
    """Run an MH chain whose scale ``t`` is adapted batch by batch.

    A trailing partial batch is run but triggers no update.
    """
    if n_steps < adapt.batch_size:
        raise ValueError("n_steps must be at least one batch")
    _check_lengths(n_steps, burn_in, thin)
    base = config.effective_shape
    cfg = config.with_scale(scale_to_variance(adapt.log_sigma))
    runner = ChainRunner(np.random.default_rng(rng_seed), target, cfg, x0)
    d = runner.current.x.shape[0]
    raw = np.empty((n_steps, d))
    accepted = np.empty(n_steps, dtype=bool)
    B = adapt.batch_size
    state = adapt
    trace_b, trace_ls, trace_acc = [], [], []
    for start in range(0, n_steps, B):
        stop = min(start + B, n_steps)
        for i in range(start, stop):
            accepted[i] = runner.step()
            raw[i] = runner.current.x
        if stop - start < B:
            break
        rate = float(np.mean(accepted[start:stop]))
        trace_b.append(state.b)
        trace_ls.append(state.log_sigma)
        trace_acc.append(rate)
        new_state = update_scale(state, rate, delta_fn)
        if new_state.log_sigma != state.log_sigma:
            runner.set_shape(replace(base, t=scale_to_variance(new_state.log_sigma)))
        state = new_state
    trace = AdaptTrace(np.array(trace_b, dtype=int), np.array(trace_ls), np.array(trace_acc), state.log_sigma)
    return Chain(raw[burn_in::thin].copy(), accepted, int(rng_seed), cfg, burn_in, thin), trace
