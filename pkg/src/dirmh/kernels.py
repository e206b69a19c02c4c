"""Metropolis-Hastings kernels: DMH and its RWMH/MALA presets, plus the chain runner.

All three flavors share one code path. RWMH is DMH with ``h = 0, s = 1`` and
MALA is DMH with ``s = 1, t = h**2``. Each step draws ``d`` normals for the
proposal and then one uniform, in that order, so runs that reduce to the same
shape produce bitwise-identical trajectories.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .exceptions import InvalidStart
from .geometry import ProposalShape, proposal_log_density, sample_proposal
from .targets import NumericGradientTarget, TargetDensity


class Flavor(str, enum.Enum):
    DMH = "DMH"
    MALA = "MALA"
    RWMH = "RWMH"


@dataclass(frozen=True)
class KernelConfig:
    """Kernel flavor plus tuning triple.

    ``gradient_step`` switches to central-difference gradients with that step;
    ``None`` means the target's analytic gradient.
    """

    flavor: Flavor = Flavor.DMH
    shape: ProposalShape = field(default_factory=ProposalShape)
    gradient_step: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "flavor", Flavor(self.flavor))
        if self.gradient_step is not None and not self.gradient_step > 0:
            raise ValueError("gradient_step must be > 0")

    @classmethod
    def dmh(cls, h: float, s: float, t: float, gradient_step=None) -> "KernelConfig":
        return cls(Flavor.DMH, ProposalShape(h=h, s=s, t=t), gradient_step)

    @classmethod
    def mala(cls, h: float, gradient_step=None) -> "KernelConfig":
        return cls(Flavor.MALA, ProposalShape(h=h, s=1.0, t=h * h), gradient_step)

    @classmethod
    def rwmh(cls, t: float) -> "KernelConfig":
        return cls(Flavor.RWMH, ProposalShape(h=0.0, s=1.0, t=t))

    @property
    def effective_shape(self) -> ProposalShape:
        """The shape actually used, after the flavor preset is applied."""
        sh = self.shape
        if self.flavor is Flavor.RWMH:
            return ProposalShape(h=0.0, s=1.0, t=sh.t)
        if self.flavor is Flavor.MALA:
            return ProposalShape(h=sh.h, s=1.0, t=sh.h * sh.h)
        return sh

    def with_scale(self, t: float) -> "KernelConfig":
        """Same kernel with the global variance scale replaced (used by adaptation).

        The result is a DMH-flavored config so that ``t`` is not re-derived
        from a preset.
        """
        return KernelConfig(Flavor.DMH, replace(self.effective_shape, t=t), self.gradient_step)

    def to_dict(self) -> dict:
        sh = self.effective_shape
        out = {"flavor": self.flavor.value, "h": sh.h, "s": sh.s, "t": sh.t}
        if self.gradient_step is not None:
            out["gradient_step"] = self.gradient_step
        return out


@dataclass(frozen=True)
class StepResult:
    next: np.ndarray
    accepted: bool
    log_hastings_ratio: float


@dataclass(frozen=True)
class Chain:
    """Stored states (post burn-in, thinned) and raw per-step acceptance flags."""

    states: np.ndarray
    accepted: np.ndarray
    seed: int
    config: KernelConfig
    burn_in: int = 0
    thin: int = 1

    @property
    def acceptance_rate(self) -> float:
        return float(np.mean(self.accepted)) if self.accepted.size else 0.0

    @property
    def n(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]


def _needs_gradient(shape: ProposalShape) -> bool:
    return not (shape.h == 0.0 and shape.s == 1.0)


def _gradient_target(target: TargetDensity, config: KernelConfig) -> TargetDensity:
    if config.gradient_step is None:
        return target
    return NumericGradientTarget(target, config.gradient_step)


class _Point:
    """A state with its cached log density and gradient."""

    __slots__ = ("x", "log_f", "grad")

    def __init__(self, target, x, need_grad):
        self.x = x
        self.log_f = float(target.log_density(x))
        if need_grad and math.isfinite(self.log_f):
            self.grad = np.asarray(target.grad_log_density(x), dtype=float)
        else:
            self.grad = np.zeros_like(x)


def _log_ratio(cur: _Point, prop: _Point, shape: ProposalShape) -> float:
    if not math.isfinite(prop.log_f):
        return -math.inf
    if not np.all(np.isfinite(prop.grad)):
        return -math.inf
    # both sides grouped identically so that r(x, y) == -r(y, x) bitwise
    fwd = cur.log_f + proposal_log_density(cur.x, cur.grad, prop.x, shape)
    rev = prop.log_f + proposal_log_density(prop.x, prop.grad, cur.x, shape)
    return rev - fwd


def log_hastings_ratio(target: TargetDensity, x, y, config: KernelConfig) -> float:
    """``log f(y) q(y->x) - log f(x) q(x->y)``, each q with its own endpoint gradient."""
    shape = config.effective_shape
    need = _needs_gradient(shape)
    tgt = _gradient_target(target, config)
    cur = _Point(tgt, np.asarray(x, dtype=float), need)
    prop = _Point(tgt, np.asarray(y, dtype=float), need)
    return _log_ratio(cur, prop, shape)


def _step(rng, target, cur: _Point, shape: ProposalShape, need_grad: bool):
    y = sample_proposal(rng, cur.x, cur.grad, shape)
    u = rng.random()
    prop = _Point(target, y, need_grad)
    r = _log_ratio(cur, prop, shape)
    accepted = r >= 0.0 or (r > -math.inf and math.log(u) <= r)
    return (prop if accepted else cur), accepted, r


def mh_step(rng: np.random.Generator, target: TargetDensity, x, config: KernelConfig) -> StepResult:
    shape = config.effective_shape
    need = _needs_gradient(shape)
    tgt = _gradient_target(target, config)
    cur = _Point(tgt, np.asarray(x, dtype=float), need)
    nxt, accepted, r = _step(rng, tgt, cur, shape, need)
    return StepResult(nxt.x, accepted, r)


class ChainRunner:
    """Steps a single chain while keeping the current point's cached values.

    ``config`` may be swapped between steps (adaptation does this); the cached
    log density stays valid, and the gradient is recomputed if the new shape
    needs one the old shape did not.
    """

    def __init__(self, rng, target: TargetDensity, config: KernelConfig, x0):
        self.rng = rng
        self.target = _gradient_target(target, config)
        self.config = config
        self.shape = config.effective_shape
        self.need_grad = _needs_gradient(self.shape)
        x0 = np.array(x0, dtype=float)
        if x0.ndim != 1 or x0.shape[0] != target.dim:
            raise InvalidStart(f"x0 must have shape ({target.dim},), got {x0.shape}")
        if not np.all(np.isfinite(x0)):
            raise InvalidStart("x0 has non-finite entries")
        self.current = _Point(self.target, x0, self.need_grad)
        if not math.isfinite(self.current.log_f):
            raise InvalidStart("log density at x0 is not finite")

    def set_shape(self, shape: ProposalShape) -> None:
        need = _needs_gradient(shape)
        if need and not self.need_grad:
            self.current = _Point(self.target, self.current.x, True)
        self.shape = shape
        self.need_grad = need

    def step(self) -> bool:
        self.current, accepted, _ = _step(self.rng, self.target, self.current, self.shape, self.need_grad)
        return accepted


def _check_lengths(n_steps: int, burn_in: int, thin: int) -> None:
    if not n_steps > burn_in >= 0:
        raise ValueError("need n_steps > burn_in >= 0")
    if thin < 1:
        raise ValueError("thin must be >= 1")


def run_chain(rng_seed: int, target: TargetDensity, config: KernelConfig, x0, n_steps: int,
              burn_in: int = 0, thin: int = 1) -> Chain:
    """Run ``n_steps`` MH iterations from ``x0`` with ``numpy.random.default_rng(rng_seed)``.

    The stored states are ``X_1..X_n`` (the start is not stored) after dropping
    ``burn_in`` and keeping every ``thin``-th state; ``accepted`` covers all
    ``n_steps`` raw steps.
    """
    _check_lengths(n_steps, burn_in, thin)
    runner = ChainRunner(np.random.default_rng(rng_seed), target, config, x0)
    d = runner.current.x.shape[0]
    raw = np.empty((n_steps, d))
    accepted = np.empty(n_steps, dtype=bool)
    for i in range(n_steps):
        accepted[i] = runner.step()
        raw[i] = runner.current.x
    return Chain(raw[burn_in::thin].copy(), accepted, int(rng_seed), config, burn_in, thin)
