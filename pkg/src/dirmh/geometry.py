"""State-dependent proposal geometry for directional Metropolis-Hastings.

The proposal at ``x`` is Gaussian with mean ``x + h * grad`` and covariance

    Sigma(x) = t * (I + (s - 1) g g^T),   g = grad / ||grad||

so ``t`` is a global variance scale and ``s`` re-weights the variance along the
gradient direction only. Everything on the sampling path uses the rank-one
closed forms (O(d) per call); dense matrices appear only in
:func:`covariance_matrix` and the Gram-Schmidt oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .exceptions import DegenerateDirection, InvalidGradient, OracleFailure

GRAD_EPS = 1e-12
LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Direction:
    """Unit gradient direction; ``g`` is meaningless when ``degenerate``."""

    g: np.ndarray
    degenerate: bool = False

    @property
    def dim(self) -> int:
        return self.g.shape[0]


@dataclass(frozen=True)
class ProposalShape:
    """Tuning triple: drift step ``h``, directional weight ``s``, scale ``t``."""

    h: float = 0.0
    s: float = 1.0
    t: float = 1.0

    def __post_init__(self):
        for name in ("h", "s", "t"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.h < 0:
            raise ValueError("h must be >= 0")
        if self.s <= 0:
            raise ValueError("s must be > 0")
        if self.t <= 0:
            raise ValueError("t must be > 0")

    @property
    def isotropic(self) -> bool:
        return self.s == 1.0


def unit_gradient(grad) -> Direction:
    grad = np.asarray(grad, dtype=float)
    if not np.all(np.isfinite(grad)):
        raise InvalidGradient("gradient has non-finite entries")
    norm = math.sqrt(float(grad @ grad))
    if norm < GRAD_EPS:
        return Direction(np.zeros_like(grad), degenerate=True)
    return Direction(grad / norm, degenerate=False)


def covariance_matrix(direction: Direction, shape: ProposalShape) -> np.ndarray:
    """Dense ``t (I + (s-1) g g^T)``. Not used when sampling."""
    if direction.degenerate:
        raise DegenerateDirection("use t * I for a degenerate direction")
    g = direction.g
    cov = np.eye(g.shape[0]) + (shape.s - 1.0) * np.outer(g, g)
    return shape.t * cov


def _quad(v: np.ndarray, g: Optional[np.ndarray], s: float, t: float) -> float:
    # v^T Sigma^{-1} v with Sigma^{-1} = (1/t) [I + (1/s - 1) g g^T]
    q = float(v @ v)
    if g is not None and s != 1.0:
        gv = float(g @ v)
        q += (1.0 / s - 1.0) * gv * gv
    return q / t


def quadratic_form(v, direction: Direction, shape: ProposalShape) -> float:
    """Mahalanobis form ``v^T Sigma^{-1} v`` in O(d)."""
    v = np.asarray(v, dtype=float)
    if direction.degenerate:
        raise DegenerateDirection("quadratic form needs a proper direction")
    if not np.all(np.isfinite(v)):
        raise ValueError("v has non-finite entries")
    return _quad(v, direction.g, shape.s, shape.t)


def _direction_or_none(grad: np.ndarray) -> Optional[np.ndarray]:
    norm = math.sqrt(float(grad @ grad))
    if norm < GRAD_EPS:
        return None
    return grad / norm


def proposal_mean(x, grad, shape: ProposalShape) -> np.ndarray:
    if shape.h == 0.0:
        return np.array(x, dtype=float)
    return x + shape.h * grad


def sample_proposal(rng: np.random.Generator, x, grad, shape: ProposalShape) -> np.ndarray:
    """Draw ``y ~ N(x + h grad, Sigma(x))`` using exactly ``d`` standard normals.

    The draw is ``mu + sqrt(t) (z + (sqrt(s) - 1)(g.z) g)``; with ``s == 1`` or a
    degenerate gradient it is ``mu + sqrt(t) z``, bit for bit.
    """
    x = np.asarray(x, dtype=float)
    grad = np.asarray(grad, dtype=float)
    z = rng.standard_normal(x.shape[0])
    mu = proposal_mean(x, grad, shape)
    if shape.s != 1.0:
        g = _direction_or_none(grad)
        if g is not None:
            z = z + (math.sqrt(shape.s) - 1.0) * float(g @ z) * g
    return mu + math.sqrt(shape.t) * z


def proposal_log_density(x_from, grad_at_from, x_to, shape: ProposalShape) -> float:
    """Log density of moving ``x_from -> x_to`` under the local proposal at ``x_from``."""
    x_from = np.asarray(x_from, dtype=float)
    grad_at_from = np.asarray(grad_at_from, dtype=float)
    x_to = np.asarray(x_to, dtype=float)
    d = x_from.shape[0]
    g = _direction_or_none(grad_at_from) if shape.s != 1.0 else None
    log_det = d * math.log(shape.t)
    if g is not None:
        log_det += math.log(shape.s)
    diff = x_to - proposal_mean(x_from, grad_at_from, shape)
    return -0.5 * d * LOG_2PI - 0.5 * log_det - 0.5 * _quad(diff, g, shape.s, shape.t)


def basis_completion_oracle(direction: Direction, order: Optional[Sequence[int]] = None) -> np.ndarray:
    """Orthonormal basis ``G`` whose first column is ``g`` (test oracle).

    Completes ``g`` with standard basis vectors, skipping the one most parallel
    to ``g``, then runs Gram-Schmidt twice per vector. ``order`` permutes the
    candidate basis vectors so different completions can be compared.
    """
    if direction.degenerate:
        raise DegenerateDirection("cannot complete a degenerate direction")
    g = np.asarray(direction.g, dtype=float)
    d = g.shape[0]
    skip = int(np.argmax(np.abs(g)))
    candidates = [i for i in (range(d) if order is None else order) if i != skip]
    cols = [g / np.linalg.norm(g)]
    for i in candidates:
        v = np.zeros(d)
        v[i] = 1.0
        for _ in range(2):
            for c in cols:
                v = v - (c @ v) * c
        norm = np.linalg.norm(v)
        if norm < 1e-8:
            raise OracleFailure(f"basis vector e{i} is dependent on the partial basis")
        cols.append(v / norm)
    if len(cols) != d:
        raise OracleFailure("completion produced the wrong number of vectors")
    return np.column_stack(cols)
