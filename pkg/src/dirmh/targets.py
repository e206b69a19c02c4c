"""Target log-densities with analytic gradients.

All targets are unnormalized and immutable after construction. The GLM
posterior samples the stacked state ``(beta_1, ..., beta_p, u)`` with an
identity link for every family.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .exceptions import InvalidCovariance

POISSON_ETA_MAX = 700.0


class TargetDensity:
    """Interface: ``dim``, ``log_density(x)`` and ``grad_log_density(x)``."""

    dim: int

    def log_density(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def grad_log_density(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class GaussianTarget(TargetDensity):
    def __init__(self, mean, cov):
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        cov = np.atleast_2d(np.asarray(cov, dtype=float))
        d = mean.shape[0]
        if cov.shape != (d, d):
            raise InvalidCovariance(f"covariance must be {d}x{d}, got {cov.shape}")
        if not np.allclose(cov, cov.T, rtol=0, atol=1e-12 * max(1.0, np.abs(cov).max())):
            raise InvalidCovariance("covariance is not symmetric")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as err:
            raise InvalidCovariance("covariance is not positive definite") from err
        self.dim = d
        self.mean = mean
        self.cov = cov
        eye = np.eye(d)
        # precision via the Cholesky factor keeps it symmetric
        linv = np.linalg.solve(chol, eye)
        self.precision = linv.T @ linv

    def log_density(self, x):
        r = np.asarray(x, dtype=float) - self.mean
        return -0.5 * float(r @ self.precision @ r)

    def grad_log_density(self, x):
        r = np.asarray(x, dtype=float) - self.mean
        return -(self.precision @ r)


def gaussian_target(mean, cov) -> GaussianTarget:
    return GaussianTarget(mean, cov)


class BananaTarget(TargetDensity):
    """Banana-shaped density: a Gaussian twisted along ``x2 = 100B - B x1^2``."""

    def __init__(self, B: float, d: int = 2):
        if not B > 0:
            raise ValueError("B must be > 0")
        if d < 2:
            raise ValueError("banana target needs d >= 2")
        self.B = float(B)
        self.dim = int(d)

    def _ridge(self, x):
        return x[1] + self.B * x[0] ** 2 - 100.0 * self.B

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        r = self._ridge(x)
        tail = float(x[2:] @ x[2:])
        return float(-x[0] ** 2 / 200.0 - 0.5 * r * r - 0.5 * tail)

    def grad_log_density(self, x):
        x = np.asarray(x, dtype=float)
        r = self._ridge(x)
        grad = -x.copy()
        grad[0] = -x[0] / 100.0 - 2.0 * self.B * x[0] * r
        grad[1] = -r
        return grad


def banana_target(B: float, d: int = 2) -> BananaTarget:
    return BananaTarget(B, d)


class Family(str, enum.Enum):
    NORMAL = "Normal"
    BERNOULLI = "Bernoulli"
    POISSON = "Poisson"

    @classmethod
    def parse(cls, name: str) -> "Family":
        for member in cls:
            if member.value.lower() == str(name).lower():
                return member
        raise ValueError(f"unknown family {name!r}")


@dataclass(frozen=True)
class GlmData:
    X: np.ndarray
    y: np.ndarray
    family: Family
    phi: np.ndarray = None
    v_beta: float = 100.0
    v_u: float = 100.0

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        family = Family.parse(self.family) if not isinstance(self.family, Family) else self.family
        n = X.shape[0]
        if y.shape[0] != n:
            raise ValueError(f"X has {n} rows but y has {y.shape[0]} entries")
        phi = np.ones(n) if self.phi is None else np.broadcast_to(np.asarray(self.phi, dtype=float), (n,)).copy()
        if np.any(phi <= 0):
            raise ValueError("dispersion a(phi) must be > 0")
        if not (self.v_beta > 0 and self.v_u > 0):
            raise ValueError("prior variances must be > 0")
        if family is Family.BERNOULLI and not np.all((y == 0) | (y == 1)):
            raise ValueError("Bernoulli responses must be 0 or 1")
        if family is Family.POISSON and not np.all((y >= 0) & (y == np.round(y))):
            raise ValueError("Poisson responses must be non-negative integers")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "phi", phi)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


def _psi(family: Family, eta: np.ndarray) -> np.ndarray:
    if family is Family.NORMAL:
        return 0.5 * eta * eta
    if family is Family.BERNOULLI:
        return np.maximum(eta, 0.0) + np.log1p(np.exp(-np.abs(eta)))
    return np.exp(eta)


def _psi_prime(family: Family, eta: np.ndarray) -> np.ndarray:
    if family is Family.NORMAL:
        return eta
    if family is Family.BERNOULLI:
        # logistic, evaluated without overflow on either side
        e = np.exp(-np.abs(eta))
        return np.where(eta >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return np.exp(eta)


class GlmPosterior(TargetDensity):
    """Log posterior of an identity-link exponential-family GLM with Gaussian priors.

    ``overflow_count`` counts Poisson linear predictors clamped at 700 before
    exponentiation.
    """

    def __init__(self, data: GlmData):
        self.data = data
        self.dim = data.p + 1
        self._w = 1.0 / data.phi
        self.overflow_count = 0

    def _eta(self, theta):
        theta = np.asarray(theta, dtype=float)
        eta = self.data.X @ theta[:-1] + theta[-1]
        if self.data.family is Family.POISSON:
            over = eta > POISSON_ETA_MAX
            if over.any():
                self.overflow_count += int(over.sum())
                eta = np.minimum(eta, POISSON_ETA_MAX)
        return theta, eta

    def log_density(self, theta):
        theta, eta = self._eta(theta)
        d = self.data
        loglik = float(self._w @ (d.y * eta - _psi(d.family, eta)))
        beta, u = theta[:-1], theta[-1]
        return loglik - float(beta @ beta) / (2.0 * d.v_beta) - u * u / (2.0 * d.v_u)

    def grad_log_density(self, theta):
        theta, eta = self._eta(theta)
        d = self.data
        resid = self._w * (d.y - _psi_prime(d.family, eta))
        grad = np.empty(self.dim)
        grad[:-1] = d.X.T @ resid - theta[:-1] / d.v_beta
        grad[-1] = resid.sum() - theta[-1] / d.v_u
        return grad


def glm_log_posterior(data: GlmData, beta, u: float) -> float:
    return GlmPosterior(data).log_density(np.append(np.asarray(beta, dtype=float), u))


def glm_grad_log_posterior(data: GlmData, beta, u: float) -> np.ndarray:
    return GlmPosterior(data).grad_log_density(np.append(np.asarray(beta, dtype=float), u))


def simulate_glm_data(
    rng: np.random.Generator,
    family: Family | str = Family.NORMAL,
    n: int = 100,
    p: int = 5,
    v_beta: float = 100.0,
    v_u: float = 100.0,
    coef_bound: float = 1.0,
) -> GlmData:
    """Simulated regression data: N(0,1) predictors, Uniform(-bound, bound) coefficients.

    Normal responses get standard normal noise; Bernoulli and Poisson responses
    are drawn from the family with the identity-link natural parameter. The
    intercept is zero.
    """
    family = Family.parse(family) if not isinstance(family, Family) else family
    X = rng.standard_normal((n, p))
    beta = rng.uniform(-coef_bound, coef_bound, size=p)
    eta = X @ beta
    if family is Family.NORMAL:
        y = eta + rng.standard_normal(n)
    elif family is Family.BERNOULLI:
        y = (rng.random(n) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
    else:
        y = rng.poisson(np.exp(eta)).astype(float)
    return GlmData(X=X, y=y, family=family, v_beta=v_beta, v_u=v_u)


def load_glm_csv(path, family, phi=None, v_beta: float = 100.0, v_u: float = 100.0) -> GlmData:
    """Read ``y, x1..xp`` columns (header row required) into :class:`GlmData`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        rows = [[float(v) for v in row] for row in reader if row]
    if "y" not in header:
        raise ValueError(f"{path}: no 'y' column")
    xcols = sorted((h for h in header if h.startswith("x") and h[1:].isdigit()), key=lambda h: int(h[1:]))
    expected = [f"x{i}" for i in range(1, len(xcols) + 1)]
    if not xcols or xcols != expected:
        raise ValueError(f"{path}: predictor columns must be x1..xp")
    table = np.array(rows, dtype=float)
    y = table[:, header.index("y")]
    X = table[:, [header.index(c) for c in xcols]]
    return GlmData(X=X, y=y, family=family, phi=phi, v_beta=v_beta, v_u=v_u)


def write_glm_csv(data: GlmData, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["y"] + [f"x{i + 1}" for i in range(data.p)])
        for yi, xi in zip(data.y, data.X):
            w.writerow([repr(float(yi))] + [repr(float(v)) for v in xi])


def numeric_gradient(target, x, step: float = 1e-5) -> np.ndarray:
    """Central differences of ``target.log_density`` (or a plain callable)."""
    if not step > 0:
        raise ValueError("step must be > 0")
    f = target.log_density if hasattr(target, "log_density") else target
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = step
        grad[i] = (f(x + e) - f(x - e)) / (2.0 * step)
    return grad


class NumericGradientTarget(TargetDensity):
    """Wraps a target so that its gradient comes from central differences."""

    def __init__(self, base: TargetDensity, step: float = 1e-5):
        self.base = base
        self.step = step
        self.dim = base.dim

    def log_density(self, x):
        return self.base.log_density(x)

    def grad_log_density(self, x):
        return numeric_gradient(self.base, x, self.step)


class FunctionTarget(TargetDensity):
    """Adapter for user-supplied callables; gradient falls back to central differences."""

    def __init__(self, dim: int, log_density: Callable, grad_log_density: Optional[Callable] = None,
                 step: float = 1e-5):
        self.dim = dim
        self._f = log_density
        self._grad = grad_log_density
        self.step = step

    def log_density(self, x):
        return float(self._f(np.asarray(x, dtype=float)))

    def grad_log_density(self, x):
        if self._grad is None:
            return numeric_gradient(self._f, x, self.step)
        return np.asarray(self._grad(np.asarray(x, dtype=float)), dtype=float)
