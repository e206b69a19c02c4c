"""Chain-quality estimators: autocorrelation, IACT, batch-means ESS, mESS, MSJD,
and a Monte-Carlo probe of the one-step drift ratio ``PV(x) / V(x)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .exceptions import ConstantSeries, InsufficientData, SingularEstimate

IACT_CUTOFF = 0.05


def _as_series(series) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a 1-d series")
    return x


def _as_chain(chain) -> np.ndarray:
    x = np.asarray(chain, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError("expected an n x p chain")
    return x


def default_batch_size(n: int) -> int:
    return max(1, int(math.floor(math.sqrt(n))))


def autocorrelation(series, k: int) -> float:
    """Lag-``k`` sample autocorrelation with the biased ``1/n`` normalization."""
    x = _as_series(series)
    n = x.shape[0]
    if not 0 <= k < n:
        raise ValueError(f"lag must be in [0, {n})")
    c = x - x.mean()
    c0 = float(c @ c)
    if c0 == 0.0:
        raise ConstantSeries("autocorrelation of a constant series")
    return float(c[: n - k] @ c[k:]) / c0


def acf(series, max_lag: Optional[int] = None) -> np.ndarray:
    """Autocorrelations for lags ``0..max_lag`` via FFT (same normalization)."""
    x = _as_series(series)
    n = x.shape[0]
    max_lag = n - 1 if max_lag is None else min(max_lag, n - 1)
    c = x - x.mean()
    if not np.any(c):
        raise ConstantSeries("autocorrelation of a constant series")
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(c, size)
    r = np.fft.irfft(f * np.conj(f), size)[: max_lag + 1]
    return r / r[0]


@dataclass(frozen=True)
class IactEstimate:
    value: float
    lag: int
    truncated: bool


def iact_estimate(series) -> IactEstimate:
    """``1 + 2 * sum(acf[1..l])``, where lag ``l + 1`` is the first to fall below 0.05.

    If no lag up to ``n // 2`` falls below the cutoff, the sum stops at
    ``n // 2`` and ``truncated`` is set.
    """
    x = _as_series(series)
    n = x.shape[0]
    if n < 10:
        raise InsufficientData("IACT needs at least 10 samples")
    half = n // 2
    rho = acf(x, half)
    below = np.flatnonzero(rho[1:] < IACT_CUTOFF)
    if below.size:
        lag = int(below[0])  # rho[lag + 1] is the first value under the cutoff
        truncated = False
    else:
        lag = half
        truncated = True
    return IactEstimate(1.0 + 2.0 * float(np.sum(rho[1 : lag + 1])), lag, truncated)


def iact(series) -> float:
    return iact_estimate(series).value


def _batch_means(x: np.ndarray, batch_size: int) -> np.ndarray:
    n = x.shape[0]
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    if n < 2 * batch_size:
        raise InsufficientData(f"need at least two batches of {batch_size}, have n={n}")
    m = n // batch_size
    return x[: m * batch_size].reshape((m, batch_size) + x.shape[1:]).mean(axis=1)


def batch_means_variance(series, batch_size: Optional[int] = None) -> float:
    """Non-overlapping batch-means estimate of the asymptotic variance."""
    x = _as_series(series)
    b = default_batch_size(x.shape[0]) if batch_size is None else int(batch_size)
    means = _batch_means(x, b)
    return b * float(np.var(means, ddof=1))


def ess_univariate(series, batch_size: Optional[int] = None) -> float:
    """``n * sample_variance / batch_means_variance``."""
    x = _as_series(series)
    n = x.shape[0]
    sample_var = float(np.var(x, ddof=1)) if n > 1 else 0.0
    if sample_var == 0.0:
        raise ConstantSeries("ESS of a constant series")
    sigma2 = batch_means_variance(x, batch_size)
    if sigma2 == 0.0:
        raise SingularEstimate("batch-means variance is zero")
    return n * sample_var / sigma2


def mess(chain, batch_size: Optional[int] = None) -> float:
    """Multivariate ESS ``n * (det(sample cov) / det(batch-means cov)) ** (1/p)``."""
    x = _as_chain(chain)
    n, p = x.shape
    b = default_batch_size(n) if batch_size is None else int(batch_size)
    if n < 2 * b * p:
        raise InsufficientData(f"mESS needs n >= 2 * batch_size * p = {2 * b * p}, have n={n}")
    means = _batch_means(x, b)
    lam = np.atleast_2d(np.cov(x, rowvar=False))
    sig = b * np.atleast_2d(np.cov(means, rowvar=False))
    sign_l, logdet_l = np.linalg.slogdet(lam)
    if sign_l <= 0:
        raise SingularEstimate("sample covariance is singular")
    sign_s, logdet_s = np.linalg.slogdet(sig)
    if sign_s <= 0:
        raise SingularEstimate("batch-means covariance is singular")
    return n * math.exp((logdet_l - logdet_s) / p)


def msjd(chain) -> float:
    """Mean squared Euclidean distance between successive rows."""
    x = _as_chain(chain)
    if x.shape[0] < 2:
        raise InsufficientData("MSJD needs at least two states")
    jumps = np.diff(x, axis=0)
    return float(np.sum(jumps * jumps)) / (x.shape[0] - 1)


@dataclass(frozen=True)
class DiagnosticsReport:
    acceptance_rate: Optional[float]
    iact: list
    ess: list
    mess: Optional[float]
    msjd: float
    n: int

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"


def _or_none(fn, *args):
    try:
        return fn(*args)
    except (ConstantSeries, SingularEstimate, InsufficientData):
        return None


def move_rate(chain) -> float:
    """Fraction of successive rows that differ; the acceptance rate seen from states alone."""
    x = _as_chain(chain)
    if x.shape[0] < 2:
        return 0.0
    return float(np.mean(np.any(x[1:] != x[:-1], axis=1)))


def diagnose(states, acceptance_rate: Optional[float] = None,
             batch_size: Optional[int] = None) -> DiagnosticsReport:
    """Bundle every estimator; quantities that are undefined for the chain become ``None``."""
    x = _as_chain(states)
    n, p = x.shape
    return DiagnosticsReport(
        acceptance_rate=None if acceptance_rate is None else float(acceptance_rate),
        iact=[_or_none(iact, x[:, j]) for j in range(p)],
        ess=[_or_none(ess_univariate, x[:, j], batch_size) for j in range(p)],
        mess=_or_none(mess, x, batch_size),
        msjd=msjd(x),
        n=int(n),
    )


@dataclass(frozen=True)
class DriftEstimate:
    mean: float
    stderr: float
    n_mc: int
    acceptance_rate: float


def drift_ratio_estimate(target, config, x, tau: float, n_mc: int = 10_000, seed: int = 0) -> DriftEstimate:
    """Monte-Carlo ``E[exp(tau * (||X_1|| - ||x||)) | X_0 = x]`` over ``n_mc`` single MH steps.

    Each step uses its own generator spawned from ``seed``.
    """
    from .kernels import mh_step

    if not tau > 0:
        raise ValueError("tau must be > 0")
    if n_mc < 1000:
        raise ValueError("n_mc must be >= 1000")
    x = np.asarray(x, dtype=float)
    norm_x = float(np.linalg.norm(x))
    vals = np.empty(n_mc)
    n_acc = 0
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(n_mc)):
        res = mh_step(np.random.default_rng(child), target, x, config)
        n_acc += res.accepted
        vals[i] = math.exp(tau * (float(np.linalg.norm(res.next)) - norm_x))
    return DriftEstimate(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n_mc)), n_mc, n_acc / n_mc)
