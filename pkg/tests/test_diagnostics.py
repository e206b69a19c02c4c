import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.signal import lfilter

from dirmh.diagnostics import (
    acf,
    autocorrelation,
    batch_means_variance,
    diagnose,
    drift_ratio_estimate,
    ess_univariate,
    iact,
    iact_estimate,
    mess,
    move_rate,
    msjd,
)
from dirmh.exceptions import ConstantSeries, InsufficientData, SingularEstimate
from dirmh.kernels import KernelConfig
from dirmh.targets import FunctionTarget, gaussian_target


def ar1(rho, n, seed):
    """Stationary AR(1) with unit innovations (stationary variance 1/(1-rho^2))."""
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(n)
    e[0] /= math.sqrt(1 - rho**2)
    return lfilter([1.0], [1.0, -rho], e)


# ---------------------------------------------------------------- autocorrelation

def test_lag_zero_is_one():
    x = np.random.default_rng(0).standard_normal(100)
    assert autocorrelation(x, 0) == 1.0


def test_alternating_series():
    n = 1000
    x = np.tile([1.0, -1.0], n // 2)
    assert autocorrelation(x, 1) == pytest.approx(-(n - 1) / n, abs=1e-15)


def test_ar1_lag_one():
    assert 0.48 <= autocorrelation(ar1(0.5, 100_000, 1), 1) <= 0.52


def test_constant_series_raises():
    with pytest.raises(ConstantSeries):
        autocorrelation(np.ones(10), 1)
    with pytest.raises(ConstantSeries):
        iact(np.ones(20))


def test_fft_acf_matches_direct():
    x = ar1(0.7, 3000, 2)
    rho = acf(x, 40)
    direct = [autocorrelation(x, k) for k in range(41)]
    np.testing.assert_allclose(rho, direct, atol=1e-12)


# ---------------------------------------------------------------- IACT

def test_iact_white_noise():
    x = np.random.default_rng(3).standard_normal(100_000)
    assert 0.9 <= iact(x) <= 1.2


def test_iact_ar1():
    assert abs(iact(ar1(0.5, 100_000, 4)) - 3.0) <= 0.3


def test_iact_truncation_rule_by_hand():
    # acf 0.5, 0.25, 0.125, 0.0625, then < 0.05: sum stops at lag 4
    x = ar1(0.5, 400_000, 5)
    est = iact_estimate(x)
    assert est.lag == 4 and not est.truncated
    rho = acf(x, 5)
    assert est.value == pytest.approx(1 + 2 * rho[1:5].sum(), abs=1e-12)


def test_iact_flags_truncation(monkeypatch):
    # a centred sample acf sums to -1/2, so it cannot stay above 0.05 up to n/2;
    # lower the cutoff to exercise the cap
    import dirmh.diagnostics as diag

    monkeypatch.setattr(diag, "IACT_CUTOFF", -2.0)
    x = ar1(0.5, 1000, 0)
    est = iact_estimate(x)
    assert est.truncated and est.lag == 500
    assert est.value == pytest.approx(1 + 2 * acf(x, 500)[1:].sum(), abs=1e-12)


def test_iact_needs_ten_samples():
    with pytest.raises(InsufficientData):
        iact(np.arange(9.0))


# ---------------------------------------------------------------- batch means / ESS

def test_batch_means_iid():
    x = np.random.default_rng(6).standard_normal(100_000)
    assert 0.85 <= batch_means_variance(x, round(math.sqrt(x.size))) <= 1.15


def test_batch_means_constant_is_zero():
    assert batch_means_variance(np.full(100, 2.5), 10) == 0.0


def test_batch_means_ar1_asymptotic_variance():
    # lambda^2 * IACT = (4/3) * 3 = 4
    x = ar1(0.5, 1_000_000, 7)
    assert abs(batch_means_variance(x) / 4.0 - 1) < 0.15


def test_batch_means_needs_two_batches():
    with pytest.raises(InsufficientData):
        batch_means_variance(np.arange(15.0), 10)


def test_batch_means_by_hand():
    x = np.array([1.0, 3.0, 2.0, 6.0, 0.0, 0.0])
    # batch means 2, 4, 0 -> sample variance 4 -> times batch size 2
    assert batch_means_variance(x, 2) == pytest.approx(8.0)


def test_ess_iid():
    x = np.random.default_rng(8).standard_normal(100_000)
    assert 0.85 * x.size <= ess_univariate(x) <= 1.15 * x.size


def test_ess_ar1():
    x = ar1(0.5, 1_000_000, 9)
    assert abs(ess_univariate(x) / (x.size / 3) - 1) < 0.15


def test_ess_duplicated_samples():
    base = np.random.default_rng(10).standard_normal(50_000)
    x = np.repeat(base, 2)
    assert abs(ess_univariate(x) / (x.size / 2) - 1) < 0.2


@pytest.mark.parametrize("rho,seed", [(0.3, 1), (0.5, 2), (0.8, 3)])
def test_ess_iact_coupling(rho, seed):
    x = ar1(rho, 100_000, seed)
    assert abs(ess_univariate(x) * iact(x) / x.size - 1) < 0.35


# ---------------------------------------------------------------- mESS

def test_mess_iid():
    x = np.random.default_rng(11).standard_normal((100_000, 3))
    assert 0.8 * x.shape[0] <= mess(x) <= 1.2 * x.shape[0]


def test_mess_reduces_to_univariate():
    x = ar1(0.6, 20_000, 12)
    assert mess(x[:, None]) == pytest.approx(ess_univariate(x), rel=1e-9)
    assert mess(x[:, None], 50) == pytest.approx(ess_univariate(x, 50), rel=1e-9)


def test_mess_duplicated_rows():
    base = np.random.default_rng(13).standard_normal((50_000, 3))
    x = np.repeat(base, 2, axis=0)
    assert abs(mess(x) / (x.shape[0] / 2) - 1) < 0.25


def test_mess_permutation_invariant():
    rng = np.random.default_rng(14)
    x = np.column_stack([ar1(r, 20_000, s) for r, s in [(0.2, 1), (0.6, 2), (0.9, 3)]])
    x[:, 1] += 0.5 * x[:, 0]
    base = mess(x)
    for _ in range(5):
        assert mess(x[:, rng.permutation(3)]) == pytest.approx(base, rel=1e-10)


def test_mess_singular():
    x = np.random.default_rng(15).standard_normal((10_000, 2))
    x[:, 1] = x[:, 0]
    with pytest.raises(SingularEstimate):
        mess(x)


def test_mess_requires_enough_batches():
    with pytest.raises(InsufficientData):
        mess(np.random.default_rng(0).standard_normal((100, 6)), 10)


# ---------------------------------------------------------------- MSJD

def test_msjd_constant():
    assert msjd(np.ones((50, 3))) == 0.0


def test_msjd_alternating():
    assert msjd(np.tile([0.0, 1.0], 50)) == 1.0


def test_msjd_iid():
    x = np.random.default_rng(16).standard_normal((100_000, 3))
    assert abs(msjd(x) / 6.0 - 1) < 0.05


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.floats(-5, 5), st.floats(0.1, 10))
def test_msjd_translation_and_scale(seed, shift, c):
    x = np.random.default_rng(seed).standard_normal((200, 3))
    base = msjd(x)
    assert msjd(x + shift) == pytest.approx(base, rel=1e-9)
    assert msjd(c * x) == pytest.approx(c * c * base, rel=1e-12)


# ---------------------------------------------------------------- report

def test_diagnose_bundle():
    x = np.random.default_rng(17).standard_normal((10_000, 2))
    rep = diagnose(x, 0.5)
    assert rep.n == 10_000 and len(rep.iact) == 2 and len(rep.ess) == 2
    assert all(e <= 1.5 * rep.n for e in rep.ess)
    assert rep.msjd >= 0 and rep.mess is not None
    assert set(rep.to_dict()) == {"acceptance_rate", "iact", "ess", "mess", "msjd", "n"}


def test_diagnose_constant_chain_gives_nulls():
    rep = diagnose(np.zeros((500, 2)), 0.0)
    assert rep.mess is None and rep.iact == [None, None] and rep.msjd == 0.0
    assert '"mess": null' in rep.to_json()


def test_move_rate():
    x = np.array([[0.0], [0.0], [1.0], [1.0], [2.0]])
    assert move_rate(x) == 0.5


# ---------------------------------------------------------------- drift ratio

STD2 = gaussian_target(np.zeros(2), np.eye(2))


def test_drift_tiny_tau_is_one():
    est = drift_ratio_estimate(STD2, KernelConfig.dmh(0.5, 1.0, 0.25), [3.0, 0.0], 1e-8, 1000)
    assert 1 - 1e-6 <= est.mean <= 1 + 1e-6


def test_drift_contracts_when_reverse_move_is_reachable():
    # mean pulled to 0.9 x with small noise: inward moves are accepted
    est = drift_ratio_estimate(STD2, KernelConfig.dmh(0.1, 1.0, 0.25), [20.0, 0.0], 0.1, 2000)
    assert est.acceptance_rate > 0.9
    assert est.mean + 3 * est.stderr < 1.0


def test_drift_heavy_tail_random_walk_does_not_contract():
    cauchy = FunctionTarget(1, lambda x: -math.log1p(x[0] ** 2), lambda x: np.array([-2 * x[0] / (1 + x[0] ** 2)]))
    est = drift_ratio_estimate(cauchy, KernelConfig.rwmh(1.0), [50.0], 0.1, 5000)
    assert est.mean + 3 * est.stderr >= 1.0


def test_drift_is_deterministic():
    cfg = KernelConfig.dmh(0.1, 2.0, 0.5)
    a = drift_ratio_estimate(STD2, cfg, [5.0, 1.0], 0.2, 1000, seed=3)
    b = drift_ratio_estimate(STD2, cfg, [5.0, 1.0], 0.2, 1000, seed=3)
    assert a == b


def test_drift_validation():
    with pytest.raises(ValueError):
        drift_ratio_estimate(STD2, KernelConfig.rwmh(1.0), [0.0, 0.0], 0.0, 1000)
    with pytest.raises(ValueError):
        drift_ratio_estimate(STD2, KernelConfig.rwmh(1.0), [0.0, 0.0], 0.1, 10)
