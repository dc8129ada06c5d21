import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from ridgelab.ridge import (BandError, BandSpec, InsufficientDataError, RidgeTrack, deviation_metrics, dp_objective,
                            log_normalized, ridge_argmax, ridge_band_argmax, ridge_penalized_dp, ridge_points,
                            wilcoxon_signed_rank)
from ridgelab.transform import MissingChannelError, ScalogramField, TimeScaleGrid


def field(R, dS=None, d2S=None):
    p, n = R.shape
    g = TimeScaleGrid(0.0, 1.0, n, 1.0, 2.0 ** 0.25, p)
    return ScalogramField(g, np.asarray(R, dtype=float), dS, d2S)


def brute_force(Rt, lam):
    p, n = Rt.shape
    best, arg = -np.inf, None
    for path in itertools.product(range(p), repeat=n):
        v = dp_objective(Rt, path, lam)
        if v > best + 1e-12:
            best, arg = v, path
    return best, np.array(arg)


def test_dp_matches_exhaustive_search():
    rng = np.random.default_rng(7)
    for _ in range(50):
        p = int(rng.integers(2, 5))
        n = int(rng.integers(2, 12 // p + 1))
        R = rng.exponential(size=(p, n))
        lam = float(rng.choice([0.0, 0.05, 0.1, 1.0, 5.0]))
        tr = ridge_penalized_dp(R, lam)
        Rt = log_normalized(R)
        best, _ = brute_force(Rt, lam)
        assert dp_objective(Rt, tr.scale_index, lam) == pytest.approx(best, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_dp_lambda_zero_is_argmax(seed):
    R = np.random.default_rng(seed).exponential(size=(6, 9))
    np.testing.assert_array_equal(ridge_penalized_dp(R, 0.0).scale_index, np.argmax(R, axis=0))


def test_dp_large_lambda_is_flat():
    R = np.ones((5, 8))
    R[1, :4] = 3.0
    R[3, 4:] = 3.0
    tr = ridge_penalized_dp(R, 1e6)
    assert np.all(tr.scale_index == tr.scale_index[0])
    with pytest.raises(ValueError):
        ridge_penalized_dp(R, -1.0)


def test_argmax_ties_and_values():
    R = np.array([[1.0, 2.0, 0.5], [1.0, 1.0, 3.0]])
    tr = ridge_argmax(field(R))
    np.testing.assert_array_equal(tr.scale_index, [0, 0, 1])
    np.testing.assert_array_equal(tr.tie_count, [2, 1, 1])
    assert tr.scale_value[2] == pytest.approx(2.0 ** 0.25)


def test_band_argmax():
    R = np.zeros((8, 3))
    R[6] = 10.0
    R[2] = 5.0
    S = field(R)
    sc = S.grid.scales
    bands = BandSpec.constant([(sc[4], sc[7]), (sc[0], sc[3])])
    assert np.all(ridge_band_argmax(S, bands, 1).scale_index == 6)
    assert np.all(ridge_band_argmax(S, bands, 2).scale_index == 2)
    with pytest.raises(BandError):
        ridge_band_argmax(S, bands, 3)
    with pytest.raises(BandError):
        ridge_band_argmax(S, BandSpec.constant([(100.0, 200.0)]), 1)


def test_band_validation():
    t = np.linspace(0, 1, 5)
    with pytest.raises(BandError):
        BandSpec.constant([(2.0, 1.0)]).validate(t)
    with pytest.raises(BandError):
        BandSpec.constant([(2.0, 4.0), (1.0, 3.0)]).validate(t)
    BandSpec.constant([(4.0, 8.0), (1.0, 3.0)]).validate(t)


def test_ridge_points():
    s = np.arange(10.0)
    S = np.exp(-((s - 4.3) ** 2) / 2)[:, None] * np.ones((1, 3))
    dS = (-(s - 4.3) * np.exp(-((s - 4.3) ** 2) / 2))[:, None] * np.ones((1, 3))
    d2S = (((s - 4.3) ** 2 - 1) * np.exp(-((s - 4.3) ** 2) / 2))[:, None] * np.ones((1, 3))
    assert ridge_points(field(S, dS, d2S)) == [(0, 4), (1, 4), (2, 4)]
    with pytest.raises(MissingChannelError):
        ridge_points(field(S))
    # a minimum (dS from - to +) is not a ridge point
    assert ridge_points(field(S, -dS, -d2S)) == []


def test_log_normalized_sentinel():
    R = np.array([[0.0, 1.0], [3.0, 0.0]])
    Rt = log_normalized(R)
    assert Rt[0, 1] == pytest.approx(np.log(0.25))
    assert Rt[0, 0] < Rt[0, 1] and Rt[0, 0] <= np.log(np.finfo(float).eps)
    with pytest.raises(ValueError):
        log_normalized(np.zeros((2, 2)))
    tiny = np.array([[1e-300, 1.0]])
    t2 = log_normalized(tiny)
    assert t2[0, 0] > -np.inf


def test_wilcoxon_against_scipy(rng):
    for _ in range(20):
        n = int(rng.integers(12, 60))
        x, y = rng.normal(size=n) + 0.3, rng.normal(size=n)
        w, p = wilcoxon_signed_rank(x, y, "greater")
        ref = stats.wilcoxon(x, y, alternative="greater", method="approx", correction=True)
        d = x - y
        assert w == pytest.approx(stats.rankdata(np.abs(d))[d > 0].sum())
        assert p == pytest.approx(ref.pvalue, rel=1e-6)


def test_wilcoxon_statistic_vs_exact_enumeration():
    d = np.array([1.5, -0.5, 2.0, 3.0, -1.0, 0.7, 2.2, 4.0, -0.2, 1.1, 0.9])
    w, p = wilcoxon_signed_rank(d, np.zeros_like(d), "greater")
    r = stats.rankdata(np.abs(d))
    dist = [sum(r[i] for i in range(len(d)) if signs >> i & 1) for signs in range(2 ** len(d))]
    exact = np.mean(np.array(dist) >= w)
    assert abs(p - exact) < 0.01


def test_wilcoxon_edge_cases():
    with pytest.raises(InsufficientDataError):
        wilcoxon_signed_rank(np.arange(20.0), np.arange(20.0))
    with pytest.raises(InsufficientDataError):
        wilcoxon_signed_rank(np.ones(9), np.zeros(9))
    with pytest.raises(ValueError):
        wilcoxon_signed_rank(np.ones(12), np.zeros(12), "sideways")
    _, p = wilcoxon_signed_rank(np.ones(12), np.zeros(12), "two_sided")
    assert 0 < p < 0.01


def test_deviation_metrics():
    a = RidgeTrack(np.zeros(4, int), np.array([8.0, 8.0, 8.0, 8.0]), "argmax", np.ones(4, int))
    b = RidgeTrack(np.zeros(4, int), np.array([8.0, 10.0, 8.0, 4.0]), "argmax", np.ones(4, int))
    d, dt = deviation_metrics(a, b, 80.0)
    assert d == pytest.approx(1.5)
    assert dt == pytest.approx((2.0 + 10.0) / 4)
    assert deviation_metrics(a, b, 80.0, slice(0, 1)) == (0.0, 0.0)
    with pytest.raises(ValueError):
        deviation_metrics(a, b.scale_value[:3], 80.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), lam=st.floats(0.0, 10.0))
def test_dp_objective_dominates_argmax_path(seed, lam):
    R = np.random.default_rng(seed).exponential(size=(5, 7))
    Rt = log_normalized(R)
    dp = ridge_penalized_dp(R, lam).scale_index
    am = np.argmax(R, axis=0)
    assert dp_objective(Rt, dp, lam) >= dp_objective(Rt, am, lam) - 1e-10
