import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special, stats

from ridgelab.noise import (CellGrid, awt_column, awt_columns, cell_normals, covariance_at, cross_moment, density_from_dict,
                            density_grid, density_to_dict, estimate_c1, increment_distance, linnik,
                            linnik_pdf_exact, mean_abs_W, spectral_moment, synthesize_path, tabulated,
                            trial_seed)


def direct_linnik_pdf(gamma, H, lam):
    """p(lam) = (1/pi) int_0^inf cos(lam t) (1 + t^g)^(-H/g) dt by oscillatory quadrature."""
    f = lambda t: (1 + t**gamma) ** (-H / gamma)
    a, _ = integrate.quad(f, 0, 1, weight="cos", wvar=lam, limit=200)
    b, _ = integrate.quad(f, 1, np.inf, weight="cos", wvar=lam, limlst=200)
    return (a + b) / np.pi


# -- covariance ---------------------------------------------------------------

@pytest.mark.parametrize("g,H,t,expected", [(1, 1, 0, 1.0), (1, 1, 1, 0.5), (2, 2, 3, 0.1)])
def test_linnik_covariance_examples(g, H, t, expected):
    assert covariance_at(linnik(g, H), t) == pytest.approx(expected, rel=1e-14)


def test_tabulated_covariance_at_zero_is_variance():
    d = tabulated([0.0, 1.0, 2.0], [1.0, 1.0, 0.5])
    assert covariance_at(d, 0.0) == pytest.approx(d.variance)
    # constant p on [0, 1] only: C(t) = 2 sin(t) / t
    c = tabulated([0.0, 1.0], [1.0, 1.0])
    assert covariance_at(c, 2.0) == pytest.approx(2 * np.sin(2.0) / 2.0, rel=1e-8)


# -- Linnik density: two independent routes ------------------------------------

@pytest.mark.parametrize("g,H", [(1.0, 2.0), (1.0, 0.5), (1.5, 2.0), (0.7, 0.9)])
@pytest.mark.parametrize("lam", [0.3, 1.0, 4.0])
def test_rotated_contour_matches_direct_fourier(g, H, lam):
    assert linnik_pdf_exact(g, H, lam) == pytest.approx(direct_linnik_pdf(g, H, lam), rel=1e-6)


def test_gamma_two_bessel_form():
    # H = 2, gamma = 2: covariance 1/(1+t^2), density exp(-lam)/2
    for lam in (0.1, 1.0, 5.0):
        assert linnik_pdf_exact(2.0, 2.0, lam) == pytest.approx(0.5 * np.exp(-lam), rel=1e-10)


def test_linnik_asymptotes():
    g, H = 1.2, 0.6
    hi = 1e5
    ref_hi = H * special.gamma(g) * np.sin(np.pi * g / 2) / np.pi * hi ** (-1 - g)
    assert linnik(g, H).pdf(hi) == pytest.approx(ref_hi, rel=1e-3)
    lo = 1e-9  # next-order term is relatively lam^(1-H)
    ref_lo = lo ** (H - 1) * special.gamma((1 - H) / 2) / (2**H * np.sqrt(np.pi) * special.gamma(H / 2))
    assert linnik(g, H).pdf(lo) == pytest.approx(ref_lo, rel=1e-3)


def test_tabulated_linnik_matches_exact():
    d = linnik(1.0, 0.5)
    for lam in (3e-4, 0.02, 1.7, 250.0):
        assert d.pdf(lam) == pytest.approx(linnik_pdf_exact(1.0, 0.5, lam), rel=1e-6)


def test_tau_and_scale_rescaling():
    d = linnik(1.0, 2.0, scale=3.0, tau=2.0)
    assert d.pdf(0.7) == pytest.approx(3.0 * 2.0 * linnik_pdf_exact(1.0, 2.0, 1.4), rel=1e-6)
    assert covariance_at(d, 2.0) == pytest.approx(3.0 * 2.0 ** -2)


# -- cell grid ----------------------------------------------------------------

def test_short_range_mass_close_to_variance():
    d = linnik(1.0, 2.0)
    cg = density_grid(d)
    total = 2 * cg.masses.sum()
    assert 0.999 <= total / d.variance <= 1.0
    assert cg.deficit == pytest.approx(d.variance - total)


def test_long_range_masses_finite():
    cg = density_grid(linnik(1.0, 0.5))
    assert np.all(np.isfinite(cg.masses)) and np.all(cg.masses >= 0)
    assert 2 * cg.masses.sum() == pytest.approx(1.0, abs=1e-4)


def test_tabulated_constant_cells():
    c = 0.25
    d = tabulated([0.0, 4.0], [c, c])
    cg = density_grid(d, lambda_max=4.0, n_cells=16)
    np.testing.assert_allclose(cg.masses, c * np.diff(cg.edges), rtol=1e-10)


def test_density_grid_rejects_bad_args():
    with pytest.raises(ValueError):
        density_grid(linnik(1, 2), n_cells=4)
    with pytest.raises(ValueError):
        density_grid(linnik(1, 2), lambda_max=-1.0)


# -- synthesis ----------------------------------------------------------------

def test_path_determinism():
    d = linnik(1.0, 2.0)
    a = synthesize_path(d, 1000, 100.0, 7).samples
    b = synthesize_path(d, 1000, 100.0, 7).samples
    assert np.array_equal(a, b)
    assert not np.array_equal(a, synthesize_path(d, 1000, 100.0, 8).samples)


def test_single_cell_path_is_random_cosine():
    m = 0.3
    one = CellGrid(np.array([0.0, 1.0, 2.0]), np.array([0.0, m]), np.array([0.5, 1.5]), 0.0)
    d = tabulated([0.0, 2.0], [1.0, 1.0])
    p = synthesize_path(d, 400, 10.0, 3, cells=one).samples
    amp = 2 * np.sqrt(m) * abs(cell_normals(3, 2)[1])
    assert np.max(np.abs(p)) <= amp + 1e-12
    assert np.max(np.abs(p)) == pytest.approx(amp, rel=1e-2)


def test_single_cell_variance_is_twice_mass():
    m = 0.3
    one = CellGrid(np.array([0.0, 1.0, 2.0]), np.array([0.0, m]), np.array([0.5, 1.5]), 0.0)
    d = tabulated([0.0, 2.0], [1.0, 1.0])
    vals = np.array([synthesize_path(d, 2, 1.0, s, cells=one).samples[0] for s in range(4000)])
    assert np.mean(vals**2) == pytest.approx(2 * m, rel=0.08)


def test_path_sample_variance():
    d = linnik(1.0, 2.0)
    n, fs = 2**14, 100.0
    x = synthesize_path(d, n, fs, 11).samples
    # effective sample size from the analytic covariance
    lags = np.arange(1, n) / fs
    rho = np.array([covariance_at(d, t) for t in lags[:5000]])
    n_eff = n / (1 + 2 * np.sum(rho**2))
    assert abs(np.var(x) - 1.0) < 3 * np.sqrt(2 / n_eff)


def test_trial_seed_xor():
    assert trial_seed(0b1010, 0b0110) == 0b1100
    assert trial_seed(5, 0) == 5


# -- columns and moments ------------------------------------------------------

def test_column_energy_matches_moment(w80):
    d = linnik(1.0, 2.0)
    sc = np.array([4.0, 8.0, 16.0, 30.0])
    W = awt_columns(d, w80, 0.0, sc, range(10_000))["W"]
    emp = np.mean(np.abs(W) ** 2, axis=0)
    mom = np.array([spectral_moment(d, w80, s) for s in sc])
    np.testing.assert_allclose(emp, mom, rtol=0.05)


def test_zero_mass_density_gives_zero_column(w80):
    d = linnik(1.0, 2.0, scale=0.0)
    assert np.all(awt_column(d, w80, 0.0, [4.0, 8.0], 1) == 0)


def test_pseudo_covariance_small(w80):
    d = linnik(1.0, 2.0)
    W = awt_columns(d, w80, 0.3, [6.0, 8.0], range(10_000))["W"]
    s1, s2 = (np.sqrt(spectral_moment(d, w80, s)) for s in (6.0, 8.0))
    assert abs(np.mean(W[:, 0] * W[:, 1])) < 4 / 100 * s1 * s2


def test_spectral_moment_closed_form(w11):
    c, L = 0.8, 3.0
    d = tabulated([0.0, L], [c, c])
    ref = c * (0.25 - np.exp(-2 * L) * (L**2 / 2 + L / 2 + 0.25))
    assert spectral_moment(d, w11, 1.0) == pytest.approx(ref, rel=1e-8)


def test_dW_moment_closed_form(w11):
    # lam * Dpsi(lam) = lam (1 - lam) e^{-lam}; constant p = 1 on [0, inf) approximated by a wide table
    d = tabulated([0.0, 60.0], [1.0, 1.0])
    ref, _ = integrate.quad(lambda x: (x * (1 - x) * np.exp(-x)) ** 2, 0, 60)
    assert spectral_moment(d, w11, 1.0, "dW") == pytest.approx(ref, rel=1e-7)


def test_mean_abs_w_formula(w80):
    d = linnik(1.0, 2.0)
    m = spectral_moment(d, w80, 8.0)
    assert mean_abs_W(d, w80, 8.0) == pytest.approx(np.sqrt(np.pi) / 2 * np.sqrt(m))
    W = awt_columns(d, w80, 0.0, [8.0], range(10_000))["W"][:, 0]
    a = np.abs(W)
    assert abs(a.mean() - mean_abs_W(d, w80, 8.0)) < 3 * a.std() / 100


def test_rayleigh_law_and_increment(w80):
    d = linnik(1.0, 0.5)
    W = awt_columns(d, w80, 0.0, [7.0, 9.0], range(10_000))["W"]
    x = np.abs(W[:, 0]) ** 2 / spectral_moment(d, w80, 7.0)
    assert stats.kstest(x, "expon").pvalue > 0.01
    inc = np.abs(W[:, 0] - W[:, 1]) ** 2 / increment_distance(d, w80, 7.0, 9.0) ** 2
    assert stats.kstest(inc, "expon").pvalue > 0.01


def test_scalogram_covariance_nonnegative(w80):
    d = linnik(1.0, 2.0)
    sc = [5.0, 8.0, 13.0]
    for a in sc:
        for b in sc:
            assert abs(cross_moment(d, w80, a, b)) ** 2 >= 0
    k = cross_moment(d, w80, 8.0, 8.0)
    assert k.real == pytest.approx(spectral_moment(d, w80, 8.0), rel=1e-7)
    assert abs(k.imag) < 1e-10 * k.real


def test_increment_distance_symmetric(w80):
    d = linnik(1.0, 0.5)
    assert increment_distance(d, w80, 7.0, 7.6) == increment_distance(d, w80, 7.6, 7.0)
    assert increment_distance(d, w80, 7.0, 7.0) == 0.0
    # polarization: d^2 = m1 + m2 - 2 Re K
    m1, m2 = spectral_moment(d, w80, 7.0), spectral_moment(d, w80, 7.6)
    K = cross_moment(d, w80, 7.0, 7.6)
    assert increment_distance(d, w80, 7.0, 7.6) ** 2 == pytest.approx(m1 + m2 - 2 * K.real, rel=1e-6)


def test_estimate_c1_matches_tail_constant():
    g, H = 1.0, 2.0
    c1 = estimate_c1(linnik(g, H))
    assert c1 >= H * special.gamma(g) * np.sin(np.pi * g / 2) / np.pi * 0.999


def test_density_dict_round_trip():
    d = linnik(1.5, 0.7, 2.0, 3.0, c1_bound=0.4)
    assert density_from_dict(density_to_dict(d)) == d
    t = tabulated([0.0, 1.0], [1.0, 2.0])
    assert density_from_dict(density_to_dict(t)) == t


def test_invalid_densities():
    with pytest.raises(ValueError):
        linnik(2.5, 1.0)
    with pytest.raises(ValueError):
        tabulated([1.0, 0.5], [1.0, 1.0])
    with pytest.raises(ValueError):
        tabulated([0.0, 1.0], [1.0, -1.0])


@settings(max_examples=25, deadline=None)
@given(var=st.floats(0.01, 100.0))
def test_with_scale_sets_variance(var):
    d = linnik(1.0, 2.0).with_scale(var)
    assert d.variance == pytest.approx(var)
    t = tabulated([0.0, 1.0, 3.0], [2.0, 1.0, 0.1]).with_scale(var)
    assert t.variance == pytest.approx(var, rel=1e-8)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**63 - 1))
def test_cell_normals_are_seed_deterministic(seed):
    a = cell_normals(seed, 5)
    assert np.array_equal(a, cell_normals(seed, 5))
    assert a.dtype == complex
