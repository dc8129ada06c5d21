import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ridgelab.wavelets import (InvalidWaveletError, center_frequency, eval_d2psi_hat, eval_d3psi_hat,
                               eval_dpsi_hat, eval_psi_hat, is_unimodal, klauder, morse,
                               verify_admissibility, wavelet_from_dict, wavelet_to_dict)


def test_morse_closed_form_values(w11):
    # psi_hat(lam) = lam * exp(-lam)
    assert eval_psi_hat(w11, 1.0) == pytest.approx(np.exp(-1), rel=1e-14)
    assert eval_dpsi_hat(w11, 0.5) == pytest.approx(0.5 * np.exp(-0.5), rel=1e-14)
    assert eval_d2psi_hat(w11, 1.0) == pytest.approx(-np.exp(-1), rel=1e-14)
    assert eval_d3psi_hat(w11, 2.0) == pytest.approx((3 - 2) * np.exp(-2), rel=1e-13)


def test_vanishes_on_nonpositive_frequencies(w80):
    lam = np.array([-5.0, -1e-3, 0.0])
    assert np.all(eval_psi_hat(w80, lam) == 0)


def test_derivatives_reject_nonpositive(w11):
    with pytest.raises(ValueError):
        eval_dpsi_hat(w11, 0.0)
    with pytest.raises(ValueError):
        eval_d2psi_hat(w11, np.array([1.0, -1.0]))


@pytest.mark.parametrize("w", [morse(1, 1), morse(9, 3, 80.0, "peak"), morse(3, 2), klauder(2, 1.5, 1.0)])
def test_derivatives_match_finite_differences(w):
    lam = np.geomspace(0.3, 3.0, 7) * w.peak_radians
    h = 1e-6 * lam
    for f, df in ((eval_psi_hat, eval_dpsi_hat), (eval_dpsi_hat, eval_d2psi_hat), (eval_d2psi_hat, eval_d3psi_hat)):
        fd = (f(w, lam + h) - f(w, lam - h)) / (2 * h)
        ref = np.max(np.abs(df(w, lam)))
        assert np.max(np.abs(fd - df(w, lam))) < 1e-6 * ref


def test_center_frequency():
    assert center_frequency(morse(1, 1)) == pytest.approx(1 / (2 * np.pi))
    assert center_frequency(morse(3, 1)) == pytest.approx(3 / (2 * np.pi))
    assert center_frequency(morse(9, 3, 80.0)) == 80.0


def test_peak_target_puts_max_at_target(w80):
    lam = np.linspace(0.5, 1.5, 20001) * 2 * np.pi * 80
    k = np.argmax(np.abs(eval_psi_hat(w80, lam)))
    assert lam[k] / (2 * np.pi) == pytest.approx(80.0, rel=1e-4)
    assert abs(eval_psi_hat(w80, w80.peak_radians)) == pytest.approx(1.0, rel=1e-12)


class _Bimodal:
    """Duck-typed wavelet whose modulus has two bumps."""
    dilation = 1.0
    peak_target_hz = None


@pytest.fixture
def bimodal(monkeypatch):
    import ridgelab.wavelets as wv
    orig = wv.eval_psi_hat

    def fake(w, lam):
        if isinstance(w, _Bimodal):
            u = np.log(np.asarray(lam, dtype=float))
            return np.exp(-u**2) + np.exp(-(u - 4) ** 2)
        return orig(w, lam)
    monkeypatch.setattr(wv, "eval_psi_hat", fake)
    return _Bimodal()


def test_non_unimodal_is_rejected(bimodal):
    assert is_unimodal(klauder(1.0, 0.0, 1.0))
    assert not is_unimodal(bimodal)
    with pytest.raises(InvalidWaveletError):
        center_frequency(bimodal)


def test_admissibility():
    assert verify_admissibility(morse(1, 1)).passed
    assert verify_admissibility(klauder(1, 2, 1)).passed
    rep = verify_admissibility(morse(0.5, 1))
    assert "D1_0" in rep.failed and not rep.passed


def test_admissibility_grid_must_cover_range(w11):
    with pytest.raises(ValueError):
        verify_admissibility(w11, np.geomspace(1e-2, 1e2, 100))


def test_time_support():
    assert morse(1, 1).time_support == pytest.approx(63.6, rel=0.02)
    assert morse(9, 3, 80.0, "peak").time_support == pytest.approx(0.0264, rel=0.03)


def test_dict_round_trip(w80):
    w = wavelet_from_dict(wavelet_to_dict(w80))
    assert w == w80
    k = klauder(2.0, 0.5, 1 + 0.2j, 30.0, "peak")
    assert wavelet_from_dict(wavelet_to_dict(k)) == k


@settings(max_examples=40, deadline=None)
@given(b1=st.floats(1.0, 20.0), b2=st.floats(0.5, 5.0), s=st.floats(0.1, 10.0))
def test_dilation_relation(b1, b2, s):
    """A wavelet targeted at f Hz equals the base wavelet at argument kappa * lam."""
    base = morse(b1, b2)
    hz = morse(b1, b2, 10.0)
    lam = s * hz.peak_radians
    assert eval_psi_hat(hz, lam) == pytest.approx(eval_psi_hat(base, hz.dilation * lam), rel=1e-12, abs=1e-300)


@settings(max_examples=40, deadline=None)
@given(b1=st.floats(0.5, 30.0), b2=st.floats(0.5, 6.0))
def test_morse_unimodal_and_peak(b1, b2):
    w = morse(b1, b2, norm="peak")
    assert is_unimodal(w)
    lam = w.peak_radians * np.array([0.9, 1.0, 1.1])
    v = np.abs(eval_psi_hat(w, lam))
    assert v[1] >= v[0] and v[1] >= v[2]
    assert v[1] == pytest.approx(1.0, rel=1e-12)
