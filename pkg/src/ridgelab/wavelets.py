"""Analytic mother wavelets defined in the frequency domain.

Two families are supported: generalized Morse wavelets
``a * lam**beta1 * exp(-lam**beta2)`` and Klauder wavelets
``lam**alpha * exp(-gamma*lam) * exp(i*beta*log(lam))``. Both vanish on
``lam <= 0``. Derivatives are obtained in closed form from the derivatives of
``log psi_hat``, which keeps every channel exact instead of differenced.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

__all__ = [
    "WaveletSpec",
    "InvalidWaveletError",
    "AdmissibilityReport",
    "morse",
    "klauder",
    "eval_psi_hat",
    "eval_dpsi_hat",
    "eval_d2psi_hat",
    "eval_d3psi_hat",
    "center_frequency",
    "verify_admissibility",
    "is_unimodal",
    "wavelet_from_dict",
    "wavelet_to_dict",
]


class InvalidWaveletError(ValueError):
    """Raised when a wavelet violates the unimodality/analyticity contract."""


@dataclass(frozen=True)
class WaveletSpec:
    """Frequency-domain description of an analytic mother wavelet.

    ``family`` is ``"morse"`` (params ``beta1``, ``beta2``) or ``"klauder"``
    (params ``alpha``, ``beta``, ``gamma_re``, ``gamma_im``). When
    ``peak_target_hz`` is set the wavelet is dilated so its center frequency
    equals that value. ``leak`` injects a negative-frequency response of the
    given relative size; it exists only for fault-injection runs and breaks
    analyticity on purpose.
    """

    family: str
    beta1: float = 1.0
    beta2: float = 1.0
    alpha: float = 1.0
    beta: float = 0.0
    gamma_re: float = 1.0
    gamma_im: float = 0.0
    peak_target_hz: float | None = None
    norm_const: float = 1.0
    leak: float = 0.0

    def __post_init__(self):
        if self.family not in ("morse", "klauder"):
            raise ValueError(f"unknown wavelet family {self.family!r}")
        if self.family == "morse" and self.beta2 <= 0:
            raise ValueError("Morse wavelet needs beta2 > 0")
        if self.family == "klauder" and self.gamma_re <= 0:
            raise ValueError("Klauder wavelet needs Re(gamma) > 0")
        if self.norm_const <= 0:
            raise ValueError("norm_const must be positive")
        if self.peak_target_hz is not None and self.peak_target_hz <= 0:
            raise ValueError("peak_target_hz must be positive")

    @property
    def base_peak(self) -> float:
        """Argmax of |psi_hat| before dilation (radians)."""
        if self.family == "morse":
            return (self.beta1 / self.beta2) ** (1.0 / self.beta2)
        return self.alpha / self.gamma_re

    @property
    def dilation(self) -> float:
        """Argument scaling kappa; psi_hat(lam) = base(kappa * lam)."""
        if self.peak_target_hz is None:
            return 1.0
        return self.base_peak / (2 * np.pi * self.peak_target_hz)

    @property
    def peak_radians(self) -> float:
        return self.base_peak / self.dilation

    def unit_peak(self) -> "WaveletSpec":
        """Copy whose norm_const makes max |psi_hat| equal to one."""
        raw = replace(self, norm_const=1.0)
        return replace(self, norm_const=1.0 / abs(eval_psi_hat(raw, raw.peak_radians)))

    @cached_property
    def time_support(self) -> float:
        """Radius (seconds) holding 99% of the time-domain L1 mass of psi."""
        return _time_support(self)


def morse(beta1: float, beta2: float, peak_hz: float | None = None, norm: str | float = 1.0) -> WaveletSpec:
    w = WaveletSpec("morse", beta1=float(beta1), beta2=float(beta2), peak_target_hz=peak_hz)
    return _apply_norm(w, norm)


def klauder(alpha: float, beta: float, gamma: complex = 1.0, peak_hz: float | None = None,
            norm: str | float = 1.0) -> WaveletSpec:
    g = complex(gamma)
    w = WaveletSpec("klauder", alpha=float(alpha), beta=float(beta), gamma_re=g.real,
                    gamma_im=g.imag, peak_target_hz=peak_hz)
    return _apply_norm(w, norm)


def _apply_norm(w: WaveletSpec, norm) -> WaveletSpec:
    if norm == "peak":
        return w.unit_peak()
    return replace(w, norm_const=float(norm))


def _log_derivs(w: WaveletSpec, u: np.ndarray):
    """g, g', g'', g''' of log(psi_hat) at base argument u > 0."""
    if w.family == "morse":
        b1, b2 = w.beta1, w.beta2
        ub = u ** b2
        g = np.log(w.norm_const) + b1 * np.log(u) - ub
        g1 = b1 / u - b2 * ub / u
        g2 = -b1 / u**2 - b2 * (b2 - 1) * ub / u**2
        g3 = 2 * b1 / u**3 - b2 * (b2 - 1) * (b2 - 2) * ub / u**3
        return g, g1, g2, g3
    a = complex(w.alpha, w.beta)
    gam = complex(w.gamma_re, w.gamma_im)
    g = np.log(w.norm_const) + a * np.log(u) - gam * u
    g1 = a / u - gam
    g2 = -a / u**2
    g3 = 2 * a / u**3
    return g, g1, g2, g3


def _eval(w: WaveletSpec, lam, order: int, strict: bool) -> np.ndarray | complex:
    lam_arr = np.asarray(lam, dtype=float)
    if strict and np.any(lam_arr <= 0):
        raise ValueError("derivative channels are defined for lambda > 0 only")
    kappa = w.dilation
    out = np.zeros(lam_arr.shape, dtype=complex)
    pos = lam_arr > 0
    u = kappa * lam_arr[pos]
    g, g1, g2, g3 = _log_derivs(w, u)
    psi = np.exp(g)
    if order == 0:
        val = psi
    elif order == 1:
        val = g1 * psi
    elif order == 2:
        val = (g2 + g1**2) * psi
    else:
        val = (g3 + 3 * g1 * g2 + g1**3) * psi
    out[pos] = val * kappa**order
    if np.ndim(lam) == 0:
        return complex(out[()])
    return out


def eval_psi_hat(w: WaveletSpec, lam):
    """psi_hat(lam); exactly zero for lam <= 0."""
    return _eval(w, lam, 0, strict=False)


def eval_dpsi_hat(w: WaveletSpec, lam):
    """First derivative of psi_hat. Raises ValueError for lam <= 0."""
    return _eval(w, lam, 1, strict=True)


def eval_d2psi_hat(w: WaveletSpec, lam):
    return _eval(w, lam, 2, strict=True)


def eval_d3psi_hat(w: WaveletSpec, lam):
    return _eval(w, lam, 3, strict=True)


def is_unimodal(w: WaveletSpec, n: int = 4096, lo: float = 1e-4, hi: float = 1e4) -> bool:
    """Sign changes of successive differences of |psi_hat| on a log grid.

    The grid is taken relative to the dilated peak so dilation does not push
    the whole mode off the grid.
    """
    lam = np.geomspace(lo, hi, n) / w.dilation
    mag = np.abs(eval_psi_hat(w, lam))
    d = np.diff(mag)
    s = np.sign(d[d != 0])
    return int(np.count_nonzero(np.diff(s) != 0)) == 1


def center_frequency(w: WaveletSpec) -> float:
    """omega_psi in Hz: argmax of |psi_hat| divided by 2*pi."""
    if not is_unimodal(w):
        raise InvalidWaveletError("|psi_hat| is not unimodal on (0, inf)")
    if w.peak_target_hz is not None:
        return float(w.peak_target_hz)
    return w.base_peak / (2 * np.pi)


# (derivative order, power p, sup taken over lam > 1 only)
_CONDITIONS = {
    "D0_1": (0, 1, True),
    "D0_2": (0, 2, True),
    "D1_0": (1, 0, False),
    "D1_1": (1, 1, False),
    "D1_2": (1, 2, False),
    "D2_2": (2, 2, False),
    "D2_3": (2, 3, False),
    "D3_3": (3, 3, False),
}


@dataclass
class AdmissibilityReport:
    sups: dict[str, float]
    edge_slopes: dict[str, float]
    failed: list[str] = field(default_factory=list)
    unimodal: bool = True
    lipschitz: float = float("nan")
    sup_abs: float = float("nan")

    @property
    def passed(self) -> bool:
        return not self.failed and self.unimodal


def verify_admissibility(w: WaveletSpec, grid=None) -> AdmissibilityReport:
    """Numerical sup estimates for the boundedness conditions on psi_hat.

    A condition fails when its sup is not finite or when ``log10 |lam^p D^k
    psi_hat|`` still rises toward either grid edge by more than 1e-3 per
    decade relative to the sup. The grid is in units of the undilated
    argument; dilation rescales every sup by a constant and cannot change the
    verdict.
    """
    lam = np.geomspace(1e-6, 1e6, 4097) if grid is None else np.asarray(grid, dtype=float)
    if lam[0] > 1e-6 or lam[-1] < 1e6:
        raise ValueError("admissibility grid must cover [1e-6, 1e6]")
    base = replace(w, peak_target_hz=None, leak=0.0)
    funcs = [eval_psi_hat, eval_dpsi_hat, eval_d2psi_hat, eval_d3psi_hat]
    sups, slopes, failed = {}, {}, []
    logl = np.log10(lam)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for name, (k, p, above_one) in _CONDITIONS.items():
            sel = lam > 1 if above_one else np.ones_like(lam, dtype=bool)
            vals = np.abs(lam[sel] ** p * funcs[k](base, lam[sel]))
            sup = float(np.nanmax(vals)) if np.all(np.isfinite(vals)) else float("inf")
            sups[name] = sup
            worst = 0.0
            ll = logl[sel]
            for idx in ((0, 8), (-9, -1)):
                a, b = vals[idx[0]], vals[idx[1]]
                if a <= 0 or b <= 0 or not np.isfinite(a) or not np.isfinite(b):
                    continue
                # growth toward the edge, measured in decades of value per decade of lam
                rise = (np.log10(a) - np.log10(b)) / (ll[idx[1]] - ll[idx[0]])
                if idx[0] == -9:
                    rise = -rise
                worst = max(worst, rise)
            slopes[name] = worst
            if not np.isfinite(sup) or worst > 1e-3:
                failed.append(name)
        d1 = np.abs(eval_dpsi_hat(w, lam / w.dilation))
        mag = np.abs(eval_psi_hat(w, lam / w.dilation))
    return AdmissibilityReport(
        sups=sups,
        edge_slopes=slopes,
        failed=failed,
        unimodal=is_unimodal(w),
        lipschitz=float(np.nanmax(d1)) if np.all(np.isfinite(d1)) else float("inf"),
        sup_abs=float(np.max(mag)),
    )


def _time_support(w: WaveletSpec, mass: float = 0.99) -> float:
    lam_peak = w.peak_radians
    lam_max = lam_peak
    while abs(eval_psi_hat(w, lam_max)) > 1e-12 * abs(eval_psi_hat(w, lam_peak)):
        lam_max *= 1.5
    n = 1 << 18
    dlam = lam_max / (n // 8)
    lam = np.arange(n) * dlam
    psi_t = np.fft.ifft(eval_psi_hat(w, lam)) * n * dlam / (2 * np.pi)
    dt = 2 * np.pi / (n * dlam)
    mag = np.abs(np.fft.fftshift(psi_t))
    t = (np.arange(n) - n // 2) * dt
    order = np.argsort(np.abs(t), kind="stable")
    cum = np.cumsum(mag[order])
    k = int(np.searchsorted(cum, mass * cum[-1]))
    return float(abs(t[order[min(k, n - 1)]]))


def wavelet_from_dict(d: dict) -> WaveletSpec:
    fam = d.get("family", "morse").lower()
    norm = d.get("norm", "peak")
    if fam == "morse":
        w = morse(d.get("beta1", 1.0), d.get("beta2", 1.0), d.get("peak_hz"), norm)
    elif fam == "klauder":
        w = klauder(d.get("alpha", 1.0), d.get("beta", 0.0),
                    complex(d.get("gamma_re", d.get("gamma", 1.0)), d.get("gamma_im", 0.0)),
                    d.get("peak_hz"), norm)
    else:
        raise ValueError(f"unknown wavelet family {fam!r}")
    if d.get("leak"):
        w = replace(w, leak=float(d["leak"]))
    return w


def wavelet_to_dict(w: WaveletSpec) -> dict:
    out: dict = {"family": w.family}
    if w.family == "morse":
        out.update(beta1=w.beta1, beta2=w.beta2)
    else:
        out.update(alpha=w.alpha, beta=w.beta, gamma_re=w.gamma_re, gamma_im=w.gamma_im)
    if w.peak_target_hz is not None:
        out["peak_hz"] = w.peak_target_hz
    out["norm"] = w.norm_const
    if w.leak:
        out["leak"] = w.leak
    return out
