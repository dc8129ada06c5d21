"""Stationary Gaussian noise described by its spectral density.

Sample paths and single-time wavelet columns are synthesized with a
spectral-cell discretization of the random measure ``Z(dlam)``: the positive
half-line is cut into cells refined geometrically toward zero, each cell
carries its exact mass ``int p`` and one circular complex normal weight.

Convention: ``Cov(Phi(t), Phi(0)) = int_R exp(i t lam) p(lam) dlam`` so that
``Var(Phi(0)) = 2 int_0^inf p``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import integrate, interpolate, special

from .wavelets import WaveletSpec, eval_dpsi_hat, eval_d2psi_hat, eval_psi_hat

__all__ = [
    "SpectralDensity",
    "CellGrid",
    "NoisePath",
    "NumericalError",
    "linnik",
    "tabulated",
    "density_from_dict",
    "density_to_dict",
    "covariance_at",
    "density_grid",
    "synthesize_path",
    "awt_column",
    "awt_columns",
    "spectral_moment",
    "cross_moment",
    "increment_distance",
    "mean_abs_W",
    "estimate_c1",
    "cell_normals",
    "trial_seed",
]

LAMBDA_MIN = 1e-8
CELL_RATIO = 1.05
TAIL_FRACTION = 1e-6


class NumericalError(RuntimeError):
    """Quadrature did not reach the requested tolerance."""


def trial_seed(base_seed: int, trial_index: int) -> int:
    """Stream-split rule: per-trial seed is ``base_seed XOR trial_index``."""
    return (int(base_seed) ^ int(trial_index)) & 0xFFFFFFFFFFFFFFFF


def cell_normals(seed: int, n_cells: int) -> np.ndarray:
    """Circular complex standard normals (E|Z|^2 = 1) from PCG64(seed)."""
    rng = np.random.Generator(np.random.PCG64(seed))
    ab = rng.standard_normal((2, n_cells))
    return (ab[0] + 1j * ab[1]) / np.sqrt(2.0)


@dataclass(frozen=True)
class SpectralDensity:
    """Spectral density of a real stationary Gaussian process.

    ``kind="linnik"``: covariance ``scale * (1 + |t/tau|**gamma)**(-H/gamma)``.
    ``kind="tabulated"``: ``p`` is log-linear between ``knots`` and zero
    outside them (knots on the positive axis; p is extended evenly).
    """

    kind: str
    gamma: float = 1.0
    H: float = 1.0
    scale: float = 1.0
    tau: float = 1.0
    knots: tuple = ()
    values: tuple = ()
    c1_bound: float | None = None

    def __post_init__(self):
        if self.kind == "linnik":
            if not 0 < self.gamma <= 2:
                raise ValueError("Linnik gamma must lie in (0, 2]")
            if self.H <= 0 or self.scale < 0 or self.tau <= 0:
                raise ValueError("Linnik needs H > 0, scale >= 0, tau > 0")
        elif self.kind == "tabulated":
            k = np.asarray(self.knots, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if k.ndim != 1 or k.shape != v.shape or len(k) < 2:
                raise ValueError("tabulated density needs matching knot/value arrays")
            if np.any(np.diff(k) <= 0) or k[0] < 0:
                raise ValueError("knots must be ascending and nonnegative")
            if np.any(v < 0):
                raise ValueError("tabulated values must be nonnegative")
        else:
            raise ValueError(f"unknown density kind {self.kind!r}")

    def with_scale(self, scale: float) -> "SpectralDensity":
        """Same shape, variance rescaled so that Var(Phi(0)) = scale."""
        if self.kind == "linnik":
            c1 = None if self.c1_bound is None else self.c1_bound * scale / self.scale
            return replace(self, scale=float(scale), c1_bound=c1)
        f = scale / self.variance if self.variance > 0 else 0.0
        return replace(self, values=tuple(np.asarray(self.values) * f),
                       c1_bound=None if self.c1_bound is None else self.c1_bound * f)

    @property
    def variance(self) -> float:
        if self.kind == "linnik":
            return float(self.scale)
        k = np.asarray(self.knots, dtype=float)
        return 2.0 * sum(_tab_mass(self, a, b) for a, b in zip(k[:-1], k[1:]))

    @property
    def long_range(self) -> bool:
        return self.kind == "linnik" and self.H < 1

    def pdf(self, lam):
        """p(lam); even in lam."""
        lam = np.abs(np.asarray(lam, dtype=float))
        if self.kind == "linnik":
            if self.scale == 0:
                return np.zeros_like(lam)
            return self.scale * self.tau * _linnik_unit_pdf(self.gamma, self.H, lam * self.tau)
        return _tab_pdf(self, lam)


def linnik(gamma: float, H: float, scale: float = 1.0, tau: float = 1.0,
           c1_bound: float | None = None) -> SpectralDensity:
    return SpectralDensity("linnik", gamma=float(gamma), H=float(H), scale=float(scale),
                           tau=float(tau), c1_bound=c1_bound)


def tabulated(knots, values, c1_bound: float | None = None) -> SpectralDensity:
    return SpectralDensity("tabulated", knots=tuple(float(x) for x in knots),
                           values=tuple(float(x) for x in values), c1_bound=c1_bound)


# ----------------------------------------------------------------------------
# Linnik spectral density
# ----------------------------------------------------------------------------

def linnik_pdf_exact(gamma: float, H: float, lam: float) -> float:
    """Unit-scale Linnik density at one frequency, by contour rotation.

    Rotating the Fourier integral onto the imaginary axis gives
    ``p(lam) = -(1/pi) int_0^inf exp(-lam r) Im[(1 + r^g e^{i pi g/2})^(-H/g)] dr``,
    a smooth Laplace integral; valid for gamma < 2 where the integrand has no
    singularity in the first quadrant. gamma = 2 uses the Bessel-K closed form.
    """
    lam = abs(float(lam))
    if lam == 0:
        raise ValueError("evaluate the density at lam > 0")
    if gamma == 2:
        nu = H / 2
        logv = (np.log(1 / (np.sqrt(np.pi) * special.gamma(nu))) + (nu - 0.5) * np.log(lam / 2)
                + np.log(special.kve(nu - 0.5, lam)) - lam)
        return float(np.exp(logv))
    a = H / gamma
    rot = np.exp(1j * np.pi * gamma / 2)

    def f(u):
        return np.exp(u - lam * np.exp(u)) * np.imag((1 + np.exp(gamma * u) * rot) ** (-a))

    hi = np.log(60.0 / lam)
    lo = min(-60.0, hi - 80.0)
    v, err = integrate.quad(f, lo, hi, limit=400, epsabs=0, epsrel=1e-11)
    return -v / np.pi


_TABLE_LO, _TABLE_HI, _TABLE_PER_DECADE = 1e-10, 1e8, 30


@lru_cache(maxsize=32)
def _linnik_table(gamma: float, H: float):
    n = int(round(np.log10(_TABLE_HI / _TABLE_LO) * _TABLE_PER_DECADE)) + 1
    lam = np.geomspace(_TABLE_LO, _TABLE_HI, n)
    vals = np.array([linnik_pdf_exact(gamma, H, x) for x in lam])
    logl, logp = np.log(lam), np.log(np.maximum(vals, 1e-300))
    spline = interpolate.CubicSpline(logl, logp)
    lo_slope = (logp[1] - logp[0]) / (logl[1] - logl[0])
    hi_slope = (logp[-1] - logp[-2]) / (logl[-1] - logl[-2])
    return spline, (logl[0], logp[0], lo_slope), (logl[-1], logp[-1], hi_slope)


def _linnik_unit_pdf(gamma: float, H: float, lam: np.ndarray) -> np.ndarray:
    spline, lo, hi = _linnik_table(float(gamma), float(H))
    out = np.empty_like(lam, dtype=float)
    with np.errstate(divide="ignore"):
        ll = np.log(lam)
    mid = (ll >= lo[0]) & (ll <= hi[0])
    out[mid] = np.exp(spline(ll[mid]))
    below = ll < lo[0]
    out[below] = np.exp(lo[1] + lo[2] * (ll[below] - lo[0]))
    above = ll > hi[0]
    out[above] = np.exp(hi[1] + hi[2] * (ll[above] - hi[0]))
    return out


def _low_power_law(d: SpectralDensity, lam0: float):
    """(c, alpha) with p(lam) ~ c lam^alpha just above zero, fitted at lam0."""
    p0, p1 = d.pdf(lam0), d.pdf(lam0 * 1.01)
    alpha = np.log(p1 / p0) / np.log(1.01) if p0 > 0 and p1 > 0 else 0.0
    return p0 / lam0**alpha, alpha


# ----------------------------------------------------------------------------
# Tabulated density
# ----------------------------------------------------------------------------

def _tab_pdf(d: SpectralDensity, lam: np.ndarray) -> np.ndarray:
    k = np.asarray(d.knots, dtype=float)
    v = np.asarray(d.values, dtype=float)
    out = np.zeros_like(lam, dtype=float)
    inside = (lam >= k[0]) & (lam <= k[-1])
    if not np.any(inside):
        return out
    x = lam[inside]
    j = np.clip(np.searchsorted(k, x, side="right") - 1, 0, len(k) - 2)
    a, b = k[j], k[j + 1]
    va, vb = v[j], v[j + 1]
    w = (x - a) / (b - a)
    pos = (va > 0) & (vb > 0)
    res = (1 - w) * va + w * vb
    res[pos] = np.exp((1 - w[pos]) * np.log(va[pos]) + w[pos] * np.log(vb[pos]))
    out[inside] = res
    return out


def _tab_mass(d: SpectralDensity, a: float, b: float) -> float:
    k = np.asarray(d.knots, dtype=float)
    a, b = max(a, k[0]), min(b, k[-1])
    if b <= a:
        return 0.0
    pts = [x for x in k if a < x < b]
    v, _ = integrate.quad(lambda x: float(d.pdf(x)), a, b, points=pts or None, limit=200,
                          epsabs=0, epsrel=1e-10)
    return v


# ----------------------------------------------------------------------------
# Covariance and moments
# ----------------------------------------------------------------------------

def covariance_at(d: SpectralDensity, t: float) -> float:
    """C_Phi(t). Closed form for Linnik; numerical Fourier integral otherwise."""
    if d.kind == "linnik":
        return float(d.scale * (1 + abs(t / d.tau) ** d.gamma) ** (-d.H / d.gamma))
    k = np.asarray(d.knots, dtype=float)
    if t == 0:
        return d.variance
    total = 0.0
    for a, b in zip(k[:-1], k[1:]):
        v, _ = integrate.quad(lambda x: float(d.pdf(x)), a, b, weight="cos", wvar=abs(t), limit=200)
        total += v
    return 2 * total


def estimate_c1(d: SpectralDensity, gamma: float | None = None) -> float:
    """Numerical sup of lam^(1+gamma) p(lam); the envelope constant C1."""
    g = d.gamma if gamma is None else gamma
    lam = np.geomspace(1e-6, 1e8, 1401) / (d.tau if d.kind == "linnik" else 1.0)
    return float(np.max(lam ** (1 + g) * d.pdf(lam)))


def _c1(d: SpectralDensity) -> float:
    return d.c1_bound if d.c1_bound is not None else estimate_c1(d)


def _lambda_window(d: SpectralDensity, w: WaveletSpec, s: float):
    """Frequency range carrying the integrand |psi_hat(s lam)|^2 p(lam)."""
    peak = w.peak_radians / s
    lo = peak * 1e-8
    hi = peak
    ref = abs(eval_psi_hat(w, peak))
    while abs(eval_psi_hat(w, hi)) > 1e-10 * ref and hi < peak * 1e6:
        hi *= 1.25
    if d.kind == "tabulated":
        k = np.asarray(d.knots, dtype=float)
        lo, hi = max(lo, k[0] if k[0] > 0 else lo), min(hi, k[-1])
    return lo, hi, peak


def _channel_fn(w: WaveletSpec, channel: str, s: float):
    if channel == "W":
        return lambda lam: eval_psi_hat(w, s * lam)
    if channel == "dW":
        return lambda lam: lam * eval_dpsi_hat(w, s * lam)
    if channel == "d2W":
        return lambda lam: lam**2 * eval_d2psi_hat(w, s * lam)
    raise ValueError(f"unknown channel {channel!r}")


def _log_quad(fn, lo: float, hi: float, peak: float, complex_out: bool = False):
    """Integrate fn over [lo, hi] in the variable u = log(lam)."""
    ulo, uhi = np.log(lo), np.log(hi)
    pts = [u for u in (np.log(peak),) if ulo < u < uhi]

    def part(g):
        v, err = integrate.quad(g, ulo, uhi, points=pts or None, limit=500, epsabs=0, epsrel=1e-8,
                                full_output=1)[:2]
        return v, err

    if complex_out:
        re, e1 = part(lambda u: float(np.real(fn(np.exp(u)))) * np.exp(u))
        im, e2 = part(lambda u: float(np.imag(fn(np.exp(u)))) * np.exp(u))
        return complex(re, im), max(e1, e2)
    return part(lambda u: float(fn(np.exp(u))) * np.exp(u))


def spectral_moment(d: SpectralDensity, w: WaveletSpec, s: float, channel: str = "W") -> float:
    """E|W_Phi(t,s)|^2 (channel W) or E|dW_Phi/ds|^2 (channel dW) by quadrature."""
    if s <= 0:
        raise ValueError("scale must be positive")
    g = _channel_fn(w, channel, s)
    lo, hi, peak = _lambda_window(d, w, s)
    if hi <= lo:
        return 0.0
    v, err = _log_quad(lambda lam: abs(g(lam)) ** 2 * d.pdf(lam), lo, hi, peak)
    if not np.isfinite(v) or err > 1e-6 * max(abs(v), 1e-300) + 1e-300:
        raise NumericalError(f"spectral moment did not converge at s={s} (err={err:.3g})")
    return float(v)


def cross_moment(d: SpectralDensity, w: WaveletSpec, s1: float, s2: float,
                 ch1: str = "W", ch2: str = "W") -> complex:
    """E[W_ch1(t,s1) conj(W_ch2(t,s2))] = int conj(g1) g2 p over (0, inf)."""
    g1, g2 = _channel_fn(w, ch1, s1), _channel_fn(w, ch2, s2)
    lo1, hi1, pk1 = _lambda_window(d, w, s1)
    lo2, hi2, pk2 = _lambda_window(d, w, s2)
    v, _ = _log_quad(lambda lam: np.conj(g1(lam)) * g2(lam) * d.pdf(lam), min(lo1, lo2), max(hi1, hi2),
                     np.sqrt(pk1 * pk2), complex_out=True)
    return v


def increment_distance(d: SpectralDensity, w: WaveletSpec, s1: float, s2: float) -> float:
    """d_W(s1, s2) = sqrt(E|W(0,s1) - W(0,s2)|^2) by direct quadrature."""
    if s1 == s2:
        return 0.0
    lo1, hi1, pk1 = _lambda_window(d, w, s1)
    lo2, hi2, pk2 = _lambda_window(d, w, s2)

    def f(lam):
        return abs(eval_psi_hat(w, s1 * lam) - eval_psi_hat(w, s2 * lam)) ** 2 * d.pdf(lam)

    v, _ = _log_quad(f, min(lo1, lo2), max(hi1, hi2), np.sqrt(pk1 * pk2))
    return float(np.sqrt(max(v, 0.0)))


def mean_abs_W(d: SpectralDensity, w: WaveletSpec, s: float) -> float:
    """E|W_Phi(t,s)| for the circular Gaussian: (sqrt(pi)/2) * sqrt(moment)."""
    return 0.5 * np.sqrt(np.pi) * np.sqrt(spectral_moment(d, w, s, "W"))


# ----------------------------------------------------------------------------
# Cell discretization and synthesis
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class CellGrid:
    edges: np.ndarray
    masses: np.ndarray
    freqs: np.ndarray
    deficit: float  # Var(Phi(0)) - 2 * sum(masses)

    @property
    def n_cells(self) -> int:
        return len(self.masses)


def truncation_frequency(d: SpectralDensity, tail: float = TAIL_FRACTION) -> float:
    """lam_max with envelope tail C1 lam^-gamma / gamma below tail * Var."""
    if d.kind == "tabulated":
        return float(d.knots[-1])
    if d.scale == 0:
        return 1.0 / d.tau
    g = d.gamma
    return float((_c1(d) / (g * tail * d.variance)) ** (1.0 / g))


def density_grid(d: SpectralDensity, lambda_max: float | None = None, n_cells: int | None = None,
                 ratio: float = CELL_RATIO, lambda_min: float = LAMBDA_MIN) -> CellGrid:
    """Partition (0, lambda_max] into geometric cells with exact masses.

    The first cell is ``[0, lambda_min]``. When ``n_cells`` is given the
    geometric ratio is chosen to produce exactly that many cells; otherwise
    ``ratio`` fixes the refinement.
    """
    if lambda_max is None:
        lambda_max = truncation_frequency(d)
    if lambda_max <= 0:
        raise ValueError("lambda_max must be positive")
    if d.kind == "tabulated" and d.knots[0] > 0:
        lambda_min = max(lambda_min, float(d.knots[0]))
    lambda_min = min(lambda_min, lambda_max / 2)
    if n_cells is not None:
        if n_cells < 8:
            raise ValueError("need at least 8 cells")
        inner = np.geomspace(lambda_min, lambda_max, n_cells)
    else:
        m = int(np.ceil(np.log(lambda_max / lambda_min) / np.log(ratio)))
        inner = np.geomspace(lambda_min, lambda_max, m + 1)
    edges = np.concatenate([[0.0], inner])
    return _cell_grid(d, tuple(edges))


@lru_cache(maxsize=64)
def _cell_grid(d: SpectralDensity, edges: tuple) -> CellGrid:
    e = np.asarray(edges)
    masses = np.empty(len(e) - 1)
    if d.kind == "tabulated":
        for j, (a, b) in enumerate(zip(e[:-1], e[1:])):
            masses[j] = _tab_mass(d, a, b)
    else:
        c, alpha = _low_power_law(d, e[1])
        masses[0] = c * e[1] ** (alpha + 1) / (alpha + 1) if alpha > -1 else np.inf
        for j in range(1, len(e) - 1):
            a, b = e[j], e[j + 1]
            v, err = integrate.quad(lambda u: float(d.pdf(np.exp(u))) * np.exp(u), np.log(a), np.log(b),
                                    epsabs=0, epsrel=1e-10, limit=100)
            if not np.isfinite(v):
                raise NumericalError(f"cell {j} mass did not converge")
            masses[j] = v
    if not np.all(np.isfinite(masses)):
        raise NumericalError("non-finite cell mass (density not integrable at 0)")
    freqs = np.concatenate([[e[1] / 2], np.sqrt(e[1:-1] * e[2:])])
    return CellGrid(edges=e, masses=masses, freqs=freqs, deficit=float(d.variance - 2 * masses.sum()))


@dataclass
class NoisePath:
    samples: np.ndarray
    fs: float
    seed: int
    density: SpectralDensity
    deficit: float = 0.0

    @property
    def t(self) -> np.ndarray:
        return np.arange(len(self.samples)) / self.fs


def synthesize_path(d: SpectralDensity, n: int, fs: float, seed: int,
                    cells: CellGrid | None = None, t0: float = 0.0) -> NoisePath:
    """Phi(t_k) = sum_j 2 Re(exp(i t_k lam_j) sqrt(m_j) Z_j)."""
    if n < 2:
        raise ValueError("need at least two samples")
    cells = density_grid(d) if cells is None else cells
    z = cell_normals(seed, cells.n_cells) * np.sqrt(cells.masses)
    t = t0 + np.arange(n) / fs
    out = np.empty(n)
    chunk = max(1, 2_000_000 // cells.n_cells)
    zr, zi = 2 * z.real, 2 * z.imag
    for i in range(0, n, chunk):
        ph = np.outer(t[i:i + chunk], cells.freqs)
        out[i:i + chunk] = np.cos(ph) @ zr - np.sin(ph) @ zi
    return NoisePath(samples=out, fs=fs, seed=seed, density=d, deficit=cells.deficit)


@lru_cache(maxsize=64)
def _column_operator(d: SpectralDensity, w: WaveletSpec, t: float, scales: tuple, channel: str,
                     edges: tuple) -> tuple[np.ndarray, np.ndarray | None]:
    cells = _cell_grid(d, edges)
    lam = cells.freqs
    s = np.asarray(scales)[:, None]
    if channel == "W":
        kern = np.conj(eval_psi_hat(w, s * lam))
    elif channel == "dW":
        kern = lam * np.conj(eval_dpsi_hat(w, s * lam))
    else:
        kern = lam**2 * np.conj(eval_d2psi_hat(w, s * lam))
    amp = np.sqrt(cells.masses)
    op = kern * (np.exp(1j * t * lam) * amp)
    leak = None
    if w.leak:
        # response of a non-analytic wavelet to the negative-frequency half
        leak = w.leak * kern * (np.exp(-1j * t * lam) * amp)
    return op, leak


def awt_columns(d: SpectralDensity, w: WaveletSpec, t: float, scales, seeds,
                channels=("W",), cells: CellGrid | None = None) -> dict[str, np.ndarray]:
    """Independent realizations of W_Phi(t, .) over a scale grid.

    One row per seed. All channels of one row share the same cell weights, so
    cross-scale and cross-channel covariances are exact for the discretized
    measure.
    """
    scales = np.asarray(scales, dtype=float)
    if np.any(scales <= 0) or np.any(np.diff(scales) <= 0):
        raise ValueError("scales must be positive and ascending")
    cells = density_grid(d) if cells is None else cells
    seeds = list(seeds)
    zs = np.stack([cell_normals(sd, cells.n_cells) for sd in seeds]) if seeds else \
        np.zeros((0, cells.n_cells), complex)
    out = {}
    for ch in channels:
        op, leak = _column_operator(d, w, float(t), tuple(scales), ch, tuple(cells.edges))
        val = zs @ op.T
        if leak is not None:
            val = val + np.conj(zs) @ leak.T
        out[ch] = val
    return out


def awt_column(d: SpectralDensity, w: WaveletSpec, t: float, scales, seed: int,
               channel: str = "W", cells: CellGrid | None = None) -> np.ndarray:
    """One realization of W_Phi(t, .) from the spectral representation."""
    return awt_columns(d, w, t, scales, [seed], (channel,), cells)[channel][0]


# ----------------------------------------------------------------------------
# config
# ----------------------------------------------------------------------------

def density_from_dict(cfg: dict) -> SpectralDensity:
    kind = cfg.get("kind", "linnik").lower()
    if kind == "linnik":
        return linnik(cfg.get("gamma", 1.0), cfg.get("H", 1.0), cfg.get("scale", 1.0),
                      cfg.get("tau", 1.0), cfg.get("c1"))
    if kind == "tabulated":
        return tabulated(cfg["knots"], cfg["values"], cfg.get("c1"))
    raise ValueError(f"unknown density kind {kind!r}")


def density_to_dict(d: SpectralDensity) -> dict:
    if d.kind == "linnik":
        out = {"kind": "linnik", "gamma": d.gamma, "H": d.H, "scale": d.scale, "tau": d.tau}
    else:
        out = {"kind": "tabulated", "knots": list(d.knots), "values": list(d.values)}
    if d.c1_bound is not None:
        out["c1"] = d.c1_bound
    return out
