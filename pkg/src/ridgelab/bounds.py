"""Probabilistic ridge-deviation bounds and the constants they depend on.

Quadrature supplies every second-moment quantity; expectations of maxima over
scale sets are estimated by Monte Carlo over independent noise columns (or,
on request, replaced by the analytic Dudley bound, which is conservative).
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from functools import cached_property

import numpy as np
from scipy import optimize

from .noise import (CellGrid, SpectralDensity, awt_columns, covariance_at, density_grid,
                    increment_distance, mean_abs_W, spectral_moment, trial_seed)
from .transform import TimeScaleGrid, awt_forward
from .wavelets import WaveletSpec, verify_admissibility

__all__ = [
    "ConfigurationError",
    "InsufficientTrialsError",
    "BoundaryError",
    "BoundContext",
    "BoundReport",
    "Theorem58Report",
    "DudleyConstants",
    "DeviationBoundInputs",
    "clean_context",
    "delta_I",
    "mu_sigma_I",
    "theorem55_lower_bound",
    "corollary56_lower_bound",
    "inflection_interval",
    "deviation_inputs",
    "theorem58_upper_bound",
    "dudley_constants",
    "holder_constant",
    "holder_check",
    "empirical_in_interval",
    "empirical_exceedance",
]

log = logging.getLogger(__name__)

# estimation columns use a seed stream disjoint from verification trials
ESTIMATION_STREAM = 1 << 40
MC_CHUNK = 1000


class ConfigurationError(ValueError):
    pass


class InsufficientTrialsError(ValueError):
    pass


class BoundaryError(ValueError):
    pass


@dataclass
class BoundContext:
    """Clean-signal column at a fixed time plus the noise model."""

    wavelet: WaveletSpec
    density: SpectralDensity
    scales: np.ndarray
    Wf: np.ndarray
    dWf: np.ndarray
    d2Wf: np.ndarray
    t: float = 0.0
    mc_trials: int = 10_000
    base_seed: int = 0
    cells: CellGrid | None = None

    def __post_init__(self):
        self.scales = np.asarray(self.scales, dtype=float)
        if self.cells is None:
            self.cells = density_grid(self.density)

    @cached_property
    def moments(self) -> np.ndarray:
        """E|W_Phi(t,s)|^2 at every grid scale (quadrature)."""
        return np.array([spectral_moment(self.density, self.wavelet, s, "W") for s in self.scales])

    @cached_property
    def d_moments(self) -> np.ndarray:
        """E|dW_Phi/ds(t,s)|^2 at every grid scale (quadrature)."""
        return np.array([spectral_moment(self.density, self.wavelet, s, "dW") for s in self.scales])

    @property
    def Sf(self) -> np.ndarray:
        return np.abs(self.Wf) ** 2

    @property
    def d2Sf(self) -> np.ndarray:
        return 2 * np.abs(self.dWf) ** 2 + 2 * np.real(np.conj(self.Wf) * self.d2Wf)

    @property
    def ridge_index(self) -> int:
        return int(np.argmax(np.abs(self.Wf)))

    def noise_columns(self, n: int, channels=("W",), stream: int = ESTIMATION_STREAM, start: int = 0):
        """Yield chunks of independent noise columns (dict channel -> [k, n_scale])."""
        for lo in range(start, start + n, MC_CHUNK):
            hi = min(lo + MC_CHUNK, start + n)
            seeds = [trial_seed(self.base_seed, stream + i) for i in range(lo, hi)]
            yield awt_columns(self.density, self.wavelet, self.t, self.scales, seeds, channels, self.cells)


def clean_context(x_clean, fs: float, wavelet: WaveletSpec, density: SpectralDensity,
                  grid: TimeScaleGrid, t_index: int, **kw) -> BoundContext:
    """Run the transform on the noise-free signal and keep one time column."""
    F = awt_forward(x_clean, fs, wavelet, grid, ("W", "dW", "d2W"))
    return BoundContext(wavelet, density, grid.scales, F.W[:, t_index].copy(), F.dW_ds[:, t_index].copy(),
                        F.d2W_ds2[:, t_index].copy(), t=float(grid.times[t_index]), **kw)


@dataclass
class BoundReport:
    delta: float
    mu: float
    sigma: float
    lower_bound: float | None
    applicable: bool
    mu_stderr: float = 0.0
    mu_method: str = "mc"

    def records(self, name: str = "theorem55") -> list[dict]:
        out = [
            {"quantity": f"{name}.delta", "value": self.delta, "method": "quadrature", "applicable": self.applicable},
            {"quantity": f"{name}.mu", "value": self.mu, "method": self.mu_method, "stderr": self.mu_stderr,
             "applicable": self.applicable},
            {"quantity": f"{name}.sigma", "value": self.sigma, "method": "quadrature",
             "applicable": self.applicable},
        ]
        if self.lower_bound is not None:
            out.append({"quantity": f"{name}.lower_bound", "value": self.lower_bound, "method": self.mu_method,
                        "applicable": self.applicable})
        return out


def _interval_mask(scales, interval) -> np.ndarray:
    a, b = interval
    return (scales >= a) & (scales <= b)


def _peak_in(ctx: BoundContext, mask: np.ndarray) -> int:
    idx = np.nonzero(mask)[0]
    return int(idx[np.argmax(np.abs(ctx.Wf[idx]))])


def delta_I(ctx: BoundContext, interval, region=None) -> float:
    """Clean peak minus best clean value on the complement of ``interval``.

    ``region`` restricts the ambient set (a band); default is the whole grid.
    The maximum over an empty complement is 0.
    """
    sc = ctx.scales
    amb = np.ones_like(sc, dtype=bool) if region is None else _interval_mask(sc, region)
    inside = _interval_mask(sc, interval) & amb
    pk = _peak_in(ctx, amb)
    if not inside[pk]:
        raise ValueError("the clean ridge scale must lie inside the interval")
    comp = amb & ~inside
    mag = np.abs(ctx.Wf)
    outside = float(mag[comp].max()) if comp.any() else 0.0
    return float(mag[pk] - outside)


def _expected_max(ctx: BoundContext, mask: np.ndarray, weight=None, channel="W") -> tuple[float, float]:
    """Monte Carlo E[max_{mask} weight*|channel|] with its standard error."""
    if not mask.any():
        return 0.0, 0.0
    vals = []
    for chunk in ctx.noise_columns(ctx.mc_trials, (channel,)):
        a = np.abs(chunk[channel][:, mask])
        if weight is not None:
            a = a * weight[mask][None, :]
        vals.append(a.max(axis=1))
    v = np.concatenate(vals)
    return float(np.mean(v)), float(np.std(v, ddof=1) / np.sqrt(len(v)))


def mu_sigma_I(ctx: BoundContext, interval, region=None, complement_mask=None,
               analytic_mu: bool = False, dudley: "DudleyConstants | None" = None):
    """(mu_I, sigma_I, stderr of mu_I) for the interval's complement."""
    if ctx.mc_trials < 100 and not analytic_mu:
        raise InsufficientTrialsError("need at least 100 Monte Carlo trials")
    sc = ctx.scales
    amb = np.ones_like(sc, dtype=bool) if region is None else _interval_mask(sc, region)
    pk = _peak_in(ctx, amb)
    if complement_mask is None:
        complement_mask = amb & ~_interval_mask(sc, interval)
    root = np.sqrt(ctx.moments)
    sigma = float(root[pk] + (root[complement_mask].max() if complement_mask.any() else 0.0))
    base = mean_abs_W(ctx.density, ctx.wavelet, sc[pk])
    if not complement_mask.any():
        return float(base), sigma, 0.0
    if analytic_mu:
        if dudley is None:
            raise ConfigurationError("analytic mu needs Dudley constants")
        return float(base + dudley.sup_bound), sigma, 0.0
    em, se = _expected_max(ctx, complement_mask)
    return float(base + em), sigma, se


def _lower(delta, mu, sigma) -> tuple[float | None, bool]:
    if delta > mu and sigma > 0:
        return 1.0 - math.exp(-((delta - mu) ** 2) / sigma**2), True
    return None, False


def theorem55_lower_bound(ctx: BoundContext, interval, analytic_mu: bool = False,
                          dudley: "DudleyConstants | None" = None) -> BoundReport:
    """Lower bound on P(s_Y(t) in I): 1 - exp(-(Delta_I - mu_I)^2 / sigma_I^2) when Delta_I > mu_I."""
    delta = delta_I(ctx, interval)
    mu, sigma, se = mu_sigma_I(ctx, interval, analytic_mu=analytic_mu, dudley=dudley)
    lb, ok = _lower(delta, mu, sigma)
    return BoundReport(delta, mu, sigma, lb, ok, se, "dudley" if analytic_mu else "mc")


def _band_endpoints(scales, band) -> np.ndarray:
    m = _interval_mask(scales, band)
    idx = np.nonzero(m)[0]
    if len(idx) < 3:
        raise ValueError("band must contain at least three grid scales")
    ends = np.zeros_like(m)
    ends[idx[0]] = ends[idx[-1]] = True
    return ends


def corollary56_lower_bound(ctx: BoundContext, band, interval=None, analytic_mu: bool = False,
                            dudley: "DudleyConstants | None" = None) -> BoundReport:
    """Band-restricted version. ``interval=None`` means the open band interior,
    whose relative complement is the pair of band endpoints."""
    sc = ctx.scales
    amb = _interval_mask(sc, band)
    if interval is None:
        comp = _band_endpoints(sc, band)
        pk = _peak_in(ctx, amb)
        if comp[pk]:
            raise ValueError("clean ridge sits on a band endpoint")
        mag = np.abs(ctx.Wf)
        delta = float(mag[pk] - mag[comp].max())
    else:
        a, b = interval
        if a < band[0] or b > band[1]:
            raise ValueError("interval must lie inside the band")
        delta = delta_I(ctx, interval, region=band)
        comp = amb & ~_interval_mask(sc, interval)
    mu, sigma, se = mu_sigma_I(ctx, interval or band, region=band, complement_mask=comp,
                               analytic_mu=analytic_mu, dudley=dudley)
    lb, ok = _lower(delta, mu, sigma)
    return BoundReport(delta, mu, sigma, lb, ok, se, "dudley" if analytic_mu else "mc")


def inflection_interval(d2S, scales, peak_index: int, S=None) -> tuple[float, float]:
    """Nearest sign changes of d2S/ds2 below and above the peak, interpolated."""
    d2 = np.asarray(d2S, dtype=float)
    sc = np.asarray(scales, dtype=float)
    if S is not None:
        Sv = np.asarray(S)
        k = peak_index
        if not (0 < k < len(Sv) - 1 and Sv[k] >= Sv[k - 1] and Sv[k] >= Sv[k + 1]):
            raise BoundaryError("peak index is not a local maximum")
    if d2[peak_index] >= 0:
        raise BoundaryError("curvature at the peak is not negative")

    def crossing(i, j):
        f = d2[i] / (d2[i] - d2[j])
        return sc[i] + f * (sc[j] - sc[i])

    lo = hi = None
    for i in range(peak_index, 0, -1):
        if d2[i - 1] >= 0 > d2[i]:
            lo = crossing(i, i - 1)
            break
    for i in range(peak_index, len(d2) - 1):
        if d2[i + 1] >= 0 > d2[i]:
            hi = crossing(i, i + 1)
            break
    if lo is None or hi is None:
        raise BoundaryError("no inflection point on one side of the peak")
    return float(lo), float(hi)


@dataclass
class DeviationBoundInputs:
    band: tuple
    s_fm: float
    inflection: tuple
    L: float
    mu: list
    sigma: list
    mu_stderr: list
    eps_floor: float
    eps_ceiling: float
    epsilons: list = field(default_factory=list)


def deviation_inputs(ctx: BoundContext, band, epsilons=None, n_eps: int = 8) -> DeviationBoundInputs:
    """Everything the four-exponential upper bound needs, for one band."""
    if ctx.mc_trials < 100:
        raise InsufficientTrialsError("need at least 100 Monte Carlo trials")
    sc = ctx.scales
    m = _interval_mask(sc, band)
    pk = _peak_in(ctx, m)
    infl = inflection_interval(ctx.d2Sf, sc, pk, ctx.Sf)
    if not (infl[0] < band[0] and band[1] < infl[1]):
        raise BoundaryError(f"band {band} is not inside the inflection interval {infl}")
    L = float(np.min(np.abs(ctx.d2Sf[m])))
    dWf, Wf = np.abs(ctx.dWf), np.abs(ctx.Wf)
    sig = [
        math.sqrt(float(np.max(dWf[m] ** 2 * ctx.moments[m]))),
        math.sqrt(float(np.max(Wf[m] ** 2 * ctx.d_moments[m]))),
        math.sqrt(float(np.max(ctx.moments[m]))),
        math.sqrt(float(np.max(ctx.d_moments[m]))),
    ]
    acc = [[] for _ in range(4)]
    for chunk in ctx.noise_columns(ctx.mc_trials, ("W", "dW")):
        W, dW = np.abs(chunk["W"][:, m]), np.abs(chunk["dW"][:, m])
        acc[0].append((dWf[m][None, :] * W).max(axis=1))
        acc[1].append((Wf[m][None, :] * dW).max(axis=1))
        acc[2].append(W.max(axis=1))
        acc[3].append(dW.max(axis=1))
    vals = [np.concatenate(a) for a in acc]
    mu = [float(np.mean(v)) for v in vals]
    se = [float(np.std(v, ddof=1) / np.sqrt(len(v))) for v in vals]
    s_fm = float(sc[pk])
    floor = 6.0 / L * max(mu[0], mu[1], mu[2] ** 2, mu[3] ** 2)
    band_pts = sc[m]
    # distance from the clean ridge to the nearest band endpoint
    ceiling = float(min(s_fm - band_pts[0], band_pts[-1] - s_fm))
    if epsilons is None:
        epsilons = list(np.linspace(floor, ceiling, n_eps + 2)[1:-1]) if ceiling > floor else []
    return DeviationBoundInputs(tuple(band), s_fm, infl, L, mu, sig, se, floor, ceiling, list(epsilons))


@dataclass
class Theorem58Report:
    epsilons: list
    bounds: list
    raw: list
    prefactor_report: BoundReport
    admissible: list
    diagnostic: str = ""

    @property
    def applicable(self) -> bool:
        return self.prefactor_report.applicable


def _four_exp(inp: DeviationBoundInputs, eps: float) -> float:
    L = inp.L
    tot = 0.0
    for k in (0, 1):
        s2 = inp.sigma[k] ** 2
        tot += math.exp(-(L**2 / s2) * (eps / 6 - inp.mu[k] / L) ** 2) if s2 > 0 else 0.0
    for k in (2, 3):
        s2 = inp.sigma[k] ** 2
        tot += math.exp(-(L / s2) * (math.sqrt(eps / 6) - inp.mu[k] / math.sqrt(L)) ** 2) if s2 > 0 else 0.0
    return tot


def theorem58_upper_bound(inp: DeviationBoundInputs, ctx: BoundContext) -> Theorem58Report:
    """Upper bound on P(|s_Y,m - s_f,m| > eps | s_Y,m in band interior), per eps."""
    pre = corollary56_lower_bound(ctx, inp.band)
    adm = [inp.eps_floor < e < inp.eps_ceiling for e in inp.epsilons]
    if not pre.applicable:
        return Theorem58Report(list(inp.epsilons), [None] * len(adm), [None] * len(adm), pre, adm,
                               "prefactor inapplicable: Delta <= mu on the band interior")
    factor = 1.0 / pre.lower_bound
    raw, out = [], []
    for e, ok in zip(inp.epsilons, adm):
        if not ok:
            raw.append(None)
            out.append(None)
            continue
        r = factor * _four_exp(inp, e)
        raw.append(r)
        out.append(min(r, 1.0))
    diag = "" if any(adm) else (
        f"no admissible epsilon: floor {inp.eps_floor:.4g} >= ceiling {inp.eps_ceiling:.4g}")
    return Theorem58Report(list(inp.epsilons), out, raw, pre, adm, diag)


# ----------------------------------------------------------------------------
# verification by simulation
# ----------------------------------------------------------------------------

def _noisy_columns(ctx: BoundContext, n: int, channels=("W",)):
    for chunk in ctx.noise_columns(n, channels, stream=0):
        yield {ch: chunk[ch] + {"W": ctx.Wf, "dW": ctx.dWf, "d2W": ctx.d2Wf}[ch][None, :] for ch in chunk}


def empirical_in_interval(ctx: BoundContext, interval, n: int) -> tuple[float, float]:
    """Frequency of argmax_s |W_Y(t,s)| falling inside ``interval`` and its binomial SE."""
    inside = _interval_mask(ctx.scales, interval)
    hits = 0
    for cols in _noisy_columns(ctx, n):
        hits += int(inside[np.argmax(np.abs(cols["W"]) ** 2, axis=1)].sum())
    p = hits / n
    return p, math.sqrt(max(p * (1 - p), 0.0) / n)


def empirical_exceedance(ctx: BoundContext, inp: DeviationBoundInputs, n: int):
    """Per-eps conditional exceedance frequency given the band-argmax is interior."""
    sc = ctx.scales
    m = _interval_mask(sc, inp.band)
    idx = np.nonzero(m)[0]
    picks = []
    for cols in _noisy_columns(ctx, n):
        S = np.abs(cols["W"][:, idx]) ** 2
        picks.append(np.argmax(S, axis=1))
    pick = np.concatenate(picks)
    interior = (pick > 0) & (pick < len(idx) - 1)
    dev = np.abs(sc[idx][pick] - inp.s_fm)
    n_in = int(interior.sum())
    out = []
    for e in inp.epsilons:
        if n_in == 0:
            out.append((float("nan"), float("nan"), 0))
            continue
        p = float(np.sum(interior & (dev > e)) / n_in)
        out.append((p, math.sqrt(max(p * (1 - p), 0.0) / n_in), n_in))
    return out


# ----------------------------------------------------------------------------
# Dudley constants and Hölder continuity
# ----------------------------------------------------------------------------

@dataclass
class DudleyConstants:
    H_minus: float
    T: float
    C2: float
    Dcal: float
    gamma: float
    C1: float
    sup_bound: float
    psi_sup: float = float("nan")
    psi_lip: float = float("nan")
    variance: float = float("nan")
    T_capped: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def _default_h_minus(d: SpectralDensity) -> float:
    if d.long_range:
        return 0.9 * min(d.H, 1.0)
    return 1.0


def holder_constant(d: SpectralDensity, w: WaveletSpec, gamma: float | None = None):
    """(C2, ||psi_hat||_inf, ||psi_hat||_Lip, Var(Phi(0))) for the Hölder increment bound."""
    if d.c1_bound is None:
        raise ConfigurationError("density has no c1_bound; set one or estimate it first")
    g = d.gamma if gamma is None else gamma
    if not 0 < g < 2:
        raise ConfigurationError("the Hölder constant needs 0 < gamma < 2")
    rep = verify_admissibility(w)
    psi_sup, lip = rep.sup_abs, rep.lipschitz
    var = covariance_at(d, 0.0)
    inner = d.c1_bound * (1 / g + 2 / (2 - g)) * (2 * psi_sup) ** (2 - g) * lip**g + 2 * psi_sup**2 * var
    return max(1.0, math.sqrt(inner)), psi_sup, lip, var


def dudley_constants(d: SpectralDensity, w: WaveletSpec, H_minus: float | None = None,
                     gamma: float | None = None, t_domain=(1.0, 1e6)) -> DudleyConstants:
    g = d.gamma if gamma is None else gamma
    hm = _default_h_minus(d) if H_minus is None else float(H_minus)
    if d.long_range and not 0 < hm < d.H:
        raise ConfigurationError("H_minus must lie in (0, H) for long-range noise")
    if not d.long_range and not 0 < hm <= 1:
        raise ConfigurationError("H_minus must lie in (0, 1] for short-range noise")
    C2, psi_sup, lip, var = holder_constant(d, w, g)
    C1 = float(d.c1_bound)

    def neg_root(u):
        return -math.sqrt(spectral_moment(d, w, math.exp(u)))

    # coarse scan to bracket the maximum, then golden-section refinement
    us = np.linspace(math.log(1e-6), math.log(1e8), 113)
    vals = np.array([neg_root(u) for u in us])
    k = int(np.argmin(vals))
    k = min(max(k, 1), len(us) - 2)
    res = optimize.minimize_scalar(neg_root, bracket=(us[k - 1], us[k], us[k + 1]), method="golden",
                                   tol=1e-8)
    sup_root = max(-float(res.fun), -float(vals.min()))
    D = max(2.0, sup_root)

    def ok(s):
        return spectral_moment(d, w, s) <= s ** (-hm)

    lo, hi = t_domain
    grid = np.geomspace(lo, hi, 241)
    flags = np.array([ok(s) for s in grid])
    capped = False
    if flags.all():
        T = lo
    elif not flags[-1]:
        T, capped = hi, True
        log.warning("moment decay threshold T not found below %g; using the domain maximum", hi)
    else:
        last_bad = int(np.nonzero(~flags)[0].max())
        a, b = math.log(grid[last_bad]), math.log(grid[last_bad + 1])
        for _ in range(60):
            mid = 0.5 * (a + b)
            if ok(math.exp(mid)):
                b = mid
            else:
                a = mid
        T = math.exp(b)
    sup_bound = 4 * (math.sqrt(math.log(D)) * D**3 / (D - 1) ** 2 * math.sqrt(1 / g + 1 / hm)
                     + (math.sqrt(math.log(C2) / g) + math.sqrt(math.log(T))) * D**2 / (D - 1))
    return DudleyConstants(hm, T, C2, D, g, C1, sup_bound, psi_sup, lip, var, capped)


def holder_check(d: SpectralDensity, w: WaveletSpec, pairs, C2: float, gamma: float | None = None) -> dict:
    """Compare d_W(s1, s2) with C2 |s1 - s2|^(gamma/2) over the given pairs."""
    g = d.gamma if gamma is None else gamma
    rows = []
    for s1, s2 in pairs:
        if abs(s1 - s2) > 1:
            raise ValueError("Hölder pairs need |s1 - s2| <= 1")
        dist = increment_distance(d, w, s1, s2)
        rhs = C2 * abs(s1 - s2) ** (g / 2)
        rows.append({"s1": float(s1), "s2": float(s2), "distance": dist, "bound": rhs, "violated": dist > rhs})
    return {"C2": C2, "gamma": g, "pairs": rows, "violations": sum(r["violated"] for r in rows)}
