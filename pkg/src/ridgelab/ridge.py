"""Ridge extraction on discretized scalograms and deviation statistics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .transform import MissingChannelError, ScalogramField

__all__ = [
    "BandSpec",
    "BandError",
    "RidgeTrack",
    "InsufficientDataError",
    "ridge_points",
    "ridge_argmax",
    "ridge_band_argmax",
    "ridge_penalized_dp",
    "dp_objective",
    "log_normalized",
    "deviation_metrics",
    "wilcoxon_signed_rank",
]


class BandError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class BandSpec:
    """Scale bands B_m(t) = [lower_m(t), upper_m(t)], piecewise linear in time.

    ``lower`` and ``upper`` hold one ``(times, values)`` table per component,
    component 1 first. Component 1 has the lowest IF, hence the largest scales.
    """

    lower: tuple
    upper: tuple

    @classmethod
    def constant(cls, bands) -> "BandSpec":
        """Time-invariant bands from ``[(lo_1, hi_1), (lo_2, hi_2), ...]``."""
        lo = tuple(((0.0, 1.0), (float(a), float(a))) for a, _ in bands)
        hi = tuple(((0.0, 1.0), (float(b), float(b))) for _, b in bands)
        return cls(lo, hi)

    @property
    def n_components(self) -> int:
        return len(self.lower)

    def at(self, m: int, t) -> tuple[np.ndarray, np.ndarray]:
        if not 1 <= m <= self.n_components:
            raise BandError(f"component {m} not in 1..{self.n_components}")
        (tl, vl), (tu, vu) = self.lower[m - 1], self.upper[m - 1]
        return np.interp(t, tl, vl), np.interp(t, tu, vu)

    def validate(self, t) -> None:
        prev_lo = None
        for m in range(1, self.n_components + 1):
            lo, hi = self.at(m, t)
            if np.any(lo <= 0) or np.any(lo >= hi):
                raise BandError(f"band {m} must satisfy 0 < lower < upper")
            if prev_lo is not None and np.any(hi > prev_lo):
                raise BandError(f"band {m} overlaps band {m - 1}")
            prev_lo = lo


@dataclass
class RidgeTrack:
    scale_index: np.ndarray
    scale_value: np.ndarray
    kind: str
    tie_count: np.ndarray
    param: float | int | None = None

    def __len__(self):
        return len(self.scale_index)


def ridge_points(S: ScalogramField, floor: float = 1e-10) -> list[tuple[int, int]]:
    """Grid points where dS/ds changes sign from + to - with negative curvature.

    The zero of dS/ds is located by linear interpolation between adjacent
    bins; d2S/ds2 is interpolated to the same location and must be negative.
    The reported scale index is the bin nearest that location. Columns whose
    energy is below ``floor`` times the field maximum are skipped, which keeps
    round-off wiggles in numerically empty regions from registering.
    """
    if S.dS_ds is None or S.d2S_ds2 is None:
        raise MissingChannelError("ridge points need the dS and d2S channels")
    d1, d2, E = S.dS_ds, S.d2S_ds2, S.S
    thresh = floor * float(E.max()) if E.size else 0.0
    a, b = d1[:-1], d1[1:]
    cand = (a > 0) & (b <= 0)
    cand &= np.maximum(E[:-1], E[1:]) > thresh
    out = []
    for i, k in zip(*np.nonzero(cand)):
        frac = a[i, k] / (a[i, k] - b[i, k])
        curv = (1 - frac) * d2[i, k] + frac * d2[i + 1, k]
        if curv < 0:
            out.append((int(k), int(i + (frac > 0.5))))
    out.sort()
    return out


def _argmax_track(R: np.ndarray, scales: np.ndarray, kind: str, offset=None, param=None) -> RidgeTrack:
    idx = np.argmax(R, axis=0)
    mx = R[idx, np.arange(R.shape[1])]
    ties = np.sum(R == mx[None, :], axis=0)
    if offset is not None:
        idx = idx + offset
    return RidgeTrack(idx.astype(int), scales[idx], kind, ties.astype(int), param)


def ridge_argmax(S: ScalogramField) -> RidgeTrack:
    """Per-column argmax over scale; ties go to the smallest index."""
    return _argmax_track(S.S, S.grid.scales, "argmax")


def ridge_band_argmax(S: ScalogramField, bands: BandSpec, m: int) -> RidgeTrack:
    """Per-column argmax restricted to [lower_m(t), upper_m(t)]."""
    grid = S.grid
    sc = grid.scales
    lo, hi = bands.at(m, grid.times)
    if np.any(hi < sc[0]) or np.any(lo > sc[-1]):
        raise BandError(f"band {m} lies outside the scale grid")
    tol = 1e-9 * sc
    inside = (sc[:, None] >= lo[None, :] - tol[:, None]) & (sc[:, None] <= hi[None, :] + tol[:, None])
    empty = ~inside.any(axis=0)
    if np.any(empty):
        # band narrower than a bin: take the nearest bin to the band center
        ctr = np.log(np.sqrt(lo[empty] * hi[empty]) / grid.s_min) / grid.log_step
        j = np.clip(np.rint(ctr).astype(int), 0, grid.n_scale - 1)
        inside[j, np.nonzero(empty)[0]] = True
    R = np.where(inside, S.S, -np.inf)
    tr = _argmax_track(R, sc, "band", param=m)
    return tr


def log_normalized(R: np.ndarray) -> np.ndarray:
    """log(R / sum|R|); zero cells get a sentinel below every finite entry."""
    R = np.asarray(R, dtype=float)
    total = np.sum(np.abs(R))
    if total == 0:
        raise ValueError("scalogram is identically zero")
    with np.errstate(divide="ignore"):
        Rt = np.log(R / total)
    finite = np.isfinite(Rt)
    sentinel = np.log(np.finfo(float).eps)
    if np.any(finite):
        sentinel = min(sentinel, float(Rt[finite].min()) - 1.0)
    Rt[~finite] = sentinel
    return Rt


def dp_objective(Rt: np.ndarray, path, lam: float) -> float:
    path = np.asarray(path)
    gain = float(np.sum(Rt[path, np.arange(Rt.shape[1])]))
    return gain - lam * float(np.sum(np.diff(path) ** 2))


def ridge_penalized_dp(S, lam: float = 0.1) -> RidgeTrack:
    """Exact maximizer of sum_j Rt(c_j, j) - lam * sum_j (c_{j+1} - c_j)^2.

    ``S`` is a ScalogramField or a raw [p, n] array. Dynamic programming over
    columns, O(n p^2); ties resolve to the smaller scale index.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if isinstance(S, ScalogramField):
        R, scales = S.S, S.grid.scales
    else:
        R = np.asarray(S, dtype=float)
        scales = np.arange(R.shape[0], dtype=float)
    Rt = log_normalized(R)
    p, n = Rt.shape
    idx = np.arange(p)
    pen = lam * (idx[:, None] - idx[None, :]) ** 2  # [current, previous]
    back = np.empty((n, p), dtype=np.int32)
    V = Rt[:, 0].copy()
    for j in range(1, n):
        M = V[None, :] - pen
        arg = np.argmax(M, axis=1)
        back[j] = arg
        V = Rt[:, j] + M[idx, arg]
    path = np.empty(n, dtype=int)
    path[-1] = int(np.argmax(V))
    for j in range(n - 1, 0, -1):
        path[j - 1] = back[j, path[j]]
    ties = np.ones(n, dtype=int)
    return RidgeTrack(path, scales[path], "penalized", ties, lam)


def deviation_metrics(a: RidgeTrack, b: RidgeTrack, omega_psi: float,
                      valid: slice | None = None) -> tuple[float, float]:
    """(mean |s_a - s_b|, mean |omega/s_a - omega/s_b|) over the valid region."""
    sa = np.asarray(a.scale_value if isinstance(a, RidgeTrack) else a, dtype=float)
    sb = np.asarray(b.scale_value if isinstance(b, RidgeTrack) else b, dtype=float)
    if sa.shape != sb.shape:
        raise ValueError("ridge tracks differ in length")
    if valid is not None:
        sa, sb = sa[valid], sb[valid]
    if np.any(sa <= 0) or np.any(sb <= 0):
        raise ValueError("scale values must be positive")
    return float(np.mean(np.abs(sa - sb))), float(np.mean(np.abs(omega_psi / sa - omega_psi / sb)))


def wilcoxon_signed_rank(x, y, alternative: str = "two_sided") -> tuple[float, float]:
    """Signed-rank statistic W+ of d = x - y and its normal-approximation p-value.

    Zero differences are dropped; tied |d| get average ranks. The variance
    carries the tie correction and the z-score a 0.5 continuity correction.
    ``alternative="greater"`` tests whether d tends to be positive.
    """
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    d = d[d != 0]
    n = len(d)
    if n < 10:
        raise InsufficientDataError(f"only {n} nonzero differences (need >= 10)")
    r = stats.rankdata(np.abs(d))
    w_plus = float(r[d > 0].sum())
    mean = n * (n + 1) / 4.0
    _, counts = np.unique(np.abs(d), return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(counts**3 - counts) / 48.0
    sd = np.sqrt(var)
    diff = w_plus - mean
    if alternative == "greater":
        p = stats.norm.sf((diff - 0.5) / sd)
    elif alternative == "less":
        p = stats.norm.cdf((diff + 0.5) / sd)
    elif alternative in ("two_sided", "two-sided"):
        z = max(abs(diff) - 0.5, 0.0) / sd
        p = min(1.0, 2 * stats.norm.sf(z))
    else:
        raise ValueError(f"unknown alternative {alternative!r}")
    return w_plus, float(p)
