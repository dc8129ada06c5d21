"""Adaptive harmonic signals ``f(t) = sum_m A_m(t) cos(2 pi phi_m(t))``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = [
    "ModelViolation",
    "Amplitude",
    "Phase",
    "AhmComponent",
    "AhmSignal",
    "sample_signal",
    "check_conditions",
    "snr_db",
    "mix",
    "gain_for_snr",
    "signal_from_dict",
    "signal_to_dict",
]


class ModelViolation(ValueError):
    """Amplitude or instantaneous frequency not positive, or IFs out of order."""


@dataclass(frozen=True)
class Amplitude:
    """A_m(t): ``const`` (a), ``linear`` (a0 + a1 t) or ``table`` (samples on the window grid)."""

    kind: str
    a0: float = 1.0
    a1: float = 0.0
    samples: tuple = ()

    def _spline(self, t0, fs):
        s = np.asarray(self.samples, dtype=float)
        return CubicSpline(t0 + np.arange(len(s)) / fs, s)

    def value(self, t, t0=0.0, fs=1.0):
        t = np.asarray(t, dtype=float)
        if self.kind == "const":
            return np.full_like(t, self.a0)
        if self.kind == "linear":
            return self.a0 + self.a1 * t
        return self._spline(t0, fs)(t)

    def deriv(self, t, t0=0.0, fs=1.0):
        t = np.asarray(t, dtype=float)
        if self.kind == "const":
            return np.zeros_like(t)
        if self.kind == "linear":
            return np.full_like(t, self.a1)
        return self._spline(t0, fs)(t, 1)


@dataclass(frozen=True)
class Phase:
    """phi_m(t) in cycles: ``tone`` (xi t), ``chirp`` (xi0 t + rate t^2 / 2) or ``table``."""

    kind: str
    xi0: float = 1.0
    rate: float = 0.0
    samples: tuple = ()

    def _spline(self, t0, fs):
        s = np.asarray(self.samples, dtype=float)
        return CubicSpline(t0 + np.arange(len(s)) / fs, s)

    def value(self, t, t0=0.0, fs=1.0):
        t = np.asarray(t, dtype=float)
        if self.kind == "tone":
            return self.xi0 * t
        if self.kind == "chirp":
            return self.xi0 * t + 0.5 * self.rate * t**2
        return self._spline(t0, fs)(t)

    def inst_freq(self, t, t0=0.0, fs=1.0):
        t = np.asarray(t, dtype=float)
        if self.kind == "tone":
            return np.full_like(t, self.xi0)
        if self.kind == "chirp":
            return self.xi0 + self.rate * t
        return self._spline(t0, fs)(t, 1)

    def chirp_rate(self, t, t0=0.0, fs=1.0):
        t = np.asarray(t, dtype=float)
        if self.kind == "tone":
            return np.zeros_like(t)
        if self.kind == "chirp":
            return np.full_like(t, self.rate)
        return self._spline(t0, fs)(t, 2)


@dataclass(frozen=True)
class AhmComponent:
    amplitude: Amplitude
    phase: Phase


@dataclass(frozen=True)
class AhmSignal:
    components: tuple
    t0: float = 0.0
    t1: float = 1.0
    fs: float = 100.0

    @property
    def n(self) -> int:
        # endpoint-inclusive on t0, exclusive on t1
        return int(round((self.t1 - self.t0) * self.fs))

    @property
    def t(self) -> np.ndarray:
        return self.t0 + np.arange(self.n) / self.fs

    def inst_freqs(self) -> np.ndarray:
        """phi'_m(t_k) as an [M, n] array."""
        return np.array([c.phase.inst_freq(self.t, self.t0, self.fs) for c in self.components])

    def amplitudes(self) -> np.ndarray:
        return np.array([c.amplitude.value(self.t, self.t0, self.fs) for c in self.components])


def _validate(sig: AhmSignal):
    if sig.n < 1:
        raise ModelViolation("empty analysis window")
    if not sig.components:
        raise ModelViolation("signal has no components")
    if np.any(sig.amplitudes() <= 0):
        raise ModelViolation("amplitude must be positive on the window")
    ifs = sig.inst_freqs()
    if np.any(ifs <= 0):
        raise ModelViolation("instantaneous frequency must be positive on the window")
    return ifs


def sample_signal(sig: AhmSignal) -> np.ndarray:
    _validate(sig)
    t = sig.t
    out = np.zeros(sig.n)
    for c in sig.components:
        out += c.amplitude.value(t, sig.t0, sig.fs) * np.cos(2 * np.pi * c.phase.value(t, sig.t0, sig.fs))
    return out


def check_conditions(sig: AhmSignal) -> tuple[float, float]:
    """(epsilon_est, delta_est) for the slowly-varying and separation conditions.

    ``delta_est`` is 1 for a single component.
    """
    ifs = _validate(sig)
    if len(sig.components) > 1 and np.any(np.diff(ifs, axis=0) <= 0):
        raise ModelViolation("instantaneous frequencies are not strictly ordered")
    t = sig.t
    eps = 0.0
    for c, f1 in zip(sig.components, ifs):
        da = np.abs(c.amplitude.deriv(t, sig.t0, sig.fs))
        d2 = np.abs(c.phase.chirp_rate(t, sig.t0, sig.fs))
        eps = max(eps, float(np.max(np.maximum(da, d2) / f1)))
    if len(sig.components) == 1:
        return eps, 1.0
    delta = float(np.min((ifs[1:] - ifs[:-1]) / (ifs[1:] + ifs[:-1])))
    return eps, delta


def snr_db(f_samples, noise_samples) -> float:
    f = np.asarray(f_samples, dtype=float)
    e = np.asarray(noise_samples, dtype=float)
    if f.shape != e.shape or f.size < 1:
        raise ValueError("signal and noise must have equal nonzero length")
    en = float(np.dot(e, e))
    if en == 0:
        raise ZeroDivisionError("noise is identically zero")
    return 10 * np.log10(float(np.dot(f, f)) / en)


def mix(f_samples, noise_samples, gain: float) -> np.ndarray:
    f = np.asarray(f_samples, dtype=float)
    e = np.asarray(noise_samples, dtype=float)
    if f.shape != e.shape:
        raise ValueError("signal and noise must have equal length")
    return f + gain * e


def gain_for_snr(f_samples, noise_samples, target_db: float) -> float:
    """Noise gain giving ``snr_db(f, gain * noise) == target_db``."""
    nf = np.linalg.norm(f_samples)
    ne = np.linalg.norm(noise_samples)
    if ne == 0:
        raise ZeroDivisionError("noise is identically zero")
    return float(nf / (ne * 10 ** (target_db / 20)))


def _amp_from(d: dict) -> Amplitude:
    if "const" in d:
        return Amplitude("const", a0=float(d["const"]))
    if "linear" in d:
        a0, a1 = d["linear"]
        return Amplitude("linear", a0=float(a0), a1=float(a1))
    if "table" in d:
        return Amplitude("table", samples=tuple(map(float, d["table"])))
    raise ValueError(f"bad amplitude spec {d!r}")


def _phase_from(d: dict) -> Phase:
    if "tone_hz" in d:
        return Phase("tone", xi0=float(d["tone_hz"]))
    if "chirp" in d:
        c = d["chirp"]
        return Phase("chirp", xi0=float(c["xi0"]), rate=float(c["rate"]))
    if "table" in d:
        return Phase("table", samples=tuple(map(float, d["table"])))
    raise ValueError(f"bad phase spec {d!r}")


def signal_from_dict(cfg: dict) -> AhmSignal:
    comps = tuple(AhmComponent(_amp_from(c.get("amp", {"const": 1.0})), _phase_from(c["phase"]))
                  for c in cfg["components"])
    return AhmSignal(comps, float(cfg.get("t0", 0.0)), float(cfg.get("t1", 60.0)), float(cfg.get("fs", 100.0)))


def signal_to_dict(sig: AhmSignal) -> dict:
    comps = []
    for c in sig.components:
        a, p = c.amplitude, c.phase
        amp = {"const": a.a0} if a.kind == "const" else \
            {"linear": [a.a0, a.a1]} if a.kind == "linear" else {"table": list(a.samples)}
        ph = {"tone_hz": p.xi0} if p.kind == "tone" else \
            {"chirp": {"xi0": p.xi0, "rate": p.rate}} if p.kind == "chirp" else {"table": list(p.samples)}
        comps.append({"amp": amp, "phase": ph})
    return {"components": comps, "t0": sig.t0, "t1": sig.t1, "fs": sig.fs}
