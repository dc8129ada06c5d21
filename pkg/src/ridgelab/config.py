"""Experiment configuration: one JSON document, defaults filled in."""
from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .noise import SpectralDensity, density_from_dict, density_to_dict
from .ridge import BandSpec
from .signals import AhmSignal, signal_from_dict, signal_to_dict
from .transform import TimeScaleGrid
from .wavelets import WaveletSpec, wavelet_from_dict, wavelet_to_dict

__all__ = ["ConfigError", "ExperimentConfig", "DEFAULTS", "load_config", "SEED_ENV"]

SEED_ENV = "RIDGELAB_SEED"


class ConfigError(ValueError):
    pass


DEFAULTS: dict = {
    "signal": {"components": [{"amp": {"const": 1.0}, "phase": {"tone_hz": 10.0}}],
               "t0": 0.0, "t1": 10.0, "fs": 100.0},
    "density": {"kind": "linnik", "gamma": 1.0, "H": 2.0, "scale": 1.0, "tau": 1.0},
    "wavelet": {"family": "morse", "beta1": 9.0, "beta2": 3.0, "peak_hz": 80.0, "norm": "peak"},
    "grid": {"s_min": 4.0, "s_max": 32.0, "voices": 64},
    "trials": None,
    "base_seed": 0,
    "snr_targets": [float(x) for x in np.linspace(-15.0, 10.0, 11)],
    "lambda": 0.1,
    "bands": None,
    "component": 1,
    "output_dir": "ridgelab_out",
    "t_index": None,
    "validate": {"pairs": [[6.0, 8.0], [8.0, 10.0], [8.0, 12.0]],
                 "scales": [5.0, 6.5, 8.0, 11.0, 16.0],
                 "variance_samples": 100000, "holder_pairs": 100},
    "snr_sweep": {},
    "ridge_compare": {"snr_db": -5.0},
    "bounds": {"snr_db": 10.0, "interval_bins": 10, "band": None, "epsilons": None,
               "mc_trials": 10000, "analytic_mu": False},
    "histogram": {"snr_db": 0.0, "tol": 1e-8, "bins": "auto"},
    "transform": {"input": None, "heatmap": True, "field_csv": False},
}

# per-command default trial counts when the config leaves ``trials`` unset
DEFAULT_TRIALS = {"validate": 10000, "snr-sweep": 200, "ridge-compare": 200, "bounds": 1000,
                  "histogram-d2": 1000, "transform": 1}
FULL_TRIALS = 10000


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k not in ("signal", "density", "wavelet"):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass
class ExperimentConfig:
    signal: AhmSignal
    density: SpectralDensity
    wavelet: WaveletSpec
    grid: TimeScaleGrid
    trials: int
    base_seed: int
    snr_targets: list
    lam: float
    bands: BandSpec | None
    output_dir: Path
    raw: dict = field(repr=False, default_factory=dict)

    def section(self, name: str) -> dict:
        return self.raw.get(name, {})

    @property
    def t_index(self) -> int:
        k = self.raw.get("t_index")
        return self.grid.n_time // 2 if k is None else int(k)

    def materialized(self) -> dict:
        out = copy.deepcopy(self.raw)
        out.update({
            "signal": signal_to_dict(self.signal),
            "density": density_to_dict(self.density),
            "wavelet": wavelet_to_dict(self.wavelet),
            "trials": self.trials,
            "base_seed": self.base_seed,
            "snr_targets": list(self.snr_targets),
            "lambda": self.lam,
            "output_dir": str(self.output_dir),
        })
        return out

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.materialized(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_dict(cls, cfg: dict, command: str = "snr-sweep", overrides: dict | None = None,
                  env=None) -> "ExperimentConfig":
        raw = _merge(DEFAULTS, cfg)
        for k, v in (overrides or {}).items():
            if v is not None:
                raw[k] = v
        env = os.environ if env is None else env
        if env.get(SEED_ENV):
            try:
                raw["base_seed"] = int(env[SEED_ENV])
            except ValueError as exc:
                raise ConfigError(f"{SEED_ENV} must be an integer") from exc
        try:
            sig = signal_from_dict(raw["signal"])
            dens = density_from_dict(raw["density"])
            wav = wavelet_from_dict(raw["wavelet"])
            g = raw["grid"]
            grid = TimeScaleGrid.from_span(sig.t0, sig.fs, sig.n, float(g["s_min"]), float(g["s_max"]),
                                           int(g.get("voices", 64)))
            bands = None
            if raw.get("bands"):
                bands = BandSpec.constant([tuple(b) for b in raw["bands"]])
                bands.validate(grid.times)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid configuration: {exc}") from exc
        trials = raw.get("trials")
        if raw.get("full") and trials is None:
            trials = FULL_TRIALS
        trials = DEFAULT_TRIALS.get(command, 200) if trials is None else int(trials)
        if trials < 1:
            raise ConfigError("trials must be at least 1")
        targets = [float(x) for x in raw.get("snr_targets") or []]
        lam = float(raw.get("lambda", 0.1))
        if lam < 0:
            raise ConfigError("lambda must be nonnegative")
        raw["trials"] = trials
        return cls(sig, dens, wav, grid, trials, int(raw["base_seed"]), targets, lam, bands,
                   Path(raw.get("output_dir") or "ridgelab_out"), raw)


def load_config(path, command: str = "snr-sweep", overrides: dict | None = None, env=None) -> ExperimentConfig:
    try:
        cfg = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return ExperimentConfig.from_dict(cfg, command, overrides, env)
