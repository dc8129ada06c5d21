"""Static figures written next to the CSV outputs."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams["svg.hashsalt"] = "ridgelab"

__all__ = ["save", "snr_scatter", "snr_boxes", "paired_boxes", "epsilon_ladder", "histogram", "heatmap"]


def save(fig, path) -> Path:
    path = Path(path)
    meta = {"Date": None} if path.suffix == ".svg" else {}
    fig.savefig(path, metadata=meta, bbox_inches="tight")
    plt.close(fig)
    return path


def snr_scatter(path, snr, delta, delta_tilde):
    fig, ax = plt.subplots(1, 2, figsize=(9, 3.5))
    ax[0].scatter(snr, delta, s=6, alpha=0.6)
    ax[0].set_xlabel("SNR (dB)")
    ax[0].set_ylabel("ridge deviation (scale)")
    ax[1].scatter(snr, delta_tilde, s=6, alpha=0.6, color="C1")
    ax[1].set_xlabel("SNR (dB)")
    ax[1].set_ylabel("ridge deviation (Hz)")
    fig.tight_layout()
    return save(fig, path)


def snr_boxes(path, groups: dict):
    keys = sorted(groups)
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.boxplot([groups[k] for k in keys], positions=range(len(keys)))
    ax.set_xticks(range(len(keys)), [f"{k:g}" for k in keys], rotation=45)
    ax.set_xlabel("target SNR (dB)")
    ax.set_ylabel("ridge deviation (scale)")
    fig.tight_layout()
    return save(fig, path)


def paired_boxes(path, a, b, labels=("argmax", "penalized")):
    fig, ax = plt.subplots(figsize=(4, 3.5))
    ax.boxplot([a, b])
    ax.set_xticks([1, 2], list(labels))
    ax.set_ylabel("ridge deviation (scale)")
    fig.tight_layout()
    return save(fig, path)


def epsilon_ladder(path, eps, bound, empirical, se):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    eps = np.asarray(eps, dtype=float)
    b = np.array([np.nan if v is None else v for v in bound], dtype=float)
    ax.plot(eps, b, "o-", label="upper bound")
    ax.errorbar(eps, empirical, yerr=3 * np.asarray(se, dtype=float), fmt="s", label="empirical ± 3 SE")
    ax.set_xlabel("epsilon (scale)")
    ax.set_ylabel("conditional exceedance probability")
    ax.legend()
    fig.tight_layout()
    return save(fig, path)


def histogram(path, edges, counts, xlabel="d2S/ds2 at the ridge"):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.stairs(counts, edges, fill=True)
    ax.axvline(0.0, color="k", lw=0.8)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    fig.tight_layout()
    return save(fig, path)


def heatmap(path, times, scales, S, ridge_scales=None):
    fig, ax = plt.subplots(figsize=(8, 4))
    mesh = ax.pcolormesh(times, scales, S, shading="nearest", cmap="magma", rasterized=True)
    if ridge_scales is not None:
        ax.plot(times, ridge_scales, color="cyan", lw=0.8)
    ax.set_yscale("log")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("scale")
    fig.colorbar(mesh, ax=ax, label="scalogram")
    fig.tight_layout()
    return save(fig, path)
