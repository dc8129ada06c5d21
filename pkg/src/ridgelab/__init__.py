"""Wavelet ridge analysis of signals observed in stationary Gaussian noise."""

from .noise import SpectralDensity, linnik, tabulated
from .ridge import BandSpec, RidgeTrack, ridge_argmax, ridge_penalized_dp
from .signals import AhmSignal
from .transform import AwtField, ScalogramField, TimeScaleGrid, awt_forward, scalogram
from .wavelets import WaveletSpec, klauder, morse

__version__ = "0.1.0"

__all__ = [
    "AhmSignal",
    "AwtField",
    "BandSpec",
    "RidgeTrack",
    "ScalogramField",
    "SpectralDensity",
    "TimeScaleGrid",
    "WaveletSpec",
    "awt_forward",
    "klauder",
    "linnik",
    "morse",
    "ridge_argmax",
    "ridge_penalized_dp",
    "scalogram",
    "tabulated",
]
