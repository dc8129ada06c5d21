"""Trial-parallel Monte Carlo driver.

Each trial derives its own seed from ``(base_seed, trial_index)`` and results
are collected by index, so the output never depends on the worker count.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

from .noise import trial_seed

T = TypeVar("T")

__all__ = ["run_trials", "pairwise_mean"]


def run_trials(fn: Callable[[int, int], T], n: int, base_seed: int, threads: int = 1) -> list[T]:
    """Evaluate ``fn(trial_index, seed)`` for every trial; results in index order."""
    if threads < 1:
        raise ValueError("threads must be at least 1")
    args = [(i, trial_seed(base_seed, i)) for i in range(n)]
    if threads == 1 or n < 2:
        return [fn(i, s) for i, s in args]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda a: fn(*a), args))


def pairwise_mean(values: Sequence[float]) -> float:
    """Mean via numpy's pairwise summation over the index-ordered values."""
    v = np.asarray(values, dtype=float)
    return float(np.sum(v) / len(v)) if len(v) else float("nan")
