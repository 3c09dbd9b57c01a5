"""Seeded random streams and chunked Monte Carlo execution.

Every Monte Carlo estimator in the package draws its randomness from
``stream(seed, *key)``.  Work is cut into fixed-size chunks and chunk ``k``
always uses the stream keyed by ``k``, so results depend on the seed only and
not on how many workers process the chunks.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class MCConfig:
    """Sampling budget and seed of a Monte Carlo estimate.

    Parameters
    ----------
    seed : int
        Root seed; required.
    n_samples : int
        Number of samples (points, walkers or start points).
    workers : int
        Number of worker processes.  Results do not depend on it.
    chunk_size : int
        Samples per independently seeded chunk.
    """

    seed: int
    n_samples: int = 1_000_000
    workers: int = 1
    chunk_size: int = 1 << 16

    def __post_init__(self):
        if self.seed is None or not isinstance(self.seed, (int, np.integer)):
            raise ValueError("MCConfig.seed must be an integer")
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        if self.workers < 1 or self.chunk_size < 1:
            raise ValueError("workers and chunk_size must be positive")

    def with_samples(self, n_samples: int) -> "MCConfig":
        return MCConfig(self.seed, int(n_samples), self.workers, self.chunk_size)

    def chunks(self) -> list[int]:
        full, rest = divmod(self.n_samples, self.chunk_size)
        return [self.chunk_size] * full + ([rest] if rest else [])


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, key...)`` (counter-based splitting)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def map_chunks(fn: Callable, args: Sequence[tuple], workers: int = 1) -> list:
    """Apply ``fn(*a)`` to every tuple in ``args``, optionally in processes.

    ``fn`` must be a module-level function when ``workers > 1``.
    """
    if workers <= 1 or len(args) <= 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *a) for a in args]
        return [f.result() for f in futures]


def mean_stderr(values: np.ndarray) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    n = values.size
    if n < 2:
        return float(values.mean()), math.inf
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(n))


def binomial_stderr(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def unit_vectors(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    g = rng.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def uniform_ball(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """``n`` points uniform in the unit ball of R^d."""
    return unit_vectors(rng, n, d) * rng.random(n)[:, None] ** (1.0 / d)
