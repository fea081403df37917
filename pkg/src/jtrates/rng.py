"""Reproducible random substreams for Monte Carlo loops.

Paths are simulated in fixed-size blocks.  Block ``b`` draws from a Philox
(counter-based) generator keyed by ``SeedSequence([seed, b])``, so the sample
assigned to a given path index depends only on ``(seed, block_size)`` and never
on how many workers run the blocks or in which order they finish.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator, TypeVar

import numpy as np

DEFAULT_SEED = 20240521
DEFAULT_BLOCK_SIZE = 1 << 16

T = TypeVar("T")


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the stream labelled ``(seed, *key)``."""
    if seed < 0 or any(k < 0 for k in key):
        raise ValueError("seed and stream keys must be non-negative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key])))


def block_bounds(n_paths: int, block_size: int = DEFAULT_BLOCK_SIZE) -> Iterator[tuple[int, int, int]]:
    """Yield ``(block_index, start, stop)`` covering ``range(n_paths)``."""
    if block_size < 1:
        raise ValueError("block_size must be positive")
    for b, start in enumerate(range(0, n_paths, block_size)):
        yield b, start, min(start + block_size, n_paths)


def run_blocks(
    fn: Callable[[np.random.Generator, int], T],
    n_paths: int,
    seed: int,
    *,
    block_size: int = DEFAULT_BLOCK_SIZE,
    workers: int = 1,
) -> list[T]:
    """Evaluate ``fn(rng, n)`` on every block and return results in block order."""
    jobs = [(substream(seed, b), stop - start) for b, start, stop in block_bounds(n_paths, block_size)]
    if workers <= 1 or len(jobs) <= 1:
        return [fn(g, n) for g, n in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def mean_and_stderr(values: np.ndarray) -> tuple[float, float]:
    """Sample mean and standard error ``std / sqrt(n)`` (ddof=1)."""
    values = np.asarray(values, dtype=float)
    n = values.size
    if n < 2:
        raise ValueError("need at least two samples for a standard error")
    mean = float(np.mean(values))
    return mean, float(np.std(values, ddof=1) / np.sqrt(n))
