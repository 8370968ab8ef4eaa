"""Deterministic chunked random streams.

Every Monte Carlo draw in the package goes through :func:`draw`.  A request
for ``count`` rows is split into chunks of ``CHUNK_SIZE`` rows; chunk ``i`` is
generated by a PCG64 stream seeded with ``SeedSequence(seed, spawn_key=(label,
i))``.  The output is therefore a pure function of ``(seed, label, count)``
and does not depend on how many worker threads produced it.
"""
from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

CHUNK_SIZE = 1 << 16


def label_key(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


def chunk_generator(seed: int, label: str, chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(label_key(label), int(chunk)))
    return np.random.default_rng(ss)


def draw(
    seed: int,
    label: str,
    count: int,
    fn: Callable[[np.random.Generator, int], np.ndarray],
    workers: int = 1,
) -> np.ndarray:
    """Concatenate ``fn(rng_i, size_i)`` over the chunks covering ``count`` rows."""
    count = int(count)
    if count < 0:
        raise ValueError("count must be nonnegative")
    sizes = [CHUNK_SIZE] * (count // CHUNK_SIZE)
    if count % CHUNK_SIZE:
        sizes.append(count % CHUNK_SIZE)

    def one(i: int) -> np.ndarray:
        return fn(chunk_generator(seed, label, i), sizes[i])

    if not sizes:
        return fn(chunk_generator(seed, label, 0), 0)
    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, range(len(sizes))))
    else:
        parts = [one(i) for i in range(len(sizes))]
    return np.concatenate(parts, axis=0)


def standard_normal(seed: int, label: str, count: int, dim: int, workers: int = 1) -> np.ndarray:
    return draw(seed, label, count, lambda rng, m: rng.standard_normal((m, dim)), workers)
