"""Seed derivation and an order-preserving map over Monte Carlo realizations."""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ProcessPoolExecutor

import numpy as np

WORKERS_ENV = "IDS_LAB_WORKERS"


def stream_id(name: str) -> int:
    return zlib.crc32(name.encode())


def derive_seeds(master: int, stream: str, count: int, *extra: int) -> list:
    """``count`` 64-bit seeds that depend only on (master, stream, extra, index)."""
    base = [int(master) & ((1 << 64) - 1), stream_id(stream), *map(int, extra)]
    return [
        int(np.random.SeedSequence(base + [k]).generate_state(1, np.uint64)[0])
        for k in range(count)
    ]


def resolve_workers(flag=None, configured=None) -> int:
    if flag is not None:
        return max(1, int(flag))
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, int(configured or 1))


def pmap(fn, items, workers: int = 1) -> list:
    """``list(map(fn, items))``, optionally across processes; order is preserved."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))
