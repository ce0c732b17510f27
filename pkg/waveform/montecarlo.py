"""
Seeded block-parallel Monte Carlo.

Every block draws from its own generator, seeded by numpy's splittable
``SeedSequence(entropy=master_seed, spawn_key=(stream, block_index))``.
Blocks are split into contiguous chunks and the per-block results are
returned in block order, so any reduction over them is identical for any
number of workers.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np

logger = logging.getLogger(__name__)

DATA_STREAM = 0
CALIBRATION_STREAM = 1


def block_seed(master_seed: int, block_index: int, stream=DATA_STREAM):
    return np.random.SeedSequence(
        entropy=int(master_seed), spawn_key=(int(stream), int(block_index))
    )


def block_rng(master_seed: int, block_index: int, stream=DATA_STREAM):
    return np.random.default_rng(block_seed(master_seed, block_index, stream))


def partition(n_blocks: int, n_chunks: int):
    """Contiguous [start, stop) ranges covering range(n_blocks)."""
    n_chunks = max(1, min(n_chunks, n_blocks))
    bounds = np.linspace(0, n_blocks, n_chunks + 1).round().astype(int)
    return [
        (int(start), int(stop))
        for start, stop in zip(bounds[:-1], bounds[1:])
        if stop > start
    ]


def _run_chunk(block_fn, bounds):
    start, stop = bounds
    return [block_fn(block_index) for block_index in range(start, stop)]


def map_blocks(block_fn, n_blocks: int, workers: int = 1) -> list:
    """
    Evaluate ``block_fn(block_index)`` for every block, in block order.

    ``block_fn`` must be picklable (a module-level function or a
    ``functools.partial`` of one) when ``workers > 1``.
    """
    if n_blocks < 1:
        return []
    workers = max(1, int(workers))
    chunks = partition(n_blocks, workers * 4 if workers > 1 else 1)
    logger.debug(
        "Running %d blocks in %d chunks on %d workers",
        n_blocks, len(chunks), workers,
    )
    if workers == 1:
        return _run_chunk(block_fn, (0, n_blocks))
    with ProcessPoolExecutor(max_workers=workers) as executor:
        chunk_results = executor.map(partial(_run_chunk, block_fn), chunks)
        return [
            block_result
            for chunk_result in chunk_results
            for block_result in chunk_result
        ]
