"""
Block-parallel path simulation with worker-count independent results.
"""
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Dict, List, Tuple

import numpy as np

from concentration_risk.errors import InvalidParameterError
from concentration_risk.stochastics.streams import RandomStream

# Number of floats a block may allocate per simulated quantity.
CELL_BUDGET = 4_000_000
MIN_BLOCK = 16

BlockFunction = Callable[[int, np.random.Generator], Dict[str, np.ndarray]]

logger = logging.getLogger(__name__)


def block_size_for(cells_per_path: int, configured: int) -> int:
    """
    Paths per block so that one block stays within the cell budget.

    Depends only on the problem size, never on the worker count.

    Args:
        cells_per_path: Array cells allocated per path (e.g. obligors x states)
        configured: Upper bound from settings

    Returns:
        int: Paths per block
    """
    return int(max(MIN_BLOCK, min(configured, CELL_BUDGET // max(cells_per_path, 1))))


def plan_blocks(n_paths: int, block_size: int) -> List[Tuple[int, int]]:
    """
    Split paths into (block_index, block_paths) pairs.

    Args:
        n_paths: Total number of paths
        block_size: Paths per block

    Returns:
        List: Block plan in path order
    """
    if n_paths < 1 or block_size < 1:
        raise InvalidParameterError(f"Need positive path and block counts, got {n_paths}, {block_size}")
    full, rest = divmod(n_paths, block_size)
    plan = [(i, block_size) for i in range(full)]
    if rest:
        plan.append((full, rest))
    return plan


def run_blocks(simulate: BlockFunction, n_paths: int, block_size: int, stream: RandomStream,
               threads: int = 1) -> Dict[str, np.ndarray]:
    """
    Run a block simulation and concatenate results in block order.

    Block i always draws from ``stream.substream(i)``, so the output does not
    depend on the number of threads.

    Args:
        simulate: Function (block_paths, generator) -> dict of per-path arrays
        n_paths: Total number of paths
        block_size: Paths per block
        stream: Parent random stream
        threads: Worker threads

    Returns:
        Dict: Concatenated per-path arrays
    """
    plan = plan_blocks(n_paths, block_size)
    results: List[Dict[str, np.ndarray]] = [None] * len(plan)
    logger.debug(f"Simulating {n_paths} paths in {len(plan)} blocks on {threads} threads")

    if threads <= 1 or len(plan) == 1:
        for index, size in plan:
            results[index] = simulate(size, stream.substream(index).generator())
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            futures = {
                executor.submit(simulate, size, stream.substream(index).generator()): index
                for index, size in plan
            }
            for future in as_completed(futures):
                results[futures[future]] = future.result()

    return {key: np.concatenate([block[key] for block in results]) for key in results[0]}
