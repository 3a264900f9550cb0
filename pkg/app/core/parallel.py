"""Replicate farm.

Replicate ``i`` always runs with ``derive_seeds(base_seed, n)[i]`` and results
come back in replicate order, so the output does not depend on the worker count.
"""
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Sequence, TypeVar

from tqdm import tqdm

from app.core.rng import derive_seeds

logger = logging.getLogger(__name__)

T = TypeVar("T")


def progress_enabled(quiet: bool = False) -> bool:
    return not quiet and sys.stderr.isatty()


def run_replicates(task: Callable[[int], T], replicates: int, base_seed: int, threads: int = 1,
                   desc: str = "replicates", quiet: bool = False) -> List[T]:
    """Evaluate ``task(seed)`` for every derived replicate seed.

    ``task`` must be picklable (a module-level function or a ``functools.partial``
    of one) when ``threads > 1``.
    """
    seeds = derive_seeds(base_seed, replicates)
    return map_ordered(task, seeds, threads=threads, desc=desc, quiet=quiet)


def map_ordered(task: Callable[..., T], items: Sequence, threads: int = 1,
                desc: str = "tasks", quiet: bool = False) -> List[T]:
    disable = not progress_enabled(quiet)
    if threads <= 1 or len(items) <= 1:
        return [task(item) for item in tqdm(items, desc=desc, disable=disable)]
    logger.debug("running %d %s on %d workers", len(items), desc, threads)
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(tqdm(pool.map(task, items), total=len(items), desc=desc, disable=disable))
