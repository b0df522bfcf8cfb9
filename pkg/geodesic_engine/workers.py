# ============================================================================
# geodesic_engine/workers.py - Order-preserving fan-out of independent jobs
# ============================================================================

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import config

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """map() over a thread pool when LAB_WORKERS > 1; results keep input order"""
    items = list(items)
    workers = workers or config.WORKERS
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
