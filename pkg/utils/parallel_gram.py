"""
parallel_gram.py
Rowwise partitioned Gram product: contiguous row blocks, local Gram products on
a thread pool, then one combine at the root over a fixed binary tree.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from utils.dense_core import DenseMatrix, Precision, gram_array
from utils.errors import InvalidPartition

logger = logging.getLogger(__name__)


def plan_granularity(p: int) -> int:
    """Default number of logical blocks for p workers: 2p rounded up to a power of two."""
    if p < 1:
        raise InvalidPartition(p, 0)
    return 1 << (2 * p - 1).bit_length()


@dataclass(frozen=True)
class PartitionPlan:
    """
    Worker count plus the contiguous row blocks the Gram product is split into.
    The block count is fixed independently of p so results do not depend on it.
    """
    p: int
    row_ranges: Tuple[Tuple[int, int], ...]

    @property
    def blocks(self) -> int:
        return len(self.row_ranges)


def make_plan(m: int, p: int, num_blocks: Optional[int] = None) -> PartitionPlan:
    """
    Split rows [0, m) into balanced half-open ranges whose sizes differ by at most one.

    Args:
        m: Number of rows
        p: Worker count, 1 <= p <= m
        num_blocks: Logical block count; defaults to plan_granularity(p), capped at m
    Returns:
        PartitionPlan
    Raises:
        InvalidPartition: If p is out of range
    """
    if p < 1 or p > m:
        raise InvalidPartition(p, m)
    blocks = num_blocks if num_blocks is not None else plan_granularity(p)
    if blocks < 1:
        raise ValueError(f"num_blocks must be positive, got {blocks}")
    blocks = min(blocks, m)
    base, extra = divmod(m, blocks)
    ranges = []
    start = 0
    for k in range(blocks):
        stop = start + base + (1 if k < extra else 0)
        ranges.append((start, stop))
        start = stop
    return PartitionPlan(p=p, row_ranges=tuple(ranges))


@dataclass
class SyncCounter:
    """Counts global synchronization events of partitioned_gram."""
    events: int = 0
    history: List[int] = field(default_factory=list)

    def record(self, workers: int) -> None:
        self.events += 1
        self.history.append(workers)


def tree_reduce(partials: List[np.ndarray]) -> np.ndarray:
    """Pairwise sum (0,1),(2,3),... level by level; an odd tail is carried up."""
    level = list(partials)
    while len(level) > 1:
        merged = [level[k] + level[k + 1] for k in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            merged.append(level[-1])
        level = merged
    return level[0]


def partitioned_gram(A: DenseMatrix, p: int, num_blocks: Optional[int] = None,
                     counter: Optional[SyncCounter] = None) -> DenseMatrix:
    """
    Gram product of A over a rowwise partition.

    Output depends only on A and the block count, never on p.

    Args:
        A: Matrix whose Gram product is formed (Higher precision on the mixed path)
        p: Worker threads
        num_blocks: Logical block count, see make_plan
        counter: Optional instrumentation counter
    Returns:
        Symmetric n x n DenseMatrix in A's precision
    Raises:
        InvalidPartition: If p is out of range
    """
    plan = make_plan(A.rows, p, num_blocks)
    slots: List[Optional[np.ndarray]] = [None] * plan.blocks

    def local_gram(k: int) -> None:
        lo, hi = plan.row_ranges[k]
        slots[k] = gram_array(A.data[lo:hi])

    if p == 1:
        for k in range(plan.blocks):
            local_gram(k)
    else:
        with ThreadPoolExecutor(max_workers=p) as executor:
            list(executor.map(local_gram, range(plan.blocks)))
    # every slot is complete here; the combine below is the single global step
    if counter is not None:
        counter.record(p)
    logger.debug("partitioned gram: %d rows, %d blocks, %d workers", A.rows, plan.blocks, p)
    return DenseMatrix(tree_reduce(slots), A.precision)


def sync_count(p: int) -> int:
    """Number of global synchronization events one partitioned_gram run with p workers performs."""
    counter = SyncCounter()
    probe = DenseMatrix(np.ones((p, 1), dtype=np.float64), Precision.HIGHER)
    partitioned_gram(probe, p, counter=counter)
    return counter.events
