"""Breadth-first branch-and-bound over the input box.

A Frontier holds one BaB layer: the boxes still undecided at the current
depth, each tagged with its volume fraction of the root precondition. Tags
are halved on every bisection instead of being recomputed from widths, so
volume accounting stays exact (tags are dyadic) and deterministic.

evaluate_frontier classifies every box with the configured propagator,
chunked to bound the working set and optionally fanned out to worker
threads; results land at their box's index, so the output is bit-identical
for any worker count or chunk size.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .geometry import Box, bisect
from .model import Network
from .propagation import Propagator, propagate
from .property import SafetyProperty, Verdict, classify


@dataclass(frozen=True)
class Frontier:
    """One BaB layer: undecided boxes plus unsplittable leftovers.

    Residual boxes are those no longer bisectable in floating point; they
    ride along untouched and count toward the unknown gap.
    """

    depth: int
    boxes: tuple
    tags: tuple
    residual_boxes: tuple = ()
    residual_tags: tuple = ()

    def __post_init__(self):
        if len(self.boxes) != len(self.tags):
            raise DimensionMismatch("one tag per box required")
        if len(self.residual_boxes) != len(self.residual_tags):
            raise DimensionMismatch("one tag per residual box required")

    @classmethod
    def root(cls, box: Box) -> "Frontier":
        return cls(0, (box,), (1.0,))

    def __len__(self) -> int:
        return len(self.boxes)

    @property
    def total_volume(self) -> float:
        return sum(self.tags) + sum(self.residual_tags)


@dataclass(frozen=True)
class BatchLayout:
    """Dense (n, k, 2) bounds matrix mirroring a frontier's boxes."""

    bounds_matrix: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.bounds_matrix, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 2:
            raise DimensionMismatch(f"batch layout must be (n, k, 2), got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "bounds_matrix", arr)

    @property
    def n(self) -> int:
        return self.bounds_matrix.shape[0]

    def boxes(self) -> tuple:
        return tuple(Box(row) for row in self.bounds_matrix)


@dataclass(frozen=True)
class BabConfig:
    max_depth: int
    chunk_size: int = 4096
    workers: int = 1
    propagator: Propagator = Propagator.SLR

    def __post_init__(self):
        if self.max_depth < 0:
            raise DimensionMismatch("max_depth must be >= 0")
        if self.chunk_size < 1 or self.workers < 1:
            raise DimensionMismatch("chunk_size and workers must be >= 1")


def to_batch(frontier: Frontier) -> BatchLayout:
    """Pack a non-empty frontier's boxes into the dense batch layout."""
    if not frontier.boxes:
        raise DimensionMismatch("cannot batch an empty frontier")
    return BatchLayout(np.stack([b.bounds for b in frontier.boxes]))


def evaluate_frontier(net: Network, frontier: Frontier, prop: SafetyProperty,
                      cfg: BabConfig) -> list:
    """Classify every frontier box; order and values independent of workers."""
    boxes = frontier.boxes
    for b in boxes:
        if b.ndim != net.input_size:
            raise DimensionMismatch(
                f"frontier box has {b.ndim} dims, network expects {net.input_size}")

    def one(box: Box) -> Verdict:
        return classify(propagate(net, box, cfg.propagator), prop, box)

    verdicts = [None] * len(boxes)
    if cfg.workers == 1:
        for i, b in enumerate(boxes):
            verdicts[i] = one(b)
        return verdicts
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        for start in range(0, len(boxes), cfg.chunk_size):
            chunk = boxes[start:start + cfg.chunk_size]
            for i, v in enumerate(pool.map(one, chunk)):
                verdicts[start + i] = v
    return verdicts


def _splittable_dim(box: Box) -> int | None:
    """Widest dimension whose float midpoint is strictly interior, if any."""
    widths = box.widths
    for d in np.argsort(-widths, kind="stable"):
        lo, hi = box.bounds[d]
        if lo == hi:
            continue
        mid = (lo + hi) / 2.0
        if lo < mid < hi:
            return int(d)
    return None


def refine(frontier: Frontier, verdicts) -> tuple[float, float, Frontier]:
    """Settle decided boxes and bisect the undecided ones.

    Returns (safe volume, violating volume, next frontier). UNKNOWN boxes
    split along their widest splittable dimension into two children at half
    the tag; boxes with no splittable dimension move to the residual bucket.
    Accumulation runs in frontier index order.
    """
    if len(verdicts) != len(frontier.boxes):
        raise DimensionMismatch("verdicts do not align with frontier")
    safe_vol = 0.0
    viol_vol = 0.0
    next_boxes = []
    next_tags = []
    res_boxes = list(frontier.residual_boxes)
    res_tags = list(frontier.residual_tags)
    for box, tag, verdict in zip(frontier.boxes, frontier.tags, verdicts):
        if verdict is Verdict.SAFE:
            safe_vol += tag
        elif verdict is Verdict.VIOLATING:
            viol_vol += tag
        else:
            d = _splittable_dim(box)
            if d is None:
                res_boxes.append(box)
                res_tags.append(tag)
                continue
            left, right = bisect(box, d)
            half = tag * 0.5
            next_boxes.extend((left, right))
            next_tags.extend((half, half))
    nxt = Frontier(frontier.depth + 1, tuple(next_boxes), tuple(next_tags),
                   tuple(res_boxes), tuple(res_tags))
    return safe_vol, viol_vol, nxt
