"""Violation-rate computation by branch-and-bound.

Continuous mode bounds the violating fraction of the precondition's volume
from both sides, refining until the frontier empties or a depth cap is hit;
the gap vr_ub - vr_lb is exactly the unresolved (unknown plus residual)
volume. Discrete mode counts violating points of a finite grid exactly,
with SAFE/VIOLATING boxes accounting all their owned grid points at once
via index arithmetic. brute_force_vr enumerates the same grid point by
point with no interval machinery, as an independent oracle.

Grid-point ownership is half-open per dimension ([lo, hi), closed at the
root's top edge), so bisection children partition the points exactly even
when a split lands on a grid coordinate.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .bab import BabConfig, Frontier, evaluate_frontier, refine, _splittable_dim
from .errors import DimensionMismatch, GridTooLarge, InvalidBounds, VerifierError
from .geometry import Box, bisect
from .model import Network
from .property import SafetyProperty, Verdict

_BRUTE_POINT_LIMIT = 10 ** 8
_EVAL_CHUNK = 1 << 16


@dataclass(frozen=True)
class VrResult:
    """Outcome of a counting run.

    vr_lb and vr_ub bracket the violation rate; they coincide exactly when
    everything resolved. In discrete mode the integer point tallies are
    attached; in continuous mode box lists are attached on request for
    slack accounting.
    """

    vr_lb: float
    vr_ub: float
    exact: bool
    nodes_explored: int
    max_depth_reached: int
    residual_volume: float
    wall_time: float
    timed_out: bool = False
    violating_points: int | None = None
    total_points: int | None = None
    violating_boxes: tuple | None = None
    unresolved_boxes: tuple | None = None

    def __post_init__(self):
        if not (0.0 <= self.vr_lb <= self.vr_ub <= 1.0):
            raise InvalidBounds(
                f"vr bounds out of order: [{self.vr_lb}, {self.vr_ub}]")

    @property
    def gap(self) -> float:
        return self.vr_ub - self.vr_lb


@dataclass(frozen=True)
class GridSpec:
    """Uniform evaluation grid: points per dimension, endpoints included.

    A zero-width dimension always contributes exactly one point regardless
    of the requested count.
    """

    points_per_dim: tuple

    def __post_init__(self):
        pts = tuple(int(p) for p in self.points_per_dim)
        if not pts or any(p < 1 for p in pts):
            raise ValueError("grid needs at least one point per dimension")
        if math.prod(pts) > np.iinfo(np.int64).max:
            raise GridTooLarge(f"grid of {pts} points overflows a 64-bit counter")
        object.__setattr__(self, "points_per_dim", pts)

    @classmethod
    def uniform(cls, points: int, ndim: int) -> "GridSpec":
        return cls((points,) * ndim)

    def axis_coords(self, root: Box) -> list:
        """Per-dimension coordinate arrays over the root box."""
        if len(self.points_per_dim) != root.ndim:
            raise DimensionMismatch(
                f"grid specifies {len(self.points_per_dim)} dims, box has {root.ndim}")
        axes = []
        for (lo, hi), p in zip(root.bounds, self.points_per_dim):
            if hi == lo or p == 1:
                axes.append(np.array([lo]))
                continue
            coords = lo + np.arange(p) * ((hi - lo) / (p - 1))
            coords[-1] = hi
            axes.append(coords)
        return axes

    def total_points(self, root: Box) -> int:
        return math.prod(len(a) for a in self.axis_coords(root))


def _owned_ranges(box: Box, root: Box, axes) -> list:
    """Half-open index range [start, stop) of owned coordinates per dim."""
    ranges = []
    for d, ax in enumerate(axes):
        start = int(np.searchsorted(ax, box.lo[d], side="left"))
        side = "right" if box.hi[d] == root.hi[d] else "left"
        stop = int(np.searchsorted(ax, box.hi[d], side=side))
        ranges.append((start, stop))
    return ranges


def _owned_count(box: Box, root: Box, axes) -> int:
    n = 1
    for start, stop in _owned_ranges(box, root, axes):
        if stop <= start:
            return 0
        n *= stop - start
    return n


def _owned_points(box: Box, root: Box, axes) -> np.ndarray:
    """Materialize the owned grid points of a box, C-ordered."""
    slices = [ax[start:stop] for ax, (start, stop) in
              zip(axes, _owned_ranges(box, root, axes))]
    if any(len(s) == 0 for s in slices):
        return np.empty((0, len(axes)))
    mesh = np.meshgrid(*slices, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _check_instance(net: Network, prop: SafetyProperty):
    if prop.precondition.ndim != net.input_size:
        raise DimensionMismatch(
            f"precondition has {prop.precondition.ndim} dims, "
            f"network expects {net.input_size}")
    if prop.n_outputs != net.output_size:
        raise DimensionMismatch(
            f"property is over {prop.n_outputs} outputs, "
            f"network emits {net.output_size}")


def exact_count(net: Network, prop: SafetyProperty, cfg: BabConfig,
                timeout_s: float | None = None, keep_boxes: bool = False
                ) -> VrResult:
    """Bound the violation rate by volume, refining to cfg.max_depth.

    vr_lb accumulates certainly-violating volume, vr_ub adds everything
    unresolved when the depth cap (or the optional wall-clock budget) cuts
    refinement short. On timeout the partial bounds are still sound and the
    result is flagged.
    """
    _check_instance(net, prop)
    t0 = time.perf_counter()
    frontier = Frontier.root(prop.precondition)
    safe_vol = 0.0
    viol_vol = 0.0
    unknown_vol = 0.0
    nodes = 0
    depth_seen = 0
    timed_out = False
    viol_boxes: list | None = [] if keep_boxes else None
    unres_boxes: list | None = [] if keep_boxes else None

    while len(frontier):
        if timeout_s is not None and time.perf_counter() - t0 > timeout_s:
            timed_out = True
            unknown_vol += sum(frontier.tags)
            if keep_boxes:
                unres_boxes.extend(frontier.boxes)
            break
        verdicts = evaluate_frontier(net, frontier, prop, cfg)
        nodes += len(frontier)
        depth_seen = frontier.depth
        if keep_boxes:
            viol_boxes.extend(b for b, v in zip(frontier.boxes, verdicts)
                              if v is Verdict.VIOLATING)
        if frontier.depth >= cfg.max_depth:
            # cap layer: settle decided boxes, leave the rest as the gap
            for box, tag, v in zip(frontier.boxes, frontier.tags, verdicts):
                if v is Verdict.SAFE:
                    safe_vol += tag
                elif v is Verdict.VIOLATING:
                    viol_vol += tag
                else:
                    unknown_vol += tag
                    if keep_boxes:
                        unres_boxes.append(box)
            break
        s, v, frontier = refine(frontier, verdicts)
        safe_vol += s
        viol_vol += v

    residual_vol = sum(frontier.residual_tags)
    if keep_boxes:
        unres_boxes.extend(frontier.residual_boxes)
    unresolved = unknown_vol + residual_vol
    return VrResult(
        vr_lb=viol_vol,
        vr_ub=viol_vol + unresolved,
        exact=unresolved == 0.0,
        nodes_explored=nodes,
        max_depth_reached=depth_seen,
        residual_volume=residual_vol,
        wall_time=time.perf_counter() - t0,
        timed_out=timed_out,
        violating_boxes=tuple(viol_boxes) if keep_boxes else None,
        unresolved_boxes=tuple(unres_boxes) if keep_boxes else None,
    )


def _below_cell(box: Box, root: Box, axes) -> bool:
    """True when the box spans less than one grid step in every dimension."""
    for d, ax in enumerate(axes):
        if len(ax) < 2:
            continue
        step = ax[1] - ax[0]
        if box.widths[d] >= step:
            return False
    return True


def exact_count_discrete(net: Network, prop: SafetyProperty, grid: GridSpec,
                         cfg: BabConfig) -> VrResult:
    """Count violating grid points exactly; always terminates, always exact.

    Decided boxes account all their owned points arithmetically; undecided
    boxes are bisected until below one grid cell per dimension (or
    unsplittable), then settled by evaluating their few owned points
    directly. cfg.max_depth is ignored: the grid itself bounds the depth.
    """
    _check_instance(net, prop)
    t0 = time.perf_counter()
    root = prop.precondition
    axes = grid.axis_coords(root)
    total = math.prod(len(a) for a in axes)
    viol_pts = 0
    safe_pts = 0
    nodes = 0
    depth_seen = 0
    frontier = Frontier.root(root)

    while len(frontier):
        live = [(b, _owned_count(b, root, axes)) for b in frontier.boxes]
        keep = [(b, n) for b, n in live if n > 0]
        if not keep:
            break
        sub = Frontier(frontier.depth, tuple(b for b, _ in keep),
                       (0.0,) * len(keep))
        verdicts = evaluate_frontier(net, sub, prop, cfg)
        nodes += len(keep)
        depth_seen = frontier.depth
        next_boxes = []
        for (box, owned), verdict in zip(keep, verdicts):
            if verdict is Verdict.SAFE:
                safe_pts += owned
            elif verdict is Verdict.VIOLATING:
                viol_pts += owned
            elif _below_cell(box, root, axes) or _splittable_dim(box) is None:
                pts = _owned_points(box, root, axes)
                bad = int(np.count_nonzero(~prop.holds_batch(net.forward_batch(pts))))
                viol_pts += bad
                safe_pts += owned - bad
            else:
                next_boxes.extend(bisect(box, _splittable_dim(box)))
        frontier = Frontier(frontier.depth + 1, tuple(next_boxes),
                            (0.0,) * len(next_boxes))

    if viol_pts + safe_pts != total:
        raise VerifierError(
            f"grid accounting lost points: {viol_pts}+{safe_pts} != {total}")
    vr = viol_pts / total
    return VrResult(
        vr_lb=vr,
        vr_ub=vr,
        exact=True,
        nodes_explored=nodes,
        max_depth_reached=depth_seen,
        residual_volume=0.0,
        wall_time=time.perf_counter() - t0,
        violating_points=viol_pts,
        total_points=total,
    )


def brute_force_vr(net: Network, prop: SafetyProperty, grid: GridSpec) -> float:
    """Enumerate every grid point through the network; the slow oracle.

    No pruning and no interval arithmetic anywhere on this path.
    """
    _check_instance(net, prop)
    root = prop.precondition
    axes = grid.axis_coords(root)
    total = math.prod(len(a) for a in axes)
    if total > _BRUTE_POINT_LIMIT:
        raise GridTooLarge(f"{total} grid points exceeds {_BRUTE_POINT_LIMIT}")
    sizes = tuple(len(a) for a in axes)
    viol = 0
    for start in range(0, total, _EVAL_CHUNK):
        flat = np.arange(start, min(start + _EVAL_CHUNK, total))
        idx = np.unravel_index(flat, sizes)
        X = np.stack([ax[i] for ax, i in zip(axes, idx)], axis=1)
        viol += int(np.count_nonzero(~prop.holds_batch(net.forward_batch(X))))
    return viol / total
