"""Interval and hyperrectangle algebra.

Scalar intervals and axis-aligned boxes are the carriers for input regions.
All operations are pure; boxes are immutable once built.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDimension, DimensionMismatch, InvalidBounds, NotContained


@dataclass(frozen=True)
class Interval:
    """Closed scalar interval [lo, hi] with finite endpoints."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise InvalidBounds(f"non-finite interval [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise InvalidBounds(f"lo > hi in [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


class Box:
    """Axis-aligned hyperrectangle: one closed interval per input dimension.

    Backed by a read-only (k, 2) float64 array of (lo, hi) pairs.
    """

    __slots__ = ("bounds",)

    def __init__(self, bounds):
        arr = np.asarray(bounds, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] != 2:
            raise DimensionMismatch(f"box bounds must have shape (k, 2), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidBounds("box bounds must be finite")
        if np.any(arr[:, 0] > arr[:, 1]):
            raise InvalidBounds("box has lo > hi in some dimension")
        arr = arr.copy()
        arr.setflags(write=False)
        self.bounds = arr

    @classmethod
    def from_intervals(cls, intervals) -> "Box":
        return cls([(iv.lo, iv.hi) for iv in intervals])

    @property
    def ndim(self) -> int:
        return self.bounds.shape[0]

    @property
    def lo(self) -> np.ndarray:
        return self.bounds[:, 0]

    @property
    def hi(self) -> np.ndarray:
        return self.bounds[:, 1]

    @property
    def widths(self) -> np.ndarray:
        return self.bounds[:, 1] - self.bounds[:, 0]

    @property
    def dims(self) -> tuple[Interval, ...]:
        return tuple(Interval(float(lo), float(hi)) for lo, hi in self.bounds)

    def __getitem__(self, d: int) -> Interval:
        return Interval(float(self.bounds[d, 0]), float(self.bounds[d, 1]))

    def __eq__(self, other) -> bool:
        return isinstance(other, Box) and np.array_equal(self.bounds, other.bounds)

    def __hash__(self):
        return hash(self.bounds.tobytes())

    def __repr__(self) -> str:
        spans = ", ".join(f"[{lo:g}, {hi:g}]" for lo, hi in self.bounds)
        return f"Box({spans})"

    def contains_point(self, x) -> bool:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.ndim,):
            raise DimensionMismatch(f"point has shape {x.shape}, box has {self.ndim} dims")
        return bool(np.all(x >= self.lo) and np.all(x <= self.hi))


def bisect(box: Box, dim: int) -> tuple[Box, Box]:
    """Split a box at the exact midpoint of one dimension.

    Left child keeps [lo, mid], right child [mid, hi]; their union covers the
    parent and their interiors are disjoint.
    """
    if not 0 <= dim < box.ndim:
        raise DimensionMismatch(f"dimension {dim} out of range for {box.ndim}-dim box")
    lo, hi = box.bounds[dim]
    if lo == hi:
        raise DegenerateDimension(f"dimension {dim} has zero width at {lo}")
    mid = (lo + hi) / 2.0
    left = box.bounds.copy()
    right = box.bounds.copy()
    left[dim, 1] = mid
    right[dim, 0] = mid
    return Box(left), Box(right)


def widest_dim(box: Box) -> int:
    """Index of the widest dimension; ties go to the lowest index."""
    return int(np.argmax(box.widths))


def volume_fraction(sub: Box, parent: Box) -> float:
    """Fraction of the parent's volume occupied by sub.

    Zero-width parent dimensions are excluded from the product, so properties
    that pin inputs to points still have well-defined fractions.
    """
    if sub.ndim != parent.ndim:
        raise DimensionMismatch("sub and parent dimensionality differ")
    if np.any(sub.lo < parent.lo) or np.any(sub.hi > parent.hi):
        raise NotContained(f"{sub!r} is not inside {parent!r}")
    pw = parent.widths
    live = pw > 0.0
    if not np.any(live):
        return 1.0
    return float(np.prod(sub.widths[live] / pw[live]))


def interval_dot(coeffs, box: Box, bias: float = 0.0) -> Interval:
    """Exact min/max of an affine form coeffs . x + bias over a box.

    Positive coefficients take the matching bound, negative ones the opposite
    (the usual sign rule).
    """
    c = np.asarray(coeffs, dtype=np.float64)
    if c.shape != (box.ndim,):
        raise DimensionMismatch(f"{c.shape[0] if c.ndim == 1 else c.shape} coefficients for a {box.ndim}-dim box")
    lo, hi = box.lo, box.hi
    low = bias + float(np.sum(np.where(c > 0, c * lo, c * hi)))
    high = bias + float(np.sum(np.where(c > 0, c * hi, c * lo)))
    return Interval(low, high)
