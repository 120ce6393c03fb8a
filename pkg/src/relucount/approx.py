"""Randomized violation-rate estimation.

split_estimate narrows the region with s sample-guided cuts, exact-counts
the final leaf, and scales back up by 2^s. Because the surviving half is
chosen uniformly at random at every cut, the scaled leaf count is unbiased
for any cut rule; the balancing cut placement only reduces variance.

mc_estimate is plain Monte Carlo with a one-sided Hoeffding lower
confidence bound. build_tiny_vr_net constructs an instance whose true
violation rate is epsilon^3, small enough that Monte Carlo at reasonable
sample sizes usually reports zero while exact counting does not.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .bab import BabConfig
from .counting import exact_count
from .errors import InvalidBounds, InvalidEpsilon
from .geometry import Box, volume_fraction
from .model import Activation, AffineLayer, Network
from .property import Atom, AtomOp, SafetyProperty

_MC_CHUNK = 1 << 17


@dataclass(frozen=True)
class SplitEstimateConfig:
    s: int
    samples_per_split: int
    runs: int
    confidence: float
    seed: int
    backend: BabConfig

    def __post_init__(self):
        if self.s < 0 or self.samples_per_split < 1 or self.runs < 1:
            raise InvalidBounds("need s >= 0, samples_per_split >= 1, runs >= 1")
        if not 0.0 < self.confidence < 1.0:
            raise InvalidBounds("confidence must lie in (0, 1)")


@dataclass(frozen=True)
class EstimateResult:
    point_estimate: float
    lower_bound: float
    confidence: float
    per_run_estimates: tuple
    samples_used: int
    wall_time: float

    def __post_init__(self):
        if self.lower_bound > self.point_estimate:
            raise InvalidBounds("lower_bound exceeds point_estimate")
        if any(not 0.0 <= e <= 1.0 for e in self.per_run_estimates):
            raise InvalidBounds("estimates must lie in [0, 1]")


def _choose_cut(region: Box, viol: np.ndarray):
    """Pick (dimension, cut coordinate) to balance violating samples.

    Candidate cut per splittable dimension is the median of the violating
    samples' coordinates there; the dimension with the smallest post-cut
    imbalance wins (ties: widest, then lowest index). With no violating
    samples, or no strictly interior median, fall back to the midpoint of
    the widest splittable dimension. Returns (None, None) when nothing is
    splittable.
    """
    widths = region.widths
    splittable = []
    for d in range(region.ndim):
        lo, hi = region.bounds[d]
        mid = (lo + hi) / 2.0
        if lo < mid < hi:
            splittable.append(d)
    if not splittable:
        return None, None
    fallback = min(splittable, key=lambda d: (-widths[d], d))
    if len(viol):
        best = None
        for d in splittable:
            c = float(np.median(viol[:, d]))
            if not region.bounds[d, 0] < c < region.bounds[d, 1]:
                continue
            n_left = int(np.count_nonzero(viol[:, d] < c))
            imbalance = abs(2 * n_left - len(viol))
            key = (imbalance, -widths[d], d)
            if best is None or key < best[0]:
                best = (key, d, c)
        if best is not None:
            return best[1], best[2]
    lo, hi = region.bounds[fallback]
    return fallback, (lo + hi) / 2.0


def _cut_region(region: Box, d: int, c: float) -> tuple[Box, Box]:
    left = region.bounds.copy()
    right = region.bounds.copy()
    left[d, 1] = c
    right[d, 0] = c
    return Box(left), Box(right)


def split_estimate_run(net: Network, prop: SafetyProperty,
                       cfg: SplitEstimateConfig, run_seed) -> float:
    """One estimate: s balanced cuts, exact count of the leaf, scale by 2^s.

    Draw order per cut is fixed (samples, then the side coin), so a given
    run_seed reproduces the run exactly. Cuts that cannot be placed are
    skipped without consuming a factor of 2.
    """
    rng = np.random.default_rng(run_seed)
    region = prop.precondition
    cuts = 0
    for _ in range(cfg.s):
        X = rng.uniform(region.lo, region.hi,
                        size=(cfg.samples_per_split, region.ndim))
        ok = prop.holds_batch(net.forward_batch(X))
        d, c = _choose_cut(region, X[~ok])
        if d is None:
            break
        left, right = _cut_region(region, d, c)
        region = right if rng.integers(2) else left
        cuts += 1
    leaf = exact_count(net, prop.restricted(region), cfg.backend)
    scale = volume_fraction(region, prop.precondition)
    est = (2.0 ** cuts) * leaf.vr_lb * scale
    return min(1.0, max(0.0, est))


def split_estimate(net: Network, prop: SafetyProperty,
                   cfg: SplitEstimateConfig) -> EstimateResult:
    """T independent runs; median as the estimate, minimum as the bound."""
    t0 = time.perf_counter()
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.runs)
    runs = tuple(split_estimate_run(net, prop, cfg, sd) for sd in seeds)
    return EstimateResult(
        point_estimate=float(np.median(runs)),
        lower_bound=min(runs),
        confidence=cfg.confidence,
        per_run_estimates=runs,
        samples_used=cfg.runs * cfg.s * cfg.samples_per_split,
        wall_time=time.perf_counter() - t0,
    )


def mc_estimate(net: Network, prop: SafetyProperty, n_samples: int,
                confidence: float, seed) -> EstimateResult:
    """Monte Carlo violating fraction with a one-sided Hoeffding bound."""
    if n_samples < 1:
        raise InvalidBounds("need at least one sample")
    if not 0.0 < confidence < 1.0:
        raise InvalidBounds("confidence must lie in (0, 1)")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    root = prop.precondition
    viol = 0
    done = 0
    while done < n_samples:
        m = min(_MC_CHUNK, n_samples - done)
        X = rng.uniform(root.lo, root.hi, size=(m, root.ndim))
        viol += int(np.count_nonzero(~prop.holds_batch(net.forward_batch(X))))
        done += m
    p_hat = viol / n_samples
    eps = math.sqrt(math.log(1.0 / (1.0 - confidence)) / (2.0 * n_samples))
    return EstimateResult(
        point_estimate=p_hat,
        lower_bound=max(0.0, p_hat - eps),
        confidence=confidence,
        per_run_estimates=(p_hat,),
        samples_used=n_samples,
        wall_time=time.perf_counter() - t0,
    )


def build_tiny_vr_net(epsilon: float) -> tuple[Network, SafetyProperty]:
    """Instance over [0,1]^3 with true violation rate exactly epsilon^3.

    The network computes y = max(x0, x1, x2) - epsilon from ReLU hinges:
    with a = relu(x0), b = relu(x1 - x0), c = relu(x2) the first layer, and
    d = relu(a + b), e = relu(c - a - b) the second, d + e equals
    max(x0, x1, x2) on the nonnegative cube. The property asks y >= 0, so
    the violating inputs are exactly the corner cube [0, epsilon)^3.
    """
    if not 0.0 < epsilon < 0.1:
        raise InvalidEpsilon(f"epsilon must lie in (0, 0.1), got {epsilon}")
    l1 = AffineLayer(np.array([[1.0, 0.0, 0.0],
                               [-1.0, 1.0, 0.0],
                               [0.0, 0.0, 1.0]]),
                     np.zeros(3), Activation.RELU)
    l2 = AffineLayer(np.array([[1.0, 1.0, 0.0],
                               [-1.0, -1.0, 1.0]]),
                     np.zeros(2), Activation.RELU)
    l3 = AffineLayer(np.array([[1.0, 1.0]]), np.array([-epsilon]),
                     Activation.IDENTITY)
    net = Network((l1, l2, l3))
    prop = SafetyProperty(Box([[0.0, 1.0]] * 3),
                          ((Atom(np.array([1.0]), AtomOp.GE, 0.0),),))
    return net, prop
