"""Sound output range analysis for ReLU networks over box input regions.

Two propagators are provided: plain interval (Moore) propagation, and
symbolic propagation that carries one linear lower and upper form per node
in the input variables, relaxing unstable ReLU nodes with the triangle
bound z = [q * eq_lo, q * (eq_up - l)] where q = u / (u - l).

Concrete bounds in the symbolic propagators are always intersected with the
plain interval bounds at every node, so the symbolic result is never wider
than the naive one, per output, exactly in floating point.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidBounds
from .geometry import Box, Interval
from .model import Activation, Network


class Propagator(enum.Enum):
    NAIVE = "naive"
    SIP = "sip"
    SLR = "slr"


@dataclass(frozen=True)
class AffineForm:
    """Linear form coeffs . x + bias over the network's input variables."""

    coeffs: np.ndarray
    bias: float

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.float64)
        if c.ndim != 1:
            raise DimensionMismatch("affine form coefficients must be a vector")
        if not (np.all(np.isfinite(c)) and np.isfinite(self.bias)):
            raise InvalidBounds("affine form has non-finite entries")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "bias", float(self.bias))

    def __call__(self, x) -> float:
        return float(self.coeffs @ np.asarray(x, dtype=np.float64) + self.bias)


class SymbolicBounds:
    """Per-node lower/upper affine forms plus intersected concrete bounds.

    Stores one layer's worth of forms as dense arrays: coefficient matrices
    of shape (nodes, input_size) and bias/bound vectors of shape (nodes,).
    """

    __slots__ = ("lower_coeffs", "lower_bias", "upper_coeffs", "upper_bias",
                 "concrete_lo", "concrete_hi")

    def __init__(self, lower_coeffs, lower_bias, upper_coeffs, upper_bias,
                 concrete_lo, concrete_hi):
        for name, arr in (("lower_coeffs", lower_coeffs), ("lower_bias", lower_bias),
                          ("upper_coeffs", upper_coeffs), ("upper_bias", upper_bias),
                          ("concrete_lo", concrete_lo), ("concrete_hi", concrete_hi)):
            a = np.ascontiguousarray(arr, dtype=np.float64)
            a.setflags(write=False)
            setattr(self, name, a)
        if self.lower_coeffs.shape != self.upper_coeffs.shape or self.lower_coeffs.ndim != 2:
            raise DimensionMismatch("coefficient matrices must share shape (nodes, k)")

    @property
    def n_nodes(self) -> int:
        return self.lower_coeffs.shape[0]

    @property
    def input_size(self) -> int:
        return self.lower_coeffs.shape[1]

    def lower_eq(self, i: int) -> AffineForm:
        return AffineForm(self.lower_coeffs[i], float(self.lower_bias[i]))

    def upper_eq(self, i: int) -> AffineForm:
        return AffineForm(self.upper_coeffs[i], float(self.upper_bias[i]))

    def concrete(self, i: int) -> Interval:
        return Interval(float(self.concrete_lo[i]), float(self.concrete_hi[i]))


class ReachSet:
    """Sound over-approximation of a network's image of a box.

    Holds per-output concrete intervals; symbolic propagators also attach
    the output layer's SymbolicBounds for dependency-aware classification.
    """

    __slots__ = ("out_lo", "out_hi", "bounds")

    def __init__(self, out_lo, out_hi, bounds=None):
        lo = np.ascontiguousarray(out_lo, dtype=np.float64)
        hi = np.ascontiguousarray(out_hi, dtype=np.float64)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DimensionMismatch("reach set bounds must be matching vectors")
        if np.any(lo > hi):
            raise InvalidBounds("reach set has lo > hi")
        lo.setflags(write=False)
        hi.setflags(write=False)
        self.out_lo = lo
        self.out_hi = hi
        self.bounds = bounds

    @property
    def n_outputs(self) -> int:
        return self.out_lo.shape[0]

    @property
    def intervals(self) -> tuple[Interval, ...]:
        return tuple(Interval(float(l), float(h)) for l, h in zip(self.out_lo, self.out_hi))

    @property
    def widths(self) -> np.ndarray:
        return self.out_hi - self.out_lo

    def contains_output(self, y) -> bool:
        y = np.asarray(y, dtype=np.float64)
        return bool(np.all(y >= self.out_lo) and np.all(y <= self.out_hi))


def _check_box(net: Network, box: Box):
    if box.ndim != net.input_size:
        raise DimensionMismatch(
            f"box has {box.ndim} dims, network expects {net.input_size}")


def _moore_affine(W, b, lo, hi):
    """Interval image of W v + b when v ranges over [lo, hi] node-wise."""
    Wp = np.maximum(W, 0.0)
    Wn = np.minimum(W, 0.0)
    new_lo = Wp @ lo + Wn @ hi + b
    new_hi = Wp @ hi + Wn @ lo + b
    return new_lo, new_hi


def _point_reach(net: Network, box: Box, symbolic: bool) -> ReachSet:
    # fully degenerate box: single forward evaluation is exact
    y = net.forward(box.lo)
    bounds = None
    if symbolic:
        k, m = net.input_size, net.output_size
        zeros = np.zeros((m, k))
        bounds = SymbolicBounds(zeros, y, zeros, y, y, y)
    return ReachSet(y, y, bounds)


def naive_forward(net: Network, box: Box) -> ReachSet:
    """Layer-by-layer Moore propagation treating nodes as independent."""
    _check_box(net, box)
    if not np.any(box.widths > 0.0):
        return _point_reach(net, box, symbolic=False)
    lo, hi = box.lo, box.hi
    for layer in net.layers:
        lo, hi = _moore_affine(layer.weights, layer.biases, lo, hi)
        if layer.activation is Activation.RELU:
            lo = np.maximum(lo, 0.0)
            hi = np.maximum(hi, 0.0)
    return ReachSet(lo, hi)


def _relax_arrays(lower_coeffs, lower_bias, upper_coeffs, upper_bias, l, u,
                  keep_forms: bool):
    """Triangle relaxation of ReLU applied row-wise.

    Three cases per node: u <= 0 zeroes both forms; l >= 0 leaves them
    unchanged; otherwise scale by q = u/(u-l), with the upper bias shifted
    to q*(bias - l). keep_forms=False instead collapses unstable nodes to
    the constant forms [0, u] (symbolic propagation without relaxation).
    """
    l = np.asarray(l, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    inactive = u <= 0.0
    unstable = ~inactive & (l < 0.0)

    lc = np.array(lower_coeffs, dtype=np.float64)
    lb = np.array(lower_bias, dtype=np.float64)
    uc = np.array(upper_coeffs, dtype=np.float64)
    ub = np.array(upper_bias, dtype=np.float64)

    if np.any(unstable):
        q = np.zeros_like(u)
        q[unstable] = u[unstable] / (u[unstable] - l[unstable])
        if keep_forms:
            col = q[:, None]
            lc = np.where(unstable[:, None], col * lc, lc)
            lb = np.where(unstable, q * lb, lb)
            uc = np.where(unstable[:, None], col * uc, uc)
            ub = np.where(unstable, q * (ub - l), ub)
        else:
            lc = np.where(unstable[:, None], 0.0, lc)
            lb = np.where(unstable, 0.0, lb)
            uc = np.where(unstable[:, None], 0.0, uc)
            ub = np.where(unstable, u, ub)
    if np.any(inactive):
        lc = np.where(inactive[:, None], 0.0, lc)
        lb = np.where(inactive, 0.0, lb)
        uc = np.where(inactive[:, None], 0.0, uc)
        ub = np.where(inactive, 0.0, ub)
    return lc, lb, uc, ub


def relu_relax(lower_eq: AffineForm, upper_eq: AffineForm, l: float, u: float
               ) -> tuple[AffineForm, AffineForm]:
    """Relax one ReLU node's bounding forms given its concrete bounds l, u."""
    if l > u:
        raise InvalidBounds(f"relaxation bounds inverted: l={l} > u={u}")
    lc, lb, uc, ub = _relax_arrays(
        lower_eq.coeffs[None, :], np.array([lower_eq.bias]),
        upper_eq.coeffs[None, :], np.array([upper_eq.bias]),
        np.array([l]), np.array([u]), keep_forms=True)
    return AffineForm(lc[0], float(lb[0])), AffineForm(uc[0], float(ub[0]))


def _concretize_arrays(lower_coeffs, lower_bias, upper_coeffs, upper_bias, box: Box):
    lo, hi = box.lo, box.hi
    lp = np.maximum(lower_coeffs, 0.0)
    ln = np.minimum(lower_coeffs, 0.0)
    up = np.maximum(upper_coeffs, 0.0)
    un = np.minimum(upper_coeffs, 0.0)
    val_lo = lp @ lo + ln @ hi + lower_bias
    val_hi = up @ hi + un @ lo + upper_bias
    return val_lo, val_hi


def symbolic_forward(net: Network, box: Box, propagator: Propagator = Propagator.SLR
                     ) -> ReachSet:
    """Symbolic propagation with linear relaxation (or plain concretization).

    Each node carries a lower and an upper affine form in the input
    variables, seeded with exact identities at the input layer. Affine
    layers combine forms by weight sign; concrete bounds are the
    intersection of form concretization with a Moore interval track, which
    keeps them at least as tight as naive_forward node-for-node. Hidden
    ReLU nodes are relaxed (Propagator.SLR) or concretized to constants
    when unstable (Propagator.SIP).
    """
    if propagator is Propagator.NAIVE:
        return naive_forward(net, box)
    _check_box(net, box)
    if not np.any(box.widths > 0.0):
        return _point_reach(net, box, symbolic=True)

    k = net.input_size
    lower_coeffs = np.eye(k)
    upper_coeffs = np.eye(k)
    lower_bias = np.zeros(k)
    upper_bias = np.zeros(k)
    conc_lo, conc_hi = box.lo, box.hi
    keep_forms = propagator is Propagator.SLR

    for layer in net.layers:
        W, b = layer.weights, layer.biases
        Wp = np.maximum(W, 0.0)
        Wn = np.minimum(W, 0.0)
        new_lc = Wp @ lower_coeffs + Wn @ upper_coeffs
        new_lb = Wp @ lower_bias + Wn @ upper_bias + b
        new_uc = Wp @ upper_coeffs + Wn @ lower_coeffs
        new_ub = Wp @ upper_bias + Wn @ lower_bias + b
        naive_lo, naive_hi = _moore_affine(W, b, conc_lo, conc_hi)
        sym_lo, sym_hi = _concretize_arrays(new_lc, new_lb, new_uc, new_ub, box)
        conc_lo = np.maximum(sym_lo, naive_lo)
        conc_hi = np.minimum(sym_hi, naive_hi)
        # both operands are sound, so the intersection is nonempty up to
        # rounding; guard against ulp-level inversion anyway
        conc_lo = np.minimum(conc_lo, conc_hi)
        lower_coeffs, lower_bias = new_lc, new_lb
        upper_coeffs, upper_bias = new_uc, new_ub
        if layer.activation is Activation.RELU:
            lower_coeffs, lower_bias, upper_coeffs, upper_bias = _relax_arrays(
                lower_coeffs, lower_bias, upper_coeffs, upper_bias,
                conc_lo, conc_hi, keep_forms)
            conc_lo = np.maximum(conc_lo, 0.0)
            conc_hi = np.maximum(conc_hi, 0.0)

    bounds = SymbolicBounds(lower_coeffs, lower_bias, upper_coeffs, upper_bias,
                            conc_lo, conc_hi)
    return ReachSet(conc_lo, conc_hi, bounds)


def concretize_forms(bounds: SymbolicBounds, box: Box) -> tuple[Interval, ...]:
    """Per-node interval [min of lower form, max of upper form] over box."""
    if bounds.input_size != box.ndim:
        raise DimensionMismatch(
            f"forms are over {bounds.input_size} variables, box has {box.ndim}")
    lo, hi = _concretize_arrays(bounds.lower_coeffs, bounds.lower_bias,
                                bounds.upper_coeffs, bounds.upper_bias, box)
    return tuple(Interval(float(l), float(h)) for l, h in zip(lo, hi))


def propagate(net: Network, box: Box, propagator: Propagator) -> ReachSet:
    """Dispatch to the configured propagator."""
    if propagator is Propagator.NAIVE:
        return naive_forward(net, box)
    return symbolic_forward(net, box, propagator)
