"""Violation-rate analysis for feedforward ReLU networks.

The package answers two questions about a network N and a safety property
(P, Q): does every input in the box P produce an output satisfying Q, and
if not, what fraction of P violates it. Sound output bounds come from
interval or symbolic propagation with linear relaxation of unstable ReLU
nodes; counting refines the input box breadth-first, and randomized
estimators cover instances too large to count exactly.
"""

__version__ = "0.1.0"

from .approx import (EstimateResult, SplitEstimateConfig, build_tiny_vr_net,
                     mc_estimate, split_estimate, split_estimate_run)
from .bab import (BabConfig, BatchLayout, Frontier, evaluate_frontier, refine,
                  to_batch)
from .counting import (GridSpec, VrResult, brute_force_vr, exact_count,
                       exact_count_discrete)
from .errors import (DegenerateDimension, DimensionMismatch, GridTooLarge,
                     IndexOutOfRange, InvalidBounds, InvalidEpsilon,
                     MalformedModel, MalformedProperty, NonFiniteWeight,
                     NotContained, VerifierError)
from .geometry import (Box, Interval, bisect, interval_dot, volume_fraction,
                       widest_dim)
from .model import (Activation, AffineLayer, Network, load_json, load_nnet,
                    save_json)
from .propagation import (AffineForm, Propagator, ReachSet, SymbolicBounds,
                          concretize_forms, naive_forward, propagate,
                          relu_relax, symbolic_forward)
from .property import (ArgmaxKind, Atom, AtomOp, SafetyProperty, Verdict,
                       classify, desugar_argmax, parse_property)

__all__ = [
    "Activation", "AffineForm", "AffineLayer", "ArgmaxKind", "Atom", "AtomOp",
    "BabConfig", "BatchLayout", "Box", "DegenerateDimension",
    "DimensionMismatch", "EstimateResult", "Frontier", "GridSpec",
    "GridTooLarge", "IndexOutOfRange", "Interval", "InvalidBounds",
    "InvalidEpsilon", "MalformedModel", "MalformedProperty", "Network",
    "NonFiniteWeight", "NotContained", "Propagator", "ReachSet",
    "SafetyProperty", "SplitEstimateConfig", "SymbolicBounds", "Verdict",
    "VerifierError", "VrResult", "bisect", "brute_force_vr",
    "build_tiny_vr_net", "classify", "concretize_forms", "desugar_argmax",
    "evaluate_frontier", "exact_count", "exact_count_discrete",
    "interval_dot", "load_json", "load_nnet", "mc_estimate", "naive_forward",
    "parse_property", "propagate", "refine", "relu_relax", "save_json",
    "split_estimate", "split_estimate_run", "symbolic_forward", "to_batch",
    "volume_fraction", "widest_dim",
]
