"""Safety properties: input precondition, output postcondition, classification.

A property is a box precondition P plus a postcondition Q in conjunctive
form: a conjunction of clauses, each clause a disjunction of linear atoms
coeffs . y <= bias or coeffs . y >= bias over the network outputs. The
violation set is where Q fails.

classify() decides a box soundly from its reachable set: SAFE means Q holds
on the whole image, VIOLATING means Q fails on the whole image, UNKNOWN
means the bounds cannot tell.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .errors import (DimensionMismatch, IndexOutOfRange, InvalidBounds,
                     MalformedProperty)
from .geometry import Box
from .propagation import ReachSet


class AtomOp(enum.Enum):
    LE = "le"
    GE = "ge"


class Verdict(enum.Enum):
    SAFE = "SAFE"
    VIOLATING = "VIOLATING"
    UNKNOWN = "UNKNOWN"


class ArgmaxKind(enum.Enum):
    IS_NOT_MAX = "is_not_max"
    IS_MAX = "is_max"


@dataclass(frozen=True)
class Atom:
    """One linear inequality coeffs . y (<=|>=) bias over the outputs."""

    coeffs: np.ndarray
    op: AtomOp
    bias: float

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.float64)
        if c.ndim != 1 or c.shape[0] == 0:
            raise MalformedProperty("atom coefficients must be a non-empty vector")
        if not (np.all(np.isfinite(c)) and np.isfinite(self.bias)):
            raise MalformedProperty("atom has non-finite entries")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "bias", float(self.bias))

    def holds_at(self, y) -> bool:
        v = float(self.coeffs @ np.asarray(y, dtype=np.float64))
        return v <= self.bias if self.op is AtomOp.LE else v >= self.bias


Clause = tuple  # disjunction of Atom


@dataclass(frozen=True)
class SafetyProperty:
    """Precondition box P plus postcondition Q as clauses of atoms."""

    precondition: Box
    clauses: tuple

    def __post_init__(self):
        clauses = tuple(tuple(cl) for cl in self.clauses)
        if not clauses:
            raise MalformedProperty("property needs at least one clause")
        if any(len(cl) == 0 for cl in clauses):
            raise MalformedProperty("empty clause (unsatisfiable disjunction)")
        sizes = {a.coeffs.shape[0] for cl in clauses for a in cl}
        if len(sizes) != 1:
            raise DimensionMismatch(f"atoms disagree on output size: {sorted(sizes)}")
        object.__setattr__(self, "clauses", clauses)

    @property
    def n_outputs(self) -> int:
        return self.clauses[0][0].coeffs.shape[0]

    def holds(self, y) -> bool:
        """Exact postcondition check at one output point."""
        return all(any(a.holds_at(y) for a in cl) for cl in self.clauses)

    def holds_batch(self, Y) -> np.ndarray:
        """Vectorized postcondition check; returns a boolean vector."""
        Y = np.asarray(Y, dtype=np.float64)
        if Y.ndim != 2 or Y.shape[1] != self.n_outputs:
            raise DimensionMismatch(
                f"outputs have shape {Y.shape}, expected (n, {self.n_outputs})")
        ok = np.ones(Y.shape[0], dtype=bool)
        for cl in self.clauses:
            cl_ok = np.zeros(Y.shape[0], dtype=bool)
            for a in cl:
                vals = Y @ a.coeffs
                cl_ok |= vals <= a.bias if a.op is AtomOp.LE else vals >= a.bias
            ok &= cl_ok
        return ok

    def restricted(self, box: Box) -> "SafetyProperty":
        """Same postcondition over a sub-region of the precondition."""
        return SafetyProperty(box, self.clauses)


def desugar_argmax(kind: ArgmaxKind, index: int, n_outputs: int) -> tuple:
    """Expand an argmax condition on output `index` into linear clauses.

    IS_NOT_MAX(i): one clause, some j beats i (y_j - y_i >= 0).
    IS_MAX(i): n-1 clauses, i beats every j (y_i - y_j >= 0).
    """
    if n_outputs < 2 or not 0 <= index < n_outputs:
        raise IndexOutOfRange(
            f"argmax index {index} invalid for {n_outputs} outputs")
    diffs = []
    for j in range(n_outputs):
        if j == index:
            continue
        c = np.zeros(n_outputs)
        if kind is ArgmaxKind.IS_NOT_MAX:
            c[j], c[index] = 1.0, -1.0
        else:
            c[index], c[j] = 1.0, -1.0
        diffs.append(Atom(c, AtomOp.GE, 0.0))
    if kind is ArgmaxKind.IS_NOT_MAX:
        return (tuple(diffs),)
    return tuple((a,) for a in diffs)


def _parse_atom(entry, idx, n_outputs) -> Atom:
    if not isinstance(entry, dict):
        raise MalformedProperty(f"atom {idx} is not an object")
    try:
        coeffs, op, bias = entry["coeffs"], entry["op"], entry["bias"]
    except KeyError as exc:
        raise MalformedProperty(f"atom {idx} missing field {exc}") from None
    try:
        op = AtomOp(op)
    except ValueError:
        raise MalformedProperty(f"atom {idx} op must be 'le' or 'ge', got {op!r}") from None
    try:
        c = np.array(coeffs, dtype=np.float64)
    except (TypeError, ValueError):
        raise MalformedProperty(f"atom {idx} has non-numeric coefficients") from None
    atom = Atom(c, op, bias)
    if n_outputs is not None and atom.coeffs.shape[0] != n_outputs:
        raise DimensionMismatch(
            f"atom {idx} has {atom.coeffs.shape[0]} coefficients, expected {n_outputs}")
    return atom


def parse_property(path, n_outputs: int | None = None) -> SafetyProperty:
    """Load a property document, desugaring any argmax condition.

    The document is {"input": [[lo,hi],...], "clauses": [[atom,...],...]}
    with optional {"argmax": {"kind": "is_not_max"|"is_max", "index": i}}
    merged into the clauses. Pass the network's output size to validate
    coefficient lengths and to desugar argmax.
    """
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MalformedProperty(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or "input" not in doc:
        raise MalformedProperty("property document must be an object with 'input'")
    try:
        pre = Box(doc["input"])
    except (InvalidBounds, DimensionMismatch) as exc:
        raise MalformedProperty(f"bad precondition: {exc}") from None
    except (TypeError, ValueError):
        raise MalformedProperty("precondition must be a list of [lo, hi] pairs") from None

    clauses = []
    raw = doc.get("clauses", [])
    if not isinstance(raw, list):
        raise MalformedProperty("'clauses' must be an array of arrays")
    for ci, raw_clause in enumerate(raw):
        if not isinstance(raw_clause, list) or not raw_clause:
            raise MalformedProperty(f"clause {ci} must be a non-empty array of atoms")
        clauses.append(tuple(_parse_atom(a, f"{ci}.{ai}", n_outputs)
                             for ai, a in enumerate(raw_clause)))

    if "argmax" in doc:
        amx = doc["argmax"]
        if not isinstance(amx, dict) or "kind" not in amx or "index" not in amx:
            raise MalformedProperty("'argmax' needs 'kind' and 'index'")
        try:
            kind = ArgmaxKind(amx["kind"])
        except ValueError:
            raise MalformedProperty(f"unknown argmax kind {amx['kind']!r}") from None
        if n_outputs is None:
            raise MalformedProperty("output size required to desugar argmax")
        clauses.extend(desugar_argmax(kind, int(amx["index"]), n_outputs))

    if not clauses:
        raise MalformedProperty("property has no clauses")
    return SafetyProperty(pre, tuple(clauses))


_TRUE, _FALSE, _UNDECIDED = 1, -1, 0


def _atom_bound(atom: Atom, reach: ReachSet, box: Box) -> tuple[float, float]:
    """Sound interval for coeffs . y over the reach set.

    Always computes the interval-arithmetic bound from the per-output
    intervals; when output forms are available, also concretizes the
    sign-combined forms over the input box (which keeps cross-output
    dependencies such as y_i - y_j) and intersects the two.
    """
    c = atom.coeffs
    if c.shape[0] != reach.n_outputs:
        raise DimensionMismatch(
            f"atom over {c.shape[0]} outputs, reach set has {reach.n_outputs}")
    cp = np.maximum(c, 0.0)
    cn = np.minimum(c, 0.0)
    lo = float(cp @ reach.out_lo + cn @ reach.out_hi)
    hi = float(cp @ reach.out_hi + cn @ reach.out_lo)
    b = reach.bounds
    if b is not None:
        comb_lo_c = cp @ b.lower_coeffs + cn @ b.upper_coeffs
        comb_lo_b = cp @ b.lower_bias + cn @ b.upper_bias
        comb_hi_c = cp @ b.upper_coeffs + cn @ b.lower_coeffs
        comb_hi_b = cp @ b.upper_bias + cn @ b.lower_bias
        blo, bhi = box.lo, box.hi
        s_lo = float(np.maximum(comb_lo_c, 0.0) @ blo
                     + np.minimum(comb_lo_c, 0.0) @ bhi + comb_lo_b)
        s_hi = float(np.maximum(comb_hi_c, 0.0) @ bhi
                     + np.minimum(comb_hi_c, 0.0) @ blo + comb_hi_b)
        lo = max(lo, s_lo)
        hi = min(hi, s_hi)
        if lo > hi:
            lo = hi
    return lo, hi


def _atom_status(atom: Atom, reach: ReachSet, box: Box) -> int:
    lo, hi = _atom_bound(atom, reach, box)
    if atom.op is AtomOp.GE:
        if lo >= atom.bias:
            return _TRUE
        if hi < atom.bias:
            return _FALSE
    else:
        if hi <= atom.bias:
            return _TRUE
        if lo > atom.bias:
            return _FALSE
    return _UNDECIDED


def classify(reach: ReachSet, prop: SafetyProperty, box: Box) -> Verdict:
    """Sound verdict for one box from its reachable set.

    SAFE when every clause has a certainly-true atom; VIOLATING when some
    clause is certainly false in every atom; otherwise UNKNOWN. Certainty is
    strict on the falsifying side, so boundary-touching regions stay
    UNKNOWN.
    """
    all_true = True
    for cl in prop.clauses:
        statuses = [_atom_status(a, reach, box) for a in cl]
        if all(s == _FALSE for s in statuses):
            return Verdict.VIOLATING
        if not any(s == _TRUE for s in statuses):
            all_true = False
    return Verdict.SAFE if all_true else Verdict.UNKNOWN
