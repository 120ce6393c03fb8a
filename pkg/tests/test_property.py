import json

import numpy as np
import pytest

import relucount as rc
from conftest import make_instance, sample_box


def _box(*pairs):
    return rc.Box(pairs)


def _ge(coeffs, bias):
    return rc.Atom(np.asarray(coeffs, dtype=float), rc.AtomOp.GE, bias)


def _le(coeffs, bias):
    return rc.Atom(np.asarray(coeffs, dtype=float), rc.AtomOp.LE, bias)


# ----------------------------------------------------------------------- atoms

def test_atom_holds_at():
    a = _ge([1.0, -1.0], 0.5)
    assert a.holds_at([2.0, 1.0])
    assert a.holds_at([1.5, 1.0])  # boundary counts as holding
    assert not a.holds_at([1.0, 1.0])
    b = _le([2.0], 1.0)
    assert b.holds_at([0.5]) and not b.holds_at([0.51])


def test_atom_negation_duality():
    # Away from the boundary, GE and LE with the same data are complements.
    rng = np.random.default_rng(0)
    for _ in range(200):
        c = rng.normal(size=3)
        bias = rng.normal()
        y = rng.normal(size=3)
        if abs(float(c @ y) - bias) < 1e-9:
            continue
        assert _ge(c, bias).holds_at(y) != _le(c, bias).holds_at(y)


def test_atom_validation():
    with pytest.raises(rc.MalformedProperty):
        rc.Atom(np.zeros((2, 2)), rc.AtomOp.GE, 0.0)
    with pytest.raises(rc.MalformedProperty):
        rc.Atom(np.array([]), rc.AtomOp.GE, 0.0)
    with pytest.raises(rc.MalformedProperty):
        rc.Atom(np.array([np.inf]), rc.AtomOp.LE, 0.0)


# ------------------------------------------------------------------ properties

def test_property_validation():
    box = _box((0.0, 1.0))
    with pytest.raises(rc.MalformedProperty):
        rc.SafetyProperty(box, ())
    with pytest.raises(rc.MalformedProperty):
        rc.SafetyProperty(box, ((),))
    with pytest.raises(rc.DimensionMismatch):
        rc.SafetyProperty(box, ((_ge([1.0], 0.0),), (_ge([1.0, 0.0], 0.0),)))


def test_holds_matches_holds_batch():
    rng = np.random.default_rng(1)
    prop = rc.SafetyProperty(
        _box((0.0, 1.0)),
        ((_ge([1.0, 0.0], 0.2), _le([0.0, 1.0], -0.3)),
         (_le([1.0, 1.0], 1.5),)))
    Y = rng.normal(size=(100, 2))
    batch = prop.holds_batch(Y)
    for i in range(100):
        assert batch[i] == prop.holds(Y[i])


def test_holds_batch_shape_check():
    prop = rc.SafetyProperty(_box((0.0, 1.0)), ((_ge([1.0, 0.0], 0.0),),))
    with pytest.raises(rc.DimensionMismatch):
        prop.holds_batch(np.zeros((5, 3)))


def test_restricted_keeps_clauses():
    prop = rc.SafetyProperty(_box((0.0, 1.0)), ((_ge([1.0], 0.5),),))
    sub = prop.restricted(_box((0.25, 0.5)))
    assert sub.clauses is prop.clauses or sub.clauses == prop.clauses
    assert sub.precondition.lo[0] == 0.25


# ---------------------------------------------------------------------- argmax

def test_desugar_is_not_max():
    clauses = rc.desugar_argmax(rc.ArgmaxKind.IS_NOT_MAX, 0, 3)
    assert len(clauses) == 1 and len(clauses[0]) == 2
    got = sorted(tuple(a.coeffs) for a in clauses[0])
    assert got == [(-1.0, 0.0, 1.0), (-1.0, 1.0, 0.0)]
    assert all(a.op is rc.AtomOp.GE and a.bias == 0.0 for a in clauses[0])


def test_desugar_is_max():
    clauses = rc.desugar_argmax(rc.ArgmaxKind.IS_MAX, 1, 3)
    assert len(clauses) == 2 and all(len(cl) == 1 for cl in clauses)
    got = sorted(tuple(cl[0].coeffs) for cl in clauses)
    assert got == [(-1.0, 1.0, 0.0), (0.0, 1.0, -1.0)]


def test_desugar_index_errors():
    for kind in rc.ArgmaxKind:
        with pytest.raises(rc.IndexOutOfRange):
            rc.desugar_argmax(kind, 3, 3)
        with pytest.raises(rc.IndexOutOfRange):
            rc.desugar_argmax(kind, -1, 3)
        with pytest.raises(rc.IndexOutOfRange):
            rc.desugar_argmax(kind, 0, 1)


def test_desugar_semantics_brute():
    rng = np.random.default_rng(2)
    box = _box((0.0, 1.0))
    for _ in range(300):
        y = rng.normal(size=4)
        top = int(np.argmax(y))
        for i in range(4):
            not_max = rc.SafetyProperty(box, rc.desugar_argmax(
                rc.ArgmaxKind.IS_NOT_MAX, i, 4))
            is_max = rc.SafetyProperty(box, rc.desugar_argmax(
                rc.ArgmaxKind.IS_MAX, i, 4))
            assert not_max.holds(y) == (top != i)
            assert is_max.holds(y) == (top == i)


# --------------------------------------------------------------------- parsing

def _write(path, doc):
    path.write_text(json.dumps(doc))
    return path


def test_parse_property_basic(tmp_path):
    doc = {
        "input": [[0.0, 1.0], [-1.0, 0.5]],
        "clauses": [[{"coeffs": [1.0, -1.0], "op": "ge", "bias": 0.25},
                     {"coeffs": [0.0, 1.0], "op": "le", "bias": 0.0}]],
    }
    prop = rc.parse_property(_write(tmp_path / "p.json", doc), n_outputs=2)
    assert prop.precondition == _box((0.0, 1.0), (-1.0, 0.5))
    assert len(prop.clauses) == 1 and len(prop.clauses[0]) == 2
    a0, a1 = prop.clauses[0]
    assert a0.op is rc.AtomOp.GE and a0.bias == 0.25
    assert a1.op is rc.AtomOp.LE
    assert np.array_equal(a0.coeffs, [1.0, -1.0])


def test_parse_property_argmax_merged(tmp_path):
    doc = {
        "input": [[0.0, 1.0]],
        "clauses": [[{"coeffs": [1.0, 0.0, 0.0], "op": "ge", "bias": -5.0}]],
        "argmax": {"kind": "is_max", "index": 0},
    }
    prop = rc.parse_property(_write(tmp_path / "p.json", doc), n_outputs=3)
    assert len(prop.clauses) == 3  # 1 explicit + 2 desugared


def test_parse_property_argmax_only(tmp_path):
    doc = {"input": [[0.0, 1.0]], "argmax": {"kind": "is_not_max", "index": 2}}
    prop = rc.parse_property(_write(tmp_path / "p.json", doc), n_outputs=3)
    assert len(prop.clauses) == 1 and len(prop.clauses[0]) == 2


def test_parse_property_errors(tmp_path):
    bad_docs = [
        {"clauses": []},                                     # missing input
        {"input": [[1.0, 0.0]], "clauses": []},              # inverted bounds
        {"input": [[0.0, 1.0]]},                             # no clauses at all
        {"input": [[0.0, 1.0]], "clauses": [[]]},            # empty clause
        {"input": [[0.0, 1.0]],
         "clauses": [[{"coeffs": [1.0], "op": "eq", "bias": 0.0}]]},
        {"input": [[0.0, 1.0]],
         "clauses": [[{"coeffs": [1.0], "bias": 0.0}]]},     # missing op
        {"input": [[0.0, 1.0]],
         "argmax": {"kind": "is_max", "index": 0}},          # needs n_outputs
    ]
    for i, doc in enumerate(bad_docs):
        p = _write(tmp_path / f"bad{i}.json", doc)
        n = 3 if "argmax" in doc and i == 6 else None
        with pytest.raises(rc.MalformedProperty):
            rc.parse_property(p, n_outputs=None)
    p = tmp_path / "notjson.json"
    p.write_text("{broken")
    with pytest.raises(rc.MalformedProperty):
        rc.parse_property(p)


def test_parse_property_size_mismatch(tmp_path):
    doc = {"input": [[0.0, 1.0]],
           "clauses": [[{"coeffs": [1.0, 2.0], "op": "ge", "bias": 0.0}]]}
    with pytest.raises(rc.DimensionMismatch):
        rc.parse_property(_write(tmp_path / "p.json", doc), n_outputs=3)


# ---------------------------------------------------------------- classification

def _interval_reach(*pairs):
    lo = np.array([p[0] for p in pairs], dtype=float)
    hi = np.array([p[1] for p in pairs], dtype=float)
    return rc.ReachSet(lo, hi)


_DUMMY_BOX = _box((0.0, 1.0))


def test_classify_single_atom_examples():
    prop = rc.SafetyProperty(_DUMMY_BOX, ((_ge([1.0], 0.5),),))
    assert rc.classify(_interval_reach((0.6, 1.0)), prop, _DUMMY_BOX) is rc.Verdict.SAFE
    assert rc.classify(_interval_reach((0.0, 0.4)), prop, _DUMMY_BOX) is rc.Verdict.VIOLATING
    assert rc.classify(_interval_reach((0.0, 1.0)), prop, _DUMMY_BOX) is rc.Verdict.UNKNOWN


def test_classify_boundary_is_not_violating():
    # Certainty is strict on the falsifying side: an atom whose upper bound
    # exactly equals the threshold might still hold somewhere.
    prop = rc.SafetyProperty(_DUMMY_BOX, ((_ge([1.0], 0.5),),))
    assert rc.classify(_interval_reach((0.5, 1.0)), prop, _DUMMY_BOX) is rc.Verdict.SAFE
    assert rc.classify(_interval_reach((0.0, 0.5)), prop, _DUMMY_BOX) is rc.Verdict.UNKNOWN


def test_classify_clause_logic():
    safe_atom = _ge([1.0, 0.0], -10.0)
    false_atom = _ge([0.0, 1.0], 10.0)
    reach = _interval_reach((0.0, 1.0), (0.0, 1.0))
    both = rc.SafetyProperty(_DUMMY_BOX, ((safe_atom,), (false_atom,)))
    assert rc.classify(reach, both, _DUMMY_BOX) is rc.Verdict.VIOLATING
    disj = rc.SafetyProperty(_DUMMY_BOX, ((false_atom, safe_atom),))
    assert rc.classify(reach, disj, _DUMMY_BOX) is rc.Verdict.SAFE
    undecided = _ge([1.0, 0.0], 0.5)
    mixed = rc.SafetyProperty(_DUMMY_BOX, ((safe_atom,), (undecided,)))
    assert rc.classify(reach, mixed, _DUMMY_BOX) is rc.Verdict.UNKNOWN


def test_classify_uses_output_dependencies():
    # y0 = y1 = x, so y0 - y1 == 0 everywhere. Interval reasoning on the
    # separate outputs cannot see that; the symbolic forms can.
    net = rc.Network((rc.AffineLayer(
        np.array([[1.0], [1.0]]), np.zeros(2), rc.Activation.IDENTITY),))
    box = _box((-1.0, 1.0))
    prop = rc.SafetyProperty(box, ((_ge([1.0, -1.0], -0.1),),))
    naive = rc.propagate(net, box, rc.Propagator.NAIVE)
    slr = rc.propagate(net, box, rc.Propagator.SLR)
    assert rc.classify(naive, prop, box) is rc.Verdict.UNKNOWN
    assert rc.classify(slr, prop, box) is rc.Verdict.SAFE


def test_classify_dimension_check():
    prop = rc.SafetyProperty(_DUMMY_BOX, ((_ge([1.0, 0.0], 0.0),),))
    with pytest.raises(rc.DimensionMismatch):
        rc.classify(_interval_reach((0.0, 1.0)), prop, _DUMMY_BOX)


def _verdicts_to_depth(net, prop, box, propagator, depth):
    """Yield (box, verdict, child_verdicts) over a fixed bisection tree."""
    verdict = rc.classify(rc.propagate(net, box, propagator), prop, box)
    if depth == 0:
        yield box, verdict, None
        return
    d = rc.widest_dim(box)
    if box.widths[d] == 0.0:
        yield box, verdict, None
        return
    kids = rc.bisect(box, d)
    child_verdicts = [rc.classify(rc.propagate(net, kid, propagator), prop, kid)
                      for kid in kids]
    yield box, verdict, child_verdicts
    for kid in kids:
        yield from _verdicts_to_depth(net, prop, kid, propagator, depth - 1)


def test_verdict_soundness_sampling():
    rng = np.random.default_rng(3)
    checked = 0
    for seed in range(25):
        net, prop = make_instance(seed)
        for box, verdict, _ in _verdicts_to_depth(
                net, prop, prop.precondition, rc.Propagator.SLR, 3):
            if verdict is rc.Verdict.UNKNOWN:
                continue
            ok = prop.holds_batch(net.forward_batch(sample_box(rng, box, 200)))
            if verdict is rc.Verdict.SAFE:
                assert bool(np.all(ok))
            else:
                assert not bool(np.any(ok))
            checked += 1
    assert checked > 30


def test_naive_verdicts_stable_under_refinement():
    # Naive intervals nest exactly under box nesting, so a decided parent
    # forces the identical verdict on both children.
    for seed in range(40):
        net, prop = make_instance(seed)
        for _, verdict, kids in _verdicts_to_depth(
                net, prop, prop.precondition, rc.Propagator.NAIVE, 3):
            if kids is None or verdict is rc.Verdict.UNKNOWN:
                continue
            assert kids[0] is verdict and kids[1] is verdict


def test_no_propagator_flips_a_decided_parent():
    flip = {rc.Verdict.SAFE: rc.Verdict.VIOLATING,
            rc.Verdict.VIOLATING: rc.Verdict.SAFE}
    for seed in range(40):
        net, prop = make_instance(seed)
        for propagator in (rc.Propagator.SLR, rc.Propagator.SIP):
            for _, verdict, kids in _verdicts_to_depth(
                    net, prop, prop.precondition, propagator, 3):
                if kids is None or verdict is rc.Verdict.UNKNOWN:
                    continue
                assert flip[verdict] not in kids
