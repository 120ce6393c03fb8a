"""Shared fixtures: random instance corpus, tiny reference nets, file helpers.

The corpus is fully seeded so every test run sees identical instances:
seed i always produces the same network and property. Single-atom
thresholds come from an explicit two-regime mixture relative to the
output's empirical spread: most instances are "separated" (boundary at
least 1.2 standard deviations from the value at a random interior point,
so the box is largely or wholly decided), and a seeded minority are
"crossing" (boundary near that value, exercising deep refinement).
Crossing instances are rarer for 3-input nets because the volume of
boundary-straddling cells shrinks only like 2^(-depth/ndim).
"""

import numpy as np
import pytest

import relucount as rc


def make_net(rng, k, hidden, n_out):
    sizes = [k] + list(hidden) + [n_out]
    layers = []
    for i in range(len(sizes) - 1):
        fan_in = sizes[i]
        w = rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=(sizes[i + 1], sizes[i]))
        b = rng.normal(0.0, 0.1, size=sizes[i + 1])
        act = rc.Activation.IDENTITY if i == len(sizes) - 2 else rc.Activation.RELU
        layers.append(rc.AffineLayer(w, b, act))
    return rc.Network(tuple(layers))


def make_instance(seed):
    """Deterministic random instance: 2-3 inputs, <=2 hidden layers of <=16."""
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 4))
    hidden = [int(rng.integers(4, 17)) for _ in range(int(rng.integers(1, 3)))]
    n_out = int(rng.integers(1, 4))
    net = make_net(rng, k, hidden, n_out)

    lo = rng.uniform(-1.0, 0.0, size=k)
    hi = lo + rng.uniform(0.5, 1.5, size=k)
    pre = rc.Box(np.stack([lo, hi], axis=1))

    if n_out >= 2 and k == 2 and rng.random() < 0.3:
        kind = rc.ArgmaxKind.IS_NOT_MAX if rng.random() < 0.5 else rc.ArgmaxKind.IS_MAX
        clauses = rc.desugar_argmax(kind, int(rng.integers(n_out)), n_out)
    else:
        coeffs = rng.normal(0.0, 1.0, size=n_out)
        op = rc.AtomOp.GE if rng.random() < 0.5 else rc.AtomOp.LE
        x_star = rng.uniform(lo, hi)
        center = float(coeffs @ net.forward(x_star))
        probe = rng.uniform(lo, hi, size=(256, k))
        spread = float(np.std(net.forward_batch(probe) @ coeffs)) or 1.0
        p_cross = 0.45 if k == 2 else 0.10
        sep_floor = 2.0 if k == 2 else 2.5
        if rng.random() < p_cross:
            bias = center + 0.5 * spread * float(rng.standard_normal())
        else:
            sign = -1.0 if rng.random() < 0.5 else 1.0
            bias = center + sign * (sep_floor + float(rng.exponential())) * spread
        clauses = ((rc.Atom(coeffs, op, bias),),)
    return net, rc.SafetyProperty(pre, clauses)


CORPUS_SIZE = 120


@pytest.fixture(scope="session")
def corpus():
    return [make_instance(seed) for seed in range(CORPUS_SIZE)]


@pytest.fixture(scope="session")
def brute65(corpus):
    """Brute-force violation rates at 65 points per dimension, per instance."""
    out = []
    for net, prop in corpus:
        grid = rc.GridSpec.uniform(65, prop.precondition.ndim)
        out.append(rc.brute_force_vr(net, prop, grid))
    return out


def identity_net(k=1):
    return rc.Network((rc.AffineLayer(np.eye(k), np.zeros(k),
                                      rc.Activation.IDENTITY),))


def relu_net():
    """y = relu(x), built as a 1-1-1 network."""
    return rc.Network((
        rc.AffineLayer(np.array([[1.0]]), np.array([0.0]), rc.Activation.RELU),
        rc.AffineLayer(np.array([[1.0]]), np.array([0.0]), rc.Activation.IDENTITY),
    ))


def witness_net():
    """y = relu(x) - x via two hidden paths; true range on [-1,1] is [0,1].

    Hidden nodes are h1 = relu(x) and h2 = relu(x + 1); on [-1, 1] the
    second is just x + 1, so h1 - h2 + 1 = relu(x) - x.
    """
    return rc.Network((
        rc.AffineLayer(np.array([[1.0], [1.0]]), np.array([0.0, 1.0]),
                       rc.Activation.RELU),
        rc.AffineLayer(np.array([[1.0, -1.0]]), np.array([1.0]),
                       rc.Activation.IDENTITY),
    ))


def single_ge_property(box, n_out, bias, index=0):
    if not isinstance(box, rc.Box):
        box = rc.Box(box)
    coeffs = np.zeros(n_out)
    coeffs[index] = 1.0
    return rc.SafetyProperty(box, ((rc.Atom(coeffs, rc.AtomOp.GE, bias),),))


def write_nnet(net, path, comment="// generated for tests"):
    """Write a network in the NNet text convention.

    Floats are written with repr so reparsing reproduces them bit-exactly.
    Normalization lines hold placeholder values; the loader discards them.
    """
    k = net.input_size
    sizes = [k] + [l.rows for l in net.layers]
    lines = [comment]
    lines.append(f"{len(net.layers)},{k},{net.output_size},{net.max_layer_size},")
    lines.append(",".join(str(s) for s in sizes) + ",")
    lines.append("0,")
    lines.append(",".join(["-1.0"] * k) + ",")
    lines.append(",".join(["1.0"] * k) + ",")
    lines.append(",".join(["0.0"] * (k + 1)) + ",")
    lines.append(",".join(["1.0"] * (k + 1)) + ",")
    for layer in net.layers:
        for row in layer.weights:
            lines.append(",".join(repr(float(v)) for v in row) + ",")
        for v in layer.biases:
            lines.append(repr(float(v)) + ",")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def sample_box(rng, box, n):
    return rng.uniform(box.lo, box.hi, size=(n, box.ndim))


def random_subbox(rng, box):
    """Random non-degenerate axis-aligned sub-box of box."""
    w = box.widths
    lo = box.lo + rng.uniform(0.0, 0.4, size=box.ndim) * w
    hi = box.hi - rng.uniform(0.0, 0.4, size=box.ndim) * w
    hi = np.maximum(hi, lo + 1e-9 * np.maximum(w, 1.0))
    hi = np.minimum(hi, box.hi)
    return rc.Box(np.stack([lo, hi], axis=1))
