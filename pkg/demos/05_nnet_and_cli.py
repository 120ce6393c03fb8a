"""File formats and the command line: from a weights file to a verdict.

The library reads two model formats — its own JSON and the plain-text
NNet convention used by aircraft-advisory benchmark networks — and a JSON
property format with an optional argmax shorthand. The CLI front end
wires them to the counting engines and emits a machine-readable report.
This script writes both formats by hand, then drives the CLI in-process.

Run:  python3 demos/05_nnet_and_cli.py
"""

import contextlib
import io
import json
import tempfile
from pathlib import Path

import numpy as np

import relucount as rc
from relucount import cli

workdir = Path(tempfile.mkdtemp(prefix="relucount-demo-"))


def run_cli(args):
    """Invoke the CLI in-process, silencing its own report echo."""
    with contextlib.redirect_stdout(io.StringIO()), \
         contextlib.redirect_stderr(io.StringIO()):
        return cli.main(args)

# --- an NNet file, written out longhand: a 2-3-2 network -----------------
# Header: comment, then counts (layers, inputs, outputs, max layer size),
# then layer sizes, a legacy flag line, input ranges and normalization
# lines (parsed but unused), then row-major weights and biases per layer.
nnet_text = """// tiny advisory-style network, 2 inputs -> 2 scores
2,2,2,3,
2,3,2,
0,
-1.0,-1.0,
1.0,1.0,
0.0,0.0,0.0,
1.0,1.0,1.0,
0.6,-0.2,
0.1,0.8,
-0.5,0.5,
0.05,
-0.05,
0.0,
1.0,0.0,-1.0,
0.0,1.0,1.0,
0.0,
0.0,
"""
nnet_path = workdir / "tiny.nnet"
nnet_path.write_text(nnet_text)
net = rc.load_nnet(nnet_path)
print(f"loaded {nnet_path.name}: {net.input_size} inputs -> "
      f"{[l.rows for l in net.layers]} -> {net.output_size} outputs")
print(f"  f(0.3, 0.3) = {net.forward([0.3, 0.3])}")

# The same network round-trips through the canonical JSON format.
json_path = workdir / "tiny.json"
rc.save_json(net, json_path)
again = rc.load_json(json_path)
print(f"  JSON round trip reproduces outputs: "
      f"{np.array_equal(net.forward([0.3, 0.3]), again.forward([0.3, 0.3]))}")
print()

# --- a property file: "output 0 is not the advisory" ---------------------
prop_path = workdir / "prop.json"
prop_path.write_text(json.dumps({
    "input": [[-0.5, 0.5], [-0.5, 0.5]],
    "argmax": {"kind": "is_not_max", "index": 0},
}, indent=2))
print(f"property: over [-0.5,0.5]^2, output 0 must not be the maximum")
print()

# --- the CLI, driven in-process ------------------------------------------
# check: one classification of the whole box, refining until decided or
# the depth budget runs out. Exit code 0 = safe, 1 = violating, 2 = unknown.
for depth in ("0", "10"):
    out = workdir / f"check-{depth}.json"
    code = run_cli(["check", str(nnet_path), str(prop_path),
                    "--max-depth", depth, "--output", str(out)])
    rep = json.loads(out.read_text())
    print(f"check --max-depth {depth:>2}: exit {code}, "
          f"verdict {rep['verdict']}")
print()

# count: two-sided violation-rate bounds by volume.
out = workdir / "count.json"
run_cli(["count", str(nnet_path), str(prop_path),
         "--max-depth", "16", "--output", str(out)])
rep = json.loads(out.read_text())
print(f"count --max-depth 16: vr in [{rep['vr_lb']:.4f}, {rep['vr_ub']:.4f}]"
      f", exact={rep['exact']}, {rep['nodes_explored']} nodes")

# count-discrete: exact rate on a finite grid.
out = workdir / "discrete.json"
run_cli(["count-discrete", str(nnet_path), str(prop_path),
         "--grid", "101", "--output", str(out)])
rep = json.loads(out.read_text())
print(f"count-discrete --grid 101: vr = {rep['vr_lb']:.6f} exactly "
      f"({rep['nodes_explored']} boxes for {101 * 101} points)")
print()
print(f"reports written under {workdir} — every mode emits the same "
      f"JSON schema (docs/report-schema.json).")
