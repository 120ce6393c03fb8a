"""Command-line front end.

One verification job per invocation: load a model and a property, dispatch
to the requested mode, print a JSON report on standard output and a short
summary on standard error.

Exit codes: check mode maps its verdict to 0 (safe), 1 (violating),
2 (unknown); the counting and estimation modes exit 0 on success even when
the result is budget-limited. 64 flags a usage error, 65 unreadable or
malformed input files, 70 an internal failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import __version__
from .approx import SplitEstimateConfig, mc_estimate, split_estimate
from .bab import BabConfig, Frontier, evaluate_frontier, refine
from .counting import GridSpec, exact_count, exact_count_discrete
from .errors import VerifierError
from .model import Network, load_json, load_nnet
from .propagation import Propagator
from .property import SafetyProperty, Verdict, parse_property

EXIT_SAFE = 0
EXIT_VIOLATING = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_INTERNAL = 70

_CHECK_DEFAULT_DEPTH = 0
_COUNT_DEFAULT_DEPTH = 20
_APPROX_DEFAULT_DEPTH = 14


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags, which collides with the UNKNOWN verdict
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _grid_arg(text: str) -> tuple:
    try:
        pts = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("grid must be N or N,N,...") from None
    if not pts or any(p < 1 for p in pts):
        raise argparse.ArgumentTypeError("grid points must be >= 1")
    return pts


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="relucount",
                     description="Violation-rate analysis of ReLU networks.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="mode", required=True)

    common = _Parser(add_help=False)
    common.add_argument("model", help="model file (.json canonical or .nnet)")
    common.add_argument("property", help="property file (JSON)")
    common.add_argument("--propagator", choices=[p.value for p in Propagator],
                        default=Propagator.SLR.value)
    common.add_argument("--max-depth", type=_nonneg_int, default=None,
                        help="bisection depth cap (default: per mode)")
    common.add_argument("--workers", type=_positive_int,
                        default=os.cpu_count() or 1)
    common.add_argument("--chunk-size", type=_positive_int, default=4096)
    common.add_argument("--timeout-s", type=float, default=None)
    common.add_argument("--seed", type=int, default=0,
                        help="root seed for the randomized modes")
    common.add_argument("--output", default=None,
                        help="also write the JSON report to this path")

    p = sub.add_parser("check", parents=[common],
                       help="decide the property; exit 0/1/2 per verdict")
    p = sub.add_parser("count", parents=[common],
                       help="sound [vr_lb, vr_ub] by volume refinement")
    p = sub.add_parser("count-discrete", parents=[common],
                       help="exact violating fraction of a finite grid")
    p.add_argument("--grid", type=_grid_arg, default=(17,),
                   help="points per dimension, N or N,N,... (default 17)")
    p = sub.add_parser("approx", parents=[common],
                       help="randomized split-and-count estimate")
    p.add_argument("--splits", type=_nonneg_int, default=4)
    p.add_argument("--runs", type=_positive_int, default=30)
    p.add_argument("--samples-per-split", type=_positive_int, default=500)
    p.add_argument("--confidence", type=float, default=0.99)
    p = sub.add_parser("sample", parents=[common],
                       help="Monte Carlo estimate with a Hoeffding bound")
    p.add_argument("--samples", type=_positive_int, default=1_000_000)
    p.add_argument("--confidence", type=float, default=0.99)
    return parser


def _load_instance(args) -> tuple[Network, SafetyProperty]:
    if args.model.endswith(".nnet"):
        net = load_nnet(args.model)
    else:
        net = load_json(args.model)
    prop = parse_property(args.property, n_outputs=net.output_size)
    return net, prop


def _base_report(args, net=None) -> dict:
    return {
        "mode": args.mode,
        "model_path": args.model,
        "property_path": args.property,
        "vr_lb": None,
        "vr_ub": None,
        "point_estimate": None,
        "exact": None,
        "verdict": None,
        "nodes_explored": None,
        "max_depth_reached": None,
        "residual_volume": None,
        "violating_points": None,
        "total_points": None,
        "grid": None,
        "timed_out": None,
        "propagator": args.propagator,
        "workers": args.workers,
        "chunk_size": args.chunk_size,
        "seed": None,
        "splits": None,
        "runs": None,
        "samples_per_split": None,
        "samples": None,
        "confidence": None,
        "wall_time_ms": None,
        "tool_version": __version__,
    }


def _bab_config(args, default_depth: int) -> BabConfig:
    depth = args.max_depth if args.max_depth is not None else default_depth
    return BabConfig(max_depth=depth, chunk_size=args.chunk_size,
                     workers=args.workers,
                     propagator=Propagator(args.propagator))


def _run_check(args, report: dict, t0: float) -> int:
    net, prop = _load_instance(args)
    cfg = _bab_config(args, _CHECK_DEFAULT_DEPTH)
    # decision semantics: one certified violating sub-box settles the answer
    # as VIOLATING (a violation exists); SAFE requires certifying the whole
    # precondition; anything left at the depth cap stays UNKNOWN. With the
    # default depth 0 this is a single classification of the precondition.
    verdict = Verdict.UNKNOWN
    frontier = Frontier.root(prop.precondition)
    nodes = 0
    depth_seen = 0
    while len(frontier):
        if args.timeout_s is not None and time.perf_counter() - t0 > args.timeout_s:
            break
        verdicts = evaluate_frontier(net, frontier, prop, cfg)
        nodes += len(frontier)
        depth_seen = frontier.depth
        if any(v is Verdict.VIOLATING for v in verdicts):
            verdict = Verdict.VIOLATING
            break
        if frontier.depth >= cfg.max_depth:
            if all(v is Verdict.SAFE for v in verdicts) and not frontier.residual_boxes:
                verdict = Verdict.SAFE
            break
        _, _, frontier = refine(frontier, verdicts)
        if not len(frontier) and not frontier.residual_boxes:
            verdict = Verdict.SAFE
    report.update(verdict=verdict.value, nodes_explored=nodes,
                  max_depth_reached=depth_seen)
    summary = f"check: {verdict.value} (nodes={nodes}, depth={depth_seen})"
    code = {Verdict.SAFE: EXIT_SAFE, Verdict.VIOLATING: EXIT_VIOLATING,
            Verdict.UNKNOWN: EXIT_UNKNOWN}[verdict]
    return _emit(args, report, summary, code, t0)


def _run_count(args, report: dict, t0: float) -> int:
    net, prop = _load_instance(args)
    cfg = _bab_config(args, _COUNT_DEFAULT_DEPTH)
    res = exact_count(net, prop, cfg, timeout_s=args.timeout_s)
    report.update(vr_lb=res.vr_lb, vr_ub=res.vr_ub, exact=res.exact,
                  nodes_explored=res.nodes_explored,
                  max_depth_reached=res.max_depth_reached,
                  residual_volume=res.residual_volume,
                  timed_out=res.timed_out)
    summary = (f"count: vr in [{res.vr_lb:.6g}, {res.vr_ub:.6g}]"
               f" exact={res.exact} nodes={res.nodes_explored}")
    return _emit(args, report, summary, EXIT_SAFE, t0)


def _run_count_discrete(args, report: dict, t0: float) -> int:
    net, prop = _load_instance(args)
    cfg = _bab_config(args, _COUNT_DEFAULT_DEPTH)
    pts = args.grid
    if len(pts) == 1:
        pts = pts * net.input_size
    grid = GridSpec(pts)
    res = exact_count_discrete(net, prop, grid, cfg)
    report.update(vr_lb=res.vr_lb, vr_ub=res.vr_ub, exact=True,
                  nodes_explored=res.nodes_explored,
                  max_depth_reached=res.max_depth_reached,
                  residual_volume=0.0,
                  violating_points=res.violating_points,
                  total_points=res.total_points,
                  grid=list(pts), timed_out=False)
    summary = (f"count-discrete: vr={res.vr_lb:.6g} "
               f"({res.violating_points}/{res.total_points} points)")
    return _emit(args, report, summary, EXIT_SAFE, t0)


def _run_approx(args, report: dict, t0: float) -> int:
    net, prop = _load_instance(args)
    cfg = SplitEstimateConfig(
        s=args.splits, samples_per_split=args.samples_per_split,
        runs=args.runs, confidence=args.confidence, seed=args.seed,
        backend=_bab_config(args, _APPROX_DEFAULT_DEPTH))
    res = split_estimate(net, prop, cfg)
    report.update(vr_lb=res.lower_bound, point_estimate=res.point_estimate,
                  exact=False, seed=args.seed, splits=args.splits,
                  runs=args.runs, samples_per_split=args.samples_per_split,
                  confidence=args.confidence)
    summary = (f"approx: point={res.point_estimate:.6g} "
               f"lower={res.lower_bound:.6g} runs={args.runs}")
    return _emit(args, report, summary, EXIT_SAFE, t0)


def _run_sample(args, report: dict, t0: float) -> int:
    net, prop = _load_instance(args)
    res = mc_estimate(net, prop, args.samples, args.confidence, args.seed)
    report.update(vr_lb=res.lower_bound, point_estimate=res.point_estimate,
                  exact=False, seed=args.seed, samples=args.samples,
                  confidence=args.confidence)
    summary = (f"sample: p_hat={res.point_estimate:.6g} "
               f"lower={res.lower_bound:.6g} n={args.samples}")
    return _emit(args, report, summary, EXIT_SAFE, t0)


def _emit(args, report: dict, summary: str, code: int, t0: float) -> int:
    report["wall_time_ms"] = int(round((time.perf_counter() - t0) * 1000.0))
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    sys.stderr.write(summary + "\n")
    return code


_RUNNERS = {
    "check": _run_check,
    "count": _run_count,
    "count-discrete": _run_count_discrete,
    "approx": _run_approx,
    "sample": _run_sample,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    report = _base_report(args)
    t0 = time.perf_counter()
    try:
        return _RUNNERS[args.mode](args, report, t0)
    except (VerifierError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"relucount: {exc}\n")
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        sys.stderr.write(f"relucount: internal error: {exc!r}\n")
        return EXIT_INTERNAL


def entrypoint():
    raise SystemExit(main(sys.argv[1:]))
