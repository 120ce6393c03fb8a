import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import numpy as np
import pytest

import relucount as rc
from relucount.cli import main
from conftest import identity_net, make_net, write_nnet

SCHEMA = json.loads(
    (Path(__file__).resolve().parent.parent / "docs" / "report-schema.json")
    .read_text())


@pytest.fixture()
def files(tmp_path):
    """Identity model plus three 1-d properties with known status."""
    model = tmp_path / "identity.json"
    rc.save_json(identity_net(1), model)

    def prop_file(name, bias):
        p = tmp_path / name
        p.write_text(json.dumps({
            "input": [[0.0, 1.0]],
            "clauses": [[{"coeffs": [1.0], "op": "ge", "bias": bias}]],
        }))
        return str(p)

    return {
        "model": str(model),
        "safe": prop_file("safe.json", -10.0),
        "violating": prop_file("viol.json", 10.0),
        "threshold": prop_file("half.json", 0.5),
        "tmp": tmp_path,
    }


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    report = json.loads(out.out) if out.out else None
    return code, report, out.err


# ------------------------------------------------------------------ exit codes

def test_check_exit_codes(capsys, files):
    code, rep, _ = _run(capsys, ["check", files["model"], files["safe"]])
    assert code == 0 and rep["verdict"] == "SAFE"
    code, rep, _ = _run(capsys, ["check", files["model"], files["violating"]])
    assert code == 1 and rep["verdict"] == "VIOLATING"
    code, rep, _ = _run(capsys, ["check", files["model"], files["threshold"]])
    assert code == 2 and rep["verdict"] == "UNKNOWN"


def test_check_refinement_finds_witness(capsys, files):
    # at depth 2 the sub-box [0, 0.25] certifies a violation of y >= 0.5
    code, rep, _ = _run(capsys, ["check", files["model"], files["threshold"],
                                 "--max-depth", "2"])
    assert code == 1 and rep["verdict"] == "VIOLATING"
    assert rep["max_depth_reached"] == 2


def test_usage_errors(capsys, files):
    assert main([]) == 64
    assert main(["frobnicate", files["model"], files["safe"]]) == 64
    assert main(["check", files["model"], files["safe"], "--max-depth", "-1"]) == 64
    assert main(["count-discrete", files["model"], files["safe"],
                 "--grid", "zero"]) == 64


def test_data_errors(capsys, files, tmp_path):
    missing = str(tmp_path / "nope.json")
    assert main(["check", missing, files["safe"]]) == 65
    assert main(["check", files["model"], missing]) == 65
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert main(["check", str(broken), files["safe"]]) == 65
    assert main(["check", files["model"], str(broken)]) == 65


def test_version_flag(capsys):
    assert main(["--version"]) == 0
    assert capsys.readouterr().out.strip() == rc.__version__


# --------------------------------------------------------------------- reports

def test_reports_validate_against_schema(capsys, files):
    invocations = [
        ["check", files["model"], files["threshold"]],
        ["count", files["model"], files["threshold"], "--max-depth", "8"],
        ["count-discrete", files["model"], files["threshold"], "--grid", "5"],
        ["approx", files["model"], files["threshold"], "--splits", "1",
         "--runs", "3", "--samples-per-split", "50"],
        ["sample", files["model"], files["threshold"], "--samples", "200"],
    ]
    for argv in invocations:
        _, rep, _ = _run(capsys, argv)
        jsonschema.validate(rep, SCHEMA)
        assert rep["mode"] == argv[0]
        assert rep["tool_version"] == rc.__version__


def test_count_report_values(capsys, files):
    code, rep, err = _run(capsys, ["count", files["model"], files["threshold"],
                                   "--max-depth", "20"])
    assert code == 0
    assert rep["vr_lb"] == 0.5 - 2.0 ** -20
    assert rep["vr_ub"] == 0.5
    assert rep["exact"] is False and rep["timed_out"] is False
    assert "count:" in err


def test_count_discrete_report_values(capsys, files):
    code, rep, _ = _run(capsys, ["count-discrete", files["model"],
                                 files["threshold"], "--grid", "5"])
    assert code == 0
    assert rep["violating_points"] == 2 and rep["total_points"] == 5
    assert rep["vr_lb"] == 0.4 and rep["vr_ub"] == 0.4
    assert rep["grid"] == [5]


def test_grid_replicates_per_dimension(capsys, tmp_path):
    model = tmp_path / "id2.json"
    rc.save_json(identity_net(2), model)
    prop = tmp_path / "p.json"
    prop.write_text(json.dumps({
        "input": [[0.0, 1.0], [0.0, 1.0]],
        "clauses": [[{"coeffs": [1.0, 0.0], "op": "ge", "bias": -10.0}]],
    }))
    _, rep, _ = _run(capsys, ["count-discrete", str(model), str(prop),
                              "--grid", "5"])
    assert rep["grid"] == [5, 5] and rep["total_points"] == 25
    _, rep, _ = _run(capsys, ["count-discrete", str(model), str(prop),
                              "--grid", "5,3"])
    assert rep["grid"] == [5, 3] and rep["total_points"] == 15


def test_sample_report_values(capsys, files):
    code, rep, _ = _run(capsys, ["sample", files["model"], files["threshold"],
                                 "--samples", "2000", "--seed", "5"])
    assert code == 0
    assert rep["samples"] == 2000 and rep["seed"] == 5
    assert rep["point_estimate"] == pytest.approx(0.5, abs=0.05)
    assert rep["vr_lb"] <= rep["point_estimate"]
    assert rep["vr_ub"] is None


def test_approx_zero_splits_matches_count(capsys, files):
    _, count_rep, _ = _run(capsys, ["count", files["model"], files["threshold"],
                                    "--max-depth", "14"])
    _, approx_rep, _ = _run(capsys, ["approx", files["model"], files["threshold"],
                                     "--splits", "0", "--runs", "1"])
    assert approx_rep["point_estimate"] == count_rep["vr_lb"]
    assert approx_rep["splits"] == 0 and approx_rep["runs"] == 1


# ---------------------------------------------------------------- determinism

def _strip_timing(rep):
    return {k: v for k, v in rep.items() if k != "wall_time_ms"}


def test_reports_identical_across_workers(capsys, files):
    base = None
    for workers in ("1", "4", "8"):
        for chunk in ("1", "4096"):
            _, rep, _ = _run(capsys, ["count", files["model"], files["threshold"],
                                      "--max-depth", "12",
                                      "--workers", workers, "--chunk-size", chunk])
            stripped = _strip_timing(rep)
            stripped.pop("workers")
            stripped.pop("chunk_size")
            if base is None:
                base = stripped
            else:
                assert stripped == base


def test_output_file_matches_stdout(capsys, files):
    out_path = files["tmp"] / "report.json"
    _, rep, _ = _run(capsys, ["count", files["model"], files["threshold"],
                              "--max-depth", "6", "--output", str(out_path)])
    assert json.loads(out_path.read_text()) == rep


# ------------------------------------------------------------------- nnet path

def test_check_reads_nnet(capsys, tmp_path):
    net = make_net(np.random.default_rng(0), 2, [6], 1)
    model = tmp_path / "net.nnet"
    write_nnet(net, model)
    prop = tmp_path / "p.json"
    prop.write_text(json.dumps({
        "input": [[-0.5, 0.5], [-0.5, 0.5]],
        "clauses": [[{"coeffs": [1.0], "op": "ge", "bias": -100.0}]],
    }))
    code, rep, _ = _run(capsys, ["check", str(model), str(prop)])
    assert code == 0 and rep["verdict"] == "SAFE"


# ------------------------------------------------------------------ subprocess

def test_console_entrypoint_subprocess(tmp_path):
    model = tmp_path / "identity.json"
    rc.save_json(identity_net(1), model)
    prop = tmp_path / "p.json"
    prop.write_text(json.dumps({
        "input": [[0.0, 1.0]],
        "clauses": [[{"coeffs": [1.0], "op": "ge", "bias": 10.0}]],
    }))
    run = subprocess.run(
        [sys.executable, "-m", "relucount", "check", str(model), str(prop)],
        capture_output=True, text=True)
    assert run.returncode == 1
    rep = json.loads(run.stdout)
    assert rep["verdict"] == "VIOLATING"
