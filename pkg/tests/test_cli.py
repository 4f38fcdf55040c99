"""Command-line harness: runs, outputs, replays, and exit codes.

Uses a tiny two-drone scenario file so each invocation stays fast.
"""

import json
import os

import pytest

from dronedge import cli, fileio, scenarios
from dronedge.errors import ScenarioError

TINY = {
    "name": "tiny",
    "grid": {"width": 21, "height": 21, "spacing": 20.0},
    "depot": [10, 10],
    "servers": [{"id": 1, "location": [10, 12]}],
    "drones": [
        {"mission": [[10, 11], [10, 12], [11, 12], [11, 11]]},
        {"mission": [[9, 11], [9, 12], [8, 12]]},
    ],
}


@pytest.fixture
def tiny_path(tmp_path):
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(TINY))
    return str(path)


def test_parse_seeds_forms():
    assert cli.parse_seeds("1..4") == [1, 2, 3, 4]
    assert cli.parse_seeds("1,2,5") == [1, 2, 5]
    assert cli.parse_seeds("7") == [7]
    assert cli.parse_seeds("1..3,9") == [1, 2, 3, 9]


def test_config_validation():
    with pytest.raises(cli.UsageError):
        cli.ExperimentConfig(scenario="small20", seeds=[])
    with pytest.raises(cli.UsageError):
        cli.ExperimentConfig(scenario="small20", seeds=[1],
                             policies=["nonesuch"])
    with pytest.raises(cli.UsageError):
        cli.ExperimentConfig(scenario="small20", seeds=[1],
                             uncertainty_levels=[1.5])


def test_load_scenario_builtins_and_files(tiny_path):
    assert cli.load_scenario("small20").name == "small20"
    assert len(cli.load_scenario(tiny_path).drones) == 2
    with pytest.raises(cli.UsageError):
        cli.load_scenario("no-such-scenario")


def test_scenario_file_validation(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"grid": {"width": 21, "height": 21,
                                        "spacing": 20.0}}))
    with pytest.raises(ScenarioError):
        scenarios.parse_scenario(bad)
    bad.write_text("{not json")
    with pytest.raises(ScenarioError):
        scenarios.parse_scenario(bad)
    outside = dict(TINY, drones=[{"mission": [[30, 30]]}])
    bad.write_text(json.dumps(outside))
    with pytest.raises(ScenarioError):
        scenarios.parse_scenario(bad)


def test_run_writes_expected_artifacts(tiny_path, tmp_path):
    out = tmp_path / "out"
    rc = cli.main([
        "--scenario", tiny_path, "--seeds", "1", "--u", "0.2",
        "--policies", "proposed,follow_plan", "--out", str(out),
        "--emit-boxplot",
    ])
    assert rc == 0
    names = sorted(os.listdir(out))
    stem = "tiny_s1_u0p2"
    for suffix in ("_proposed.events", "_proposed.metrics.csv",
                   "_proposed.manifest.json", "_follow_plan.events",
                   "_follow_plan.metrics.csv", "_follow_plan.manifest.json",
                   "_compare.json"):
        assert f"{stem}{suffix}" in names
    assert "boxplot.json" in names
    manifest = json.loads((out / f"{stem}_proposed.manifest.json").read_text())
    assert manifest["seed"] == 1 and manifest["u"] == 0.2
    assert manifest["policy"] == "proposed"
    assert manifest["version"] == cli.__version__
    compare = json.loads((out / f"{stem}_compare.json").read_text())
    assert "proposed-follow_plan" in compare["deltas"]


def test_reruns_are_byte_identical(tiny_path, tmp_path):
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        rc = cli.main([
            "--scenario", tiny_path, "--seeds", "2", "--u", "0.3",
            "--policies", "proposed", "--out", str(out),
        ])
        assert rc == 0
        outs.append(out)
    for name in sorted(os.listdir(outs[0])):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), \
            f"{name} differs between identical reruns"


def test_trace_out_then_trace_in_replays(tiny_path, tmp_path):
    traces = tmp_path / "traces"
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert cli.main([
        "--scenario", tiny_path, "--seeds", "3", "--u", "0.3",
        "--policies", "proposed", "--out", str(out1),
        "--trace-out", str(traces),
    ]) == 0
    assert (traces / "trace_tiny_s3_u0p3.csv").exists()
    assert cli.main([
        "--scenario", tiny_path, "--seeds", "3", "--u", "0.3",
        "--policies", "proposed", "--out", str(out2),
        "--trace-in", str(traces),
    ]) == 0
    for name in sorted(os.listdir(out1)):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_usage_errors_exit_1(tmp_path, capsys):
    assert cli.main(["--scenario", "nonesuch", "--out",
                     str(tmp_path / "x")]) == 1
    assert cli.main(["--scenario", "small20", "--u", "2.0",
                     "--out", str(tmp_path / "y")]) == 1
    assert cli.main(["--scenario", "small20", "--policies", "bogus",
                     "--out", str(tmp_path / "z")]) == 1
    err = capsys.readouterr().err
    assert "error:" in err


def test_conservative_safety_flag_accepted(tiny_path, tmp_path):
    rc = cli.main([
        "--scenario", tiny_path, "--seeds", "1", "--u", "0",
        "--policies", "follow_plan", "--out", str(tmp_path / "o"),
        "--conservative-safety", "off",
    ])
    assert rc == 0
