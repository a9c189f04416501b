import json
import math
import subprocess
import sys

import numpy as np
import pytest

from schmidtsphere.cli import COMMANDS, run
from schmidtsphere.sampling import random_coupling

XY = {"kind": "distinguishable", "factors": [{"E": [[0, 1], [1, 0]], "F": {"re": [[0, 0], [0, 0]], "im": [[0, -1], [1, 0]]}}]}


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        p = tmp_path / name
        p.write_text(json.dumps(obj))
        return str(p)

    out = {
        "xy": write("xy.json", XY),
        "bell": write("bell.json", {"kind": "distinguishable", "re": [[0.7071067811865476, 0], [0, 0.7071067811865476]]}),
        "prod": write("prod.json", {"kind": "distinguishable", "re": [[1, 0], [0, 0]]}),
        "bad": write("bad.json", {"kind": "distinguishable", "factors": [{"E": [[0, 1], [0, 0]], "F": [[1, 0], [0, 1]]}]}),
        "gen": write("gen.json", {"breakpoints": [0, 0.5, 1], "segments": [{"identity": True}, {"E": [[1, 0], [0, -1]], "F": [[0, 1], [1, 0]]}]}),
        "id": write("id.json", {"breakpoints": [0, 0.7853981634], "segments": [{"identity": True}]}),
        "dir": tmp_path,
    }
    H0 = random_coupling("distinguishable", 2, 2, np.random.default_rng(0))
    (tmp_path / "rand.json").write_text(json.dumps(H0.to_dict()))
    out["rand"] = str(tmp_path / "rand.json")
    return out


def test_no_args_and_unknown(capsys):
    assert run([]) == 1
    assert "usage" in capsys.readouterr().out
    assert run(["frobnicate"]) == 1
    assert "usage" in capsys.readouterr().err
    assert run(["--help"]) == 0


def test_factorize(files, capsys):
    assert run(["factorize", "--state", files["bell"], "--check"]) == 0
    out = capsys.readouterr().out
    report = json.loads(out.splitlines()[0])
    assert np.allclose(report["sigma"], [2**-0.5] * 2)
    assert report["residual"] <= 1e-12
    assert "0.70710678" in out.splitlines()[-1]


def test_field(files, capsys):
    assert run(["field", "--h0", files["xy"]]) == 0
    report = json.loads(capsys.readouterr().out.splitlines()[0])
    assert np.allclose(report["field"], [[0, -1], [1, 0]])


def test_evolve_reduced_writes_artifacts(files, capsys):
    out = files["dir"] / "o"
    args = ["evolve-reduced", "--h0", files["xy"], "--sigma0", "1,0", "--T", str(math.pi / 4), "--dt", "0.01", "--out", str(out)]
    assert run(args) == 0
    summary = capsys.readouterr().out.strip().splitlines()
    assert len(summary) == 1 and summary[0].startswith("evolve-reduced")
    rows = (out / "trajectory.csv").read_text().splitlines()
    assert rows[0] == "t,sigma_1,sigma_2"
    last = [float(v) for v in rows[-1].split(",")]
    assert np.allclose(last[1:], [2**-0.5] * 2, atol=1e-12)
    report = json.loads((out / "report.json").read_text())
    assert report["points"] == len(rows) - 1


def test_evolve_full(files, capsys):
    out = files["dir"] / "full"
    assert run(["evolve-full", "--h0", files["xy"], "--state", files["prod"], "--schedule", files["gen"], "--dt", "0.001", "--out", str(out)]) == 0
    rows = (out / "trajectory.csv").read_text().splitlines()
    assert rows[0].startswith("t,re_11") and rows[0].endswith("s_1,s_2")
    assert run(["evolve-full", "--h0", files["xy"], "--state", files["prod"], "--T", "0.7853981633974483", "--dt", "0.001"]) == 0
    assert "0.70710678" in capsys.readouterr().out


def test_lift_and_singular_exit(files, capsys):
    assert run(["lift", "--h0", files["xy"], "--sigma0", "0.8,0.6", "--T", "0.2", "--dt", "0.05"]) == 0
    report = json.loads(capsys.readouterr().out.splitlines()[0])
    assert len(report["compensators"]) == 5
    assert run(["lift", "--h0", files["rand"], "--sigma0", "0.7071067811865476,0.7071067811865476", "--T", "0.2", "--dt", "0.05"]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_verify_equivalence(files, capsys):
    assert run(["verify-equivalence", "--h0", files["xy"], "--sigma0", "1,0", "--T", str(math.pi / 4), "--dt", "0.001"]) == 0
    report = json.loads(capsys.readouterr().out.splitlines()[0])
    assert report["max_dev"] <= 1e-6


def test_verify_equivalence_spec_example(files, capsys):
    argv = ["verify-equivalence", "--h0", files["xy"], "--schedule", files["id"], "--sigma0", "1,0", "--T", "0.7853981634", "--dt", "1e-4"]
    assert run(argv) == 0
    assert json.loads(capsys.readouterr().out.splitlines()[0])["max_dev"] <= 1e-6


def test_csv_uses_17_digits(files):
    out = files["dir"] / "digits"
    assert run(["evolve-reduced", "--h0", files["xy"], "--sigma0", "1,0", "--T", "0.3", "--dt", "0.1", "--out", str(out)]) == 0
    row = (out / "trajectory.csv").read_text().splitlines()[2].split(",")
    assert abs(float(row[1]) - math.cos(0.1)) <= 1e-15
    assert row[2] == "%.17g" % float(row[2])


def test_verify_lie(capsys):
    assert run(["verify-lie", "--kind", "bosonic", "--d1", "3", "--trials", "3"]) == 0
    assert "verify-lie PASS" in capsys.readouterr().out


def test_rank_bounds_stabilize(files, capsys):
    assert run(["rank", "--h0", files["xy"]]) == 0
    assert json.loads(capsys.readouterr().out.splitlines()[0])["rank"] == 1
    assert run(["bounds", "--h0", files["xy"]]) == 0
    report = json.loads(capsys.readouterr().out.splitlines()[0])
    assert report["speed_bound"] == pytest.approx(2)
    assert report["control_time_lower_bound"] == pytest.approx(math.pi / 8)
    assert run(["stabilize", "--h0", files["xy"], "--sigma0", "0.8,0.6", "--samples", "2"]) == 0
    assert json.loads(capsys.readouterr().out.splitlines()[0])["residual"] <= 1e-10


def test_reach_is_deterministic(files):
    outs = []
    for k, jobs in enumerate(["1", "1", "3"]):
        d = files["dir"] / f"reach{k}"
        assert run(["reach", "--h0", files["rand"], "--sigma0", "0.8,0.6", "--T", "1", "--trials", "12", "--seed", "9", "--jobs", jobs, "--out", str(d)]) == 0
        outs.append((d / "trajectory.csv").read_bytes())
    assert outs[0] == outs[1] == outs[2]


@pytest.mark.parametrize("argv", [
    ["field"],
    ["evolve-reduced", "--h0", "{xy}", "--sigma0", "1,1", "--T", "1", "--dt", "0.1"],
    ["evolve-reduced", "--h0", "{xy}", "--sigma0", "1,0", "--T", "1", "--dt", "-1"],
    ["field", "--h0", "{bad}"],
    ["field", "--h0", "/nonexistent.json"],
    ["rank", "--h0", "{xy}", "--bogus"],
])
def test_validation_errors_exit_2(files, capsys, argv):
    argv = [a.format(**files) for a in argv]
    assert run(argv) == 2
    assert "error" in capsys.readouterr().err


def test_error_message_has_path(files, capsys):
    run(["field", "--h0", files["bad"]])
    assert "factors[0].E not Hermitian" in capsys.readouterr().err


def test_every_command_is_wired():
    from schmidtsphere.cli import HANDLERS

    assert set(HANDLERS) == set(COMMANDS)


def test_module_entry_point(files):
    r = subprocess.run([sys.executable, "-m", "schmidtsphere", "bounds", "--h0", files["xy"]], capture_output=True, text=True)
    assert r.returncode == 0 and "speed_bound=2" in r.stdout
    r = subprocess.run([sys.executable, "-m", "schmidtsphere", "nope"], capture_output=True, text=True)
    assert r.returncode == 1
