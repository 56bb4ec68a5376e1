import json
import re
import subprocess
import sys

import pytest

from herglotz.cli import main

ERROR_LINE = re.compile(r"^error code=[a-z0-9_]+\.[a-z0-9_]+ message=\S.*\n$")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_derive_string(capsys):
    code, out, _ = run(capsys, "derive", "--preset", "string")
    assert code == 0
    assert out == "mu*D(phi,t,t) - T*D(phi,x,x) + gamma*D(phi,t) = 0\n"


def test_derive_classical(capsys):
    code, out, _ = run(capsys, "derive", "--preset", "string", "--classical")
    assert out == "mu*D(phi,t,t) - T*D(phi,x,x) = 0\n"


def test_derive_json_reports_reduction(capsys):
    code, out, _ = run(capsys, "derive", "--preset", "klein_gordon_1p1", "--format", "json")
    data = json.loads(out)
    assert data["conservative_reduction"] is True
    assert data["gamma"] == ["-c*gamma0", "-gamma1"]


def test_derive_problem_file(capsys, tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"coords": ["t"], "fields": ["q"], "kind": "ode-with-action",
                                "lagrangian": "D(q,t)^2/2 - q^2/2 - k*S"}))
    code, out, _ = run(capsys, "derive", "--problem", str(path), "--out", str(tmp_path / "o"))
    assert code == 0 and out == ""
    assert (tmp_path / "o" / "equations.txt").read_text() == "D(q,t,t) + k*D(q,t) + q = 0\n"
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    # the problem is embedded so the manifest stands alone
    assert manifest["herglotz"]["problem"]["lagrangian"]


def test_dispersion_critical_row(capsys):
    code, out, _ = run(capsys, "dispersion", "--gamma0", "2", "--k", "1")
    assert code == 0
    header, row = out.splitlines()
    assert header.split() == ["gamma0", "k", "regime", "re_lambda_plus", "im_lambda_plus",
                              "re_lambda_minus", "im_lambda_minus", "speed"]
    cells = row.split()
    assert cells[2] == "critical" and cells[3] == cells[5] == "-1.0"


def test_dispersion_json_mirror(capsys):
    _, out, _ = run(capsys, "dispersion", "--gamma0", "1,3", "--k", "1", "--format", "json")
    rows = json.loads(out)
    assert [r["regime"] for r in rows] == ["underdamped", "overdamped"]


def test_verify_oscillator(capsys):
    code, out, _ = run(capsys, "verify", "--preset", "oscillator", "--gamma", "0.1", "--steps", "4096")
    assert code == 0
    report = json.loads(out)
    assert report["ratio"] >= 100
    assert set(report) >= {"S0", "dS", "ref_dS", "ratio", "grid", "eps", "bump"}


def test_presets_listing(capsys):
    _, out, _ = run(capsys, "presets")
    assert out.splitlines()[0].startswith("oscillator: L = ")
    assert len(out.splitlines()) == 6


def test_simulate_oscillator_csv(capsys):
    code, out, _ = run(capsys, "simulate", "--preset", "oscillator", "--steps", "32")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "t,x,v,S,p,H" and len(lines) == 34


def test_flags_beat_config(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"herglotz": {"preset": "oscillator", "steps": 64, "params": {"gamma": 0.5}}}))
    code, _, _ = run(capsys, "simulate", "--config", str(cfg), "--steps", "32", "--out", str(tmp_path / "o"))
    assert code == 0
    eff = json.loads((tmp_path / "o" / "manifest.json").read_text())["herglotz"]
    assert eff["steps"] == 32 and eff["params"]["gamma"] == 0.5 and eff["params"]["m"] == 1.0


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["simulate", "--nope"],
        ["simulate", "--grid", "12"],
        ["derive"],
        ["simulate", "--preset", "oscillator", "--gamma0", "1"],
        ["simulate", "--preset", "oscillator", "--param", "m"],
        ["simulate", "--preset", "oscillator", "--steps", "4"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


@pytest.mark.parametrize(
    "content",
    [
        {"steps": 64, "colour": "red"},
        {"herglotz": {"params": {"gamma": 0.1, "zeta": 1}}},
        {"command": "derive", "herglotz": {}},
        {"herglotz": {"steps": "many"}},
        [1, 2],
    ],
)
def test_bad_config_is_rejected(capsys, tmp_path, content):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(content))
    code, out, err = run(capsys, "simulate", "--config", str(cfg))
    assert code == 2 and out == ""
    assert ERROR_LINE.match(err) and "code=cli.config" in err


def test_domain_errors_exit_1(capsys):
    code, out, err = run(capsys, "simulate", "--preset", "string", "--grid", "64,64")
    assert code == 1 and out == ""
    assert ERROR_LINE.match(err) and "code=fieldsim.courant" in err


def test_bad_problem_file_exits_1(capsys, tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"coords": ["t"], "fields": ["q"], "lagrangian": "q +"}))
    code, _, err = run(capsys, "derive", "--problem", str(path))
    assert code == 1 and "code=symexpr.parse" in err


def test_dispersion_rejects_nonpositive_k(capsys):
    code, _, err = run(capsys, "dispersion", "--gamma0", "1", "--k", "0")
    assert code == 1 and "code=dispersion.error" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "herglotz", "derive", "--preset", "oscillator"],
        capture_output=True, text=True, check=True,
    )
    assert proc.stdout == "m*D(x,t,t) + gamma*D(x,t) + U'(x) = 0\n"
