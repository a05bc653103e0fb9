import csv
import io
import json
import math
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from pullback_hyperbolicity import __version__
from pullback_hyperbolicity.cli import main
from pullback_hyperbolicity.errors import ConfigError
from pullback_hyperbolicity.report import POINTS_COLUMNS, RAY_COLUMNS, dumps
from pullback_hyperbolicity.scenario import parse_scenario

GOLDEN = Path(__file__).parent / "golden"
SCENARIOS = Path(__file__).parents[1] / "scenarios"

W1 = """
[model]
preset = "strongly_coupled"

[background]
family = "linear_map"
C = [[0, 1, 0, 0], [0, 0, 1, 0]]

[analysis]
mode = "point"
"""


def run(tmp_path, text, *args, name="s.toml"):
    cfg = tmp_path / name
    cfg.write_text(text)
    out = tmp_path / "out"
    code = main([str(cfg), "--out", str(out), *args])
    return code, out


def load_report(out):
    return json.loads((out / "report.json").read_text())


def numbers_close(a, b):
    if isinstance(a, dict):
        return a.keys() == b.keys() and all(numbers_close(a[k], b[k]) for k in a)
    if isinstance(a, list):
        return len(a) == len(b) and all(numbers_close(x, y) for x, y in zip(a, b))
    if isinstance(a, float) or isinstance(b, float):
        return math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-14)
    return a == b


# -- golden files ----------------------------------------------------------


@pytest.mark.parametrize("case", ["w1_point", "w1_ray"])
def test_golden_exact(tmp_path, monkeypatch, case):
    src = GOLDEN / case
    monkeypatch.chdir(tmp_path)
    shutil.copy(src / "scenario.toml", tmp_path)
    assert main(["scenario.toml", "--out", "."]) == 0
    for f in src.iterdir():
        if f.name != "scenario.toml":
            assert (tmp_path / f.name).read_bytes() == f.read_bytes(), f.name


def test_golden_grid(tmp_path, monkeypatch):
    # round-off sized entries (det G1 ~ 1e-37) may differ across BLAS builds
    src = GOLDEN / "wave_grid"
    monkeypatch.chdir(tmp_path)
    shutil.copy(src / "scenario.toml", tmp_path)
    assert main(["scenario.toml", "--out", "."]) == 0
    assert numbers_close(load_report(tmp_path), json.loads((src / "report.json").read_text()))
    got = list(csv.reader(io.StringIO((tmp_path / "points.csv").read_text())))
    want = list(csv.reader(io.StringIO((src / "points.csv").read_text())))
    assert got[0] == want[0] == POINTS_COLUMNS
    for r1, r2 in zip(got[1:], want[1:]):
        for a, b in zip(r1, r2):
            try:
                assert math.isclose(float(a), float(b), rel_tol=1e-12, abs_tol=1e-14)
            except ValueError:
                assert a == b


def test_csv_columns(tmp_path):
    assert POINTS_COLUMNS == [
        "index", "x0", "x1", "x2", "x3", "sigma2", "xi", "detG1", "detG2",
        "n+G1", "n0G1", "n-G1", "n+G2", "n0G2", "n-G2", "hyperbolic",
    ]  # fmt: skip
    assert RAY_COLUMNS == ["lambda", "x0", "x1", "x2", "x3", "k0", "k1", "k2", "k3", "P"]


# -- reports ---------------------------------------------------------------


def test_w1_point_verdict(tmp_path):
    code, out = run(tmp_path, W1)
    assert code == 0
    rep = load_report(out)
    p = rep["points"][0]
    assert rep["aggregate"]["verdict"] == "NOT_HYPERBOLIC"
    assert p["det_G1"] == 0.0 and p["inertia_G1"] == [1, 2, 1] and p["sigma2"] == 1.0
    assert rep["tool"] == {"name": "pullback_hyperbolicity", "version": __version__}
    assert rep["scenario"]["background"]["C"] == [[0, 1, 0, 0], [0, 0, 1, 0]]
    assert rep["scenario"]["analysis"] == {"mode": "point", "seed": 0}


def test_verify_mode(tmp_path):
    code, out = run(tmp_path, (SCENARIOS / "verify.toml").read_text())
    assert code == 0
    v = load_report(out)["verify"]
    assert v["samples"] == 10_000 and v["pass"]
    assert all(r["max_residual"] <= 1e-10 for r in v["identities"].values())
    assert v["negative_control"]["fraction_nonsingular"] >= 0.99
    assert v["det_G2_exponent"]["confirmed_exponent"] == 2


def test_verify_failure_exit_code(tmp_path):
    text = W1.replace('mode = "point"', 'mode = "verify"') + "\n[verify]\nsamples = 50\n[tolerances]\nfactorization = 1e-300\n"
    code, out = run(tmp_path, text)
    assert code == 1
    assert not load_report(out)["verify"]["identities"]["factorization"]["pass"]


def test_domain_errors_are_recorded(tmp_path):
    text = """
[model]
preset = "afz"
[background]
family = "product_wave"
A = 0.8
B = 0.6
kappa = [1.0, 0.5, 0.0, 0.0]
mu = [1.0, 0.0, 0.7, 0.0]
[analysis]
mode = "point"
"""
    code, out = run(tmp_path, text)
    assert code == 0
    p = load_report(out)["points"][0]
    assert p["error"].startswith("DomainError") and p["sigma2"] < 0
    # G1 does not depend on the model and is still classified
    assert p["inertia_G1"][1] == 2 and p["det_G2"] is None
    rows = (out / "points.csv").read_text().splitlines()
    assert rows[1].split(",")[8] == ""


def test_chart_errors_are_recorded(tmp_path):
    text = """
[target]
geometry = "poincare_disk"
[model]
preset = "strongly_coupled"
[background]
family = "linear_map"
C = [[0, 1, 0, 0], [0, 0, 1, 0]]
[analysis]
mode = "grid"
[grid]
lo = [0, 0, 0, 0]
hi = [0, 2, 0, 0]
counts = [1, 3, 1, 1]
"""
    code, out = run(tmp_path, text)
    assert code == 0
    rep = load_report(out)
    errs = [p["error"] for p in rep["points"]]
    assert errs[0] is None and errs[1].startswith("ChartDomainError") and errs[2].startswith("ChartDomainError")
    assert rep["aggregate"]["n_errors"] == 2 and rep["aggregate"]["verdict"] == "NOT_HYPERBOLIC"


def test_ray_mode(tmp_path):
    code, out = run(tmp_path, (SCENARIOS / "ray_product_wave.toml").read_text())
    assert code == 0
    r = load_report(out)["ray"]
    assert r["termination"] == "span_end" and r["drift"] <= 1e-12
    rows = (out / "ray.csv").read_text().splitlines()
    assert rows[0] == ",".join(RAY_COLUMNS) and len(rows) == r["n_states"] + 1


def test_ray_without_real_root(tmp_path):
    text = W1.replace('mode = "point"', 'mode = "ray"') + "\n[ray]\nk_spatial = [1, 0, 0]\nbranch = 1\n"
    code, out = run(tmp_path, text)
    assert code == 0
    r = load_report(out)["ray"]
    assert r["null_root_note"] == "double_root" and r["termination"] == "degenerate_form"


def test_output_formats(tmp_path):
    code, out = run(tmp_path, W1 + '\n[output]\nformat = "json"\n')
    assert sorted(p.name for p in out.iterdir()) == ["report.json"]
    shutil.rmtree(out)
    code, out = run(tmp_path, W1 + '\n[output]\nformat = "csv"\n')
    assert sorted(p.name for p in out.iterdir()) == ["points.csv"]


def test_float_serialization():
    text = dumps({"a": 0.1, "b": [1.0, float("nan"), float("inf")], "c": 1e-300, "d": True, "e": None})
    assert '"a": 0.10000000000000001' in text
    assert "[1, null, null]" in text and "1e-300" in text
    assert json.loads(text)["d"] is True


def test_seed_override(tmp_path):
    text = """
[model]
preset = "afz"
[background]
family = "plane_wave"
A = 0.5
B = 0.5
kappa = [1.0, 1.0, 0.0, 0.0]
[analysis]
mode = "random"
[random]
samples = 4
lo = [-1, -1, -1, -1]
hi = [1, 1, 1, 1]
"""
    _, out = run(tmp_path, text, "--seed", "5")
    a = load_report(out)
    _, out = run(tmp_path, text, "--seed", "6")
    b = load_report(out)
    assert a["scenario"]["analysis"]["seed"] == 5
    assert a["points"][0]["x"] != b["points"][0]["x"]


# -- determinism -----------------------------------------------------------


def _run_in(tmp_path, text, threads):
    # same relative output dir every time, so the echoed scenario matches
    cfg = tmp_path / "s.toml"
    cfg.write_text(text)
    out = tmp_path / "same_out"
    if out.exists():
        shutil.rmtree(out)
    main([str(cfg), "--out", "same_out", "--threads", str(threads)])
    return {p.name: p.read_bytes() for p in sorted(out.iterdir())}


@pytest.mark.parametrize("name", sorted(p.name for p in SCENARIOS.glob("*.toml")))
def test_byte_identical_reports(tmp_path, monkeypatch, name):
    monkeypatch.chdir(tmp_path)
    text = (SCENARIOS / name).read_text()
    first = _run_in(tmp_path, text, 1)
    assert first == _run_in(tmp_path, text, 8)
    assert first == _run_in(tmp_path, text, 1)


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "s.toml"
    cfg.write_text(W1)
    res = subprocess.run(
        [sys.executable, "-m", "pullback_hyperbolicity", str(cfg), "--out", str(tmp_path / "o")],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0 and "NOT_HYPERBOLIC" in res.stdout


# -- configuration errors --------------------------------------------------


def config_error(tmp_path, capsys, text, *args):
    code, _ = run(tmp_path, text, *args)
    assert code == 2
    return capsys.readouterr().err


def test_unknown_mode(tmp_path, capsys):
    err = config_error(tmp_path, capsys, W1.replace('"point"', '"sweep"'))
    assert "[analysis.mode]" in err and "sweep" in err and "s.toml:10" in err


@pytest.mark.parametrize(
    "text,fragment",
    [
        (W1 + "\n[point]\ncolor = 1\n", "[point.color] unknown key"),
        (W1 + "\n[extras]\na = 1\n", "[extras] unknown section"),
        (W1.replace("[analysis]", "[analysis]\nseed = -1"), "[analysis.seed] must be >= 0"),
        (W1.replace("[analysis]", f"[analysis]\nseed = {2**64}"), "analysis.seed"),
        (W1.replace("[analysis]", "[analysis]\nthreads = 0"), "[analysis.threads]"),
        (W1.replace('mode = "point"', 'mode = "grid"') + "\n[grid]\nlo=[0,0,0,0]\nhi=[1,1,1,1]\ncounts=[1,0,1,1]\n", "[grid.counts]"),
        (W1.replace('mode = "point"', 'mode = "random"') + "\n[random]\nsamples=0\nlo=[0,0,0,0]\nhi=[1,1,1,1]\n", "[random.samples]"),
        (W1 + "\n[tolerances]\nrank = 0\n", "[tolerances.rank] must be > 0"),
        (W1 + "\n[ray]\nbranch = 1\n", "[ray] section does not apply"),
        (W1.replace('family = "linear_map"', 'family = "spiral"'), "[background.family]"),
        (W1.replace("C = [[0, 1, 0, 0], [0, 0, 1, 0]]", "C = [[0, 1, 0], [0, 0, 1]]"), "[background.C]"),
        (W1.replace("C = [[0, 1, 0, 0], [0, 0, 1, 0]]", "C = [[0, 1, 0, 0], [0, 0, 1, 0]]\nkappa = [1,0,0,0]"), "does not apply to linear_map"),
        (W1.replace('preset = "strongly_coupled"', 'preset = "afz"\nq = 2'), "[model.preset]"),
        (W1.replace('preset = "strongly_coupled"', "c = -0.5\nq = -1"), "[model.q] must be > 0"),
        (W1.replace('preset = "strongly_coupled"', "c = 0\nq = 1"), "[model.c] must be nonzero"),
        (W1 + "\n[target]\ngeometry = 'flat'\nc = 2\n", "[target.c]"),
        (W1 + "\n[point]\nx = [0, 0, 0]\n", "[point.x] must be a list of 4 numbers"),
        (W1 + "\n[output]\nformat = 'xml'\n", "[output.format]"),
        ("[analysis\nmode = 1", "s.toml"),
    ],
)
def test_config_errors_name_the_key(tmp_path, capsys, text, fragment):
    assert fragment in config_error(tmp_path, capsys, text)


def test_cli_override_errors(tmp_path, capsys):
    assert "--threads" in config_error(tmp_path, capsys, W1, "--threads", "0")
    assert "--seed" in config_error(tmp_path, capsys, W1, "--seed", "-3")


def test_missing_config_file(tmp_path, capsys):
    assert main([str(tmp_path / "nope.toml")]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_parse_defaults():
    sc = parse_scenario(W1)
    assert sc.geometry == "flat" and sc.mode_params == {"x": [0.0, 0.0, 0.0, 0.0]}
    assert sc.tolerances["rank"] == 1e-9 and sc.output_format == "json+csv"
    with pytest.raises(ConfigError):
        parse_scenario(W1.replace("[background]", "[background]\nmu = [0,0,0,1]"))
