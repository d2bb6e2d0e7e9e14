"""Command-line entry point: exit codes, outputs, config merging and determinism."""

import json

import numpy as np
import pytest

from drspace import cli
from drspace.geometry import SpaceParams
from drspace.ineqlab import CATALOG, CheckReport, CheckRow
from drspace.specfun import phi_dr

BUMP = ["--family", "bump", "--a", "2", "--count", "1"]


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_phi_prints_one_value(capsys):
    code, out, _ = run(["phi", "--m", "2", "--k", "1", "--lambda", "1.5+0.2i", "--t", "2.0"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 1
    want = phi_dr(SpaceParams(2, 1), 1.5 + 0.2j, 2.0)
    assert cli.parse_complex(lines[0]) == pytest.approx(want, rel=1e-14)


def test_parse_complex():
    assert cli.parse_complex("1.5+0.2i") == 1.5 + 0.2j
    assert cli.parse_complex("-0.3i") == -0.3j
    assert cli.parse_complex(2) == 2
    with pytest.raises(cli.ConfigError):
        cli.parse_complex("one")


def test_verify_strip_bound_passes(capsys):
    code, out, _ = run(["verify", "P1", "--m", "2", "--k", "1"], capsys)
    assert code == 0
    assert json.loads(out)["P1"]["pass"] is True


def test_verify_wrong_class_is_invalid(capsys):
    code, _, err = run(["verify", "R1", "--p", "1", "--q", "1.5", "--family", "powertail",
                        "--p-class", "2"], capsys)
    assert code == 2 and "class mismatch" in err


def test_verify_failure_exit_one(capsys):
    """Without refinement a constant-bearing check has no drift and cannot pass."""
    code, out, _ = run(["verify", "HY1", "--no-refine", *BUMP], capsys)
    assert code == 1 and json.loads(out)["HY1"]["pass"] is False


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["phi", "--lambda", "x", "--t", "1"],
    ["phi", "--lambda", "1"],
    ["phi", "--m", "3", "--k", "0", "--lambda", "1", "--t", "1"],
    ["phi", "--lambda", "1", "--t", "-1"],
    ["verify", "Z9"],
    ["decay", "--p", "3"],
    ["modulus", "--p", "1.5", "--r", "1", "--member", "7"],
])
def test_invalid_input_exit_two(argv, capsys):
    assert run(argv, capsys)[0] == 2


@pytest.mark.parametrize("cid", list(CATALOG))
def test_every_check_reachable(cid, monkeypatch, capsys):
    seen = []

    def fake(check_id, space, family, grids, seed, params, refine=True):
        seen.append(check_id)
        return CheckReport(check_id, space.summary(), family.label(), 1.0, 1.0, 1.0, 1.0, True,
                           0.0, CATALOG[check_id].kind, (CheckRow(0, "", 1.0, 1.0, 1.0),))

    monkeypatch.setattr(cli, "run_check", fake)
    assert run(["verify", cid], capsys)[0] == 0
    assert seen == [cid]
    seen.clear()
    assert run(["verify", "all"], capsys)[0] == 0
    assert seen == list(CATALOG)


# ---------------------------------------------------------------- config files


def _config(tmp_path, body):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(body))
    return str(path)


def test_config_with_flag_override(tmp_path, capsys):
    cfg = _config(tmp_path, {"schema": 1, "command": "phi", "space": {"m": 2, "k": 0},
                             "params": {"lam": "2", "t": "1.0"}})
    _, out, _ = run(["phi", "--config", cfg], capsys)
    assert cli.parse_complex(out) == pytest.approx(phi_dr(SpaceParams(2, 0), 2.0, 1.0), rel=1e-14)
    _, out, _ = run(["phi", "--config", cfg, "--t", "3.0", "--k", "1"], capsys)
    assert cli.parse_complex(out) == pytest.approx(phi_dr(SpaceParams(2, 1), 2.0, 3.0), rel=1e-14)


@pytest.mark.parametrize("body", [
    {"schema": 2, "params": {"lam": "1", "t": "1"}},
    {"schema": 1, "command": "cfun", "params": {"lam": "1", "t": "1"}},
    {"schema": 1, "grid": {"bogus": 1}, "params": {"lam": "1", "t": "1"}},
    [1, 2],
])
def test_malformed_config(tmp_path, capsys, body):
    assert run(["phi", "--config", _config(tmp_path, body)], capsys)[0] == 2


def test_missing_config_file(tmp_path, capsys):
    assert run(["phi", "--config", str(tmp_path / "none.json")], capsys)[0] == 2


# ---------------------------------------------------------------- artifacts


def test_verify_outputs_deterministic(tmp_path, capsys):
    outs = []
    for i in range(2):
        prefix = str(tmp_path / f"run{i}")
        assert run(["verify", "R1", "--seed", "3", "--out", prefix, *BUMP], capsys)[0] == 0
        outs.append((open(prefix + ".csv", "rb").read(), open(prefix + ".json", "rb").read()))
    assert outs[0] == outs[1]
    assert outs[0][0].startswith(b"check_id,space,family,member,params,")


def test_density_and_cfun(tmp_path, capsys):
    code, out, _ = run(["density", "--m", "2", "--k", "0", "--xi", "0,1,2"], capsys)
    rows = out.strip().splitlines()
    assert code == 0 and rows[0] == "xi,density" and len(rows) == 4
    assert float(rows[1].split(",")[1]) == 0.0
    code, out, _ = run(["cfun", "--lambda", "1+0.5i"], capsys)
    assert code == 0 and np.isfinite(cli.parse_complex(out))


def test_transform_then_invert(tmp_path, capsys, calibrated):
    spectrum = str(tmp_path / "spectrum.csv")
    prof = str(tmp_path / "prof.csv")
    assert run(["transform", "--out", spectrum, *BUMP], capsys)[0] == 0
    assert open(spectrum).readline().strip() == "xi,eta,re,im,density"
    assert run(["invert", "--input", spectrum, "--out", prof, "--r-max", "3"], capsys)[0] == 0
    data = np.loadtxt(prof, delimiter=",", skiprows=1)
    r, re = data[:, 0], data[:, 1]
    want = np.where(r < 2, np.exp(1 - 1 / (1 - np.minimum(r / 2, 0.999999) ** 2)), 0.0)
    assert np.max(np.abs(re - want)) < 5e-3


def test_invert_rejects_off_line_samples(tmp_path, capsys):
    spectrum = str(tmp_path / "spectrum.csv")
    run(["transform", "--out", spectrum, "--eta", "0.2", *BUMP], capsys)
    assert run(["invert", "--input", spectrum, "--out", str(tmp_path / "p.csv")], capsys)[0] == 2


def test_mean_modulus_decay(tmp_path, capsys, calibrated):
    mean = str(tmp_path / "mean.csv")
    assert run(["mean", "--t", "1", "--out", mean, *BUMP], capsys)[0] == 0
    assert open(mean).readline().strip() == "r,re,im"
    tab = str(tmp_path / "mod.csv")
    code, out, _ = run(["modulus", "--p", "1.5", "--r", "0.5", "--out", tab, *BUMP], capsys)
    data = np.loadtxt(tab, delimiter=",", skiprows=1)
    assert code == 0 and float(out) == pytest.approx(data[:, 1].max())
    dec = str(tmp_path / "decay.csv")
    code, out, _ = run(["decay", "--p", "1.5", "--n", "11", "--out", dec, *BUMP], capsys)
    info = json.loads(out)
    assert code == 0 and info["rate"] == pytest.approx(2 / 3)
    d = np.loadtxt(dec, delimiter=",", skiprows=1)
    assert np.all(d[:, 3] <= 1 + 1e-4)  # measured norm ratio below the operator bound


def test_sweep_over_spaces(tmp_path, capsys):
    cfg = _config(tmp_path, {"schema": 1, "command": "sweep",
                             "params": {"spaces": [[2, 1], [2, 0]], "checks": ["P1", "R1"],
                                        "families": [{"name": "bump", "a": 2.0, "count": 1}]}})
    prefix = str(tmp_path / "sw")
    code, out, _ = run(["sweep", "--config", cfg, "--out", prefix], capsys)
    assert code == 0 and len(out.strip().splitlines()) == 4
    keys = json.load(open(prefix + ".json"))
    assert any(k.startswith("R1|") for k in keys)
