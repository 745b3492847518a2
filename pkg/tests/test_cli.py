"""Command-line front end: strict config parsing, artifact layout,
determinism, flag overrides, and the exit-code contract."""

import hashlib
import json

import pytest
from click.testing import CliRunner

import stochwave.cli as cli_mod
from stochwave.cli import ConfigError, main, parse_config

GRID = {"M": 4, "N": 4, "T": 1.0}
WEIGHT = {"s": 0.7, "lambda": 0.9, "beta": 0.3, "xstar": 1.3, "mconst": 0.25}

# admissible weight setup, frozen alongside the acceptance sweep
GOOD_CARLEMAN = {
    "grid": {"M": 15, "N": 1792, "T": 3.5},
    "weight": {
        "s": 2.0, "lambda": 0.05, "beta": 0.5, "xstar": 1.5,
        "mconst": 10.0, "epsilon": 0.5,
    },
    "coefficients": {"a": {"constant": -0.5}, "d": {"constant": 0.5}},
    "data": {
        "y0": {"sine": {"mode": 1, "amplitude": 1.0}},
        "g": {"random": {"seed": 21, "amplitude": 0.5}},
    },
    "mc": {"paths": 2, "master_seed": 3},
}


def write_cfg(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj), encoding="utf-8")
    return p


def invoke(args):
    return CliRunner().invoke(main, args)


# ---------------------------------------------------------------------------
# config parsing


def test_parse_minimal_defaults(tmp_path):
    cfg = parse_config(write_cfg(tmp_path, {"grid": GRID}))
    assert cfg.grid == {"M": 4, "N": 4, "T": 1.0}
    assert cfg.mc == {"paths": 1, "master_seed": 0, "master_seed_b": None}
    assert cfg.output_dir == "out"
    assert cfg.g_mode == "space_time"
    assert cfg.weight is None and cfg.sweep is None and cfg.data_b is None


def test_parse_weight_defaults(tmp_path):
    cfg = parse_config(
        write_cfg(tmp_path, {"grid": GRID, "weight": dict(WEIGHT)})
    )
    assert cfg.weight["epsilon"] == 0.5
    assert cfg.weight["dt_multiplier"] == 1.0
    assert cfg.weight["kappa"] == 0.0


def test_parse_sha256_of_raw_bytes(tmp_path):
    p = write_cfg(tmp_path, {"grid": GRID})
    assert parse_config(p).sha256 == hashlib.sha256(p.read_bytes()).hexdigest()


@pytest.mark.parametrize(
    "mangle,pointer",
    [
        (lambda c: c["grid"].pop("M"), "/grid/M"),
        (lambda c: c["grid"].__setitem__("M", "four"), "/grid/M"),
        (lambda c: c["grid"].__setitem__("M", True), "/grid/M"),
        (lambda c: c["grid"].__setitem__("M", 0), "/grid/M"),
        (lambda c: c["grid"].__setitem__("bogus", 1), "/grid"),
        (lambda c: c.__setitem__("bogus", 1), "/bogus"),
        (lambda c: c.__setitem__("mc", {"paths": 0}), "/mc/paths"),
        (lambda c: c.__setitem__("g_mode", "diagonal"), "/g_mode"),
        (
            lambda c: c.__setitem__(
                "sweep", {"parameter": "grid.M", "values": [1]}
            ),
            "/sweep/parameter",
        ),
        (
            lambda c: c.__setitem__("data", {"y0": {"sine": {"mode": 0}}}),
            "/data/y0/sine/mode",
        ),
    ],
)
def test_parse_pointer_errors(tmp_path, mangle, pointer):
    raw = {"grid": dict(GRID)}
    mangle(raw)
    with pytest.raises(ConfigError) as exc:
        parse_config(write_cfg(tmp_path, raw))
    assert pointer in str(exc.value)


def test_parse_rejects_invalid_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="invalid JSON"):
        parse_config(p)


def test_parse_rejects_non_object(tmp_path):
    p = tmp_path / "arr.json"
    p.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError, match="top level"):
        parse_config(p)


def test_parse_missing_file():
    with pytest.raises(ConfigError, match="cannot read"):
        parse_config("/no/such/config.json")


# ---------------------------------------------------------------------------
# artifacts and manifest


def read_manifest(outdir):
    return json.loads((outdir / "manifest.json").read_text())


def test_identities_artifacts(tmp_path):
    p = write_cfg(tmp_path, {"grid": GRID})
    out = tmp_path / "run"
    res = invoke(
        ["identities", "--config", str(p), "--output-dir", str(out)]
    )
    assert res.exit_code == 0, res.output
    lines = (out / "identities.csv").read_text().splitlines()
    assert lines[0] == "identity,residual"
    assert len(lines) == 16          # header plus one row per identity
    man = read_manifest(out)
    assert man["subcommand"] == "identities"
    assert man["config_sha256"] == hashlib.sha256(p.read_bytes()).hexdigest()
    assert man["files"] == [{"name": "identities.csv", "rows": 15}]


def test_simulate_artifacts(tmp_path):
    p = write_cfg(
        tmp_path,
        {
            "grid": {"M": 5, "N": 8, "T": 1.0},
            "data": {"y0": {"sine": {"mode": 1, "amplitude": 1.0}}},
            "coefficients": {"d": {"constant": 0.5}},
            "mc": {"paths": 2, "master_seed": 1},
        },
    )
    out = tmp_path / "run"
    res = invoke(["simulate", "--config", str(p), "--output-dir", str(out)])
    assert res.exit_code == 0, res.output
    man = read_manifest(out)
    rows = {e["name"]: e["rows"] for e in man["files"]}
    assert rows["trajectory.csv"] == 7 * 10   # full closure of path 0
    assert rows["flux.csv"] == 8
    assert rows["terminal.csv"] == 7
    names = [e["name"] for e in man["files"]]
    assert names == sorted(names)


def test_stability_and_martingale_artifacts(tmp_path):
    base = {
        "grid": {"M": 5, "N": 8, "T": 1.0},
        "data": {"y0": {"sine": {"mode": 1, "amplitude": 1.0}}},
        "coefficients": {"d": {"constant": 0.5}},
        "mc": {"paths": 120, "master_seed": 2},
    }
    p = write_cfg(tmp_path, base)
    out1 = tmp_path / "stab"
    res = invoke(["stability", "--config", str(p), "--output-dir", str(out1)])
    assert res.exit_code == 0, res.output
    obj = json.loads((out1 / "stability.json").read_text())
    assert set(obj["lhs"]) == {"G", "Y0", "Y1"}
    assert set(obj["rhs"]) == {"FLUX", "XT", "DTDX"}
    assert obj["ratio_unsquared_defined"] is True

    out2 = tmp_path / "mart"
    res = invoke(["martingale", "--config", str(p), "--output-dir", str(out2)])
    assert res.exit_code == 0, res.output
    obj = json.loads((out2 / "martingale.json").read_text())
    assert obj["paths"] == 120 and obj["pass"] is True
    assert abs(obj["mean"]) <= obj["bound_4se"]


def test_weights_order_artifacts(tmp_path):
    p = write_cfg(
        tmp_path,
        {
            "grid": {"M": 15, "N": 8, "T": 0.5},
            "weight": {
                "s": 1.0, "lambda": 1.0, "beta": 0.10,
                "xstar": 1.05, "mconst": 0.3,
            },
        },
    )
    out = tmp_path / "run"
    res = invoke(
        ["weights-order", "--config", str(p), "--output-dir", str(out)]
    )
    assert res.exit_code == 0, res.output
    lines = (out / "weights_order.csv").read_text().splitlines()
    assert len(lines) == 5           # header plus 4 expressions
    for line in lines[1:]:
        order = float(line.split(",")[1])
        assert order > 1.5


def test_byte_identical_reruns(tmp_path):
    p = write_cfg(
        tmp_path,
        {
            "grid": {"M": 5, "N": 8, "T": 1.0},
            "data": {"g": {"random": {"seed": 4, "amplitude": 1.0}}},
            "coefficients": {"d": {"constant": 0.5}},
            "mc": {"paths": 3, "master_seed": 11},
        },
    )
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        res = invoke(["simulate", "--config", str(p), "--output-dir", str(out)])
        assert res.exit_code == 0
        outs.append(out)
    files = sorted(f.name for f in outs[0].iterdir())
    assert files == sorted(f.name for f in outs[1].iterdir())
    for name in files:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_flag_overrides(tmp_path):
    base = {
        "grid": {"M": 4, "N": 6, "T": 1.0},
        "data": {"y0": {"random": {"seed": 1, "amplitude": 1.0}}},
        "coefficients": {"d": {"constant": 0.5}},
        "mc": {"paths": 1, "master_seed": 0},
    }
    p1 = write_cfg(tmp_path, base, "a.json")
    seeded = dict(base, mc={"paths": 2, "master_seed": 5})
    p2 = write_cfg(tmp_path, seeded, "b.json")
    o1, o2 = tmp_path / "o1", tmp_path / "o2"
    res = invoke(
        ["simulate", "--config", str(p1), "--output-dir", str(o1),
         "--paths", "2", "--seed", "5"]
    )
    assert res.exit_code == 0
    res = invoke(["simulate", "--config", str(p2), "--output-dir", str(o2)])
    assert res.exit_code == 0
    # overrides reproduce the config that states the same values
    assert (o1 / "trajectory.csv").read_bytes() == (
        o2 / "trajectory.csv"
    ).read_bytes()


# ---------------------------------------------------------------------------
# sweeps


def test_carleman_sweep_artifacts(tmp_path):
    cfg = dict(GOOD_CARLEMAN)
    cfg["sweep"] = {"parameter": "weight.s", "values": [2.0, 4.0]}
    p = write_cfg(tmp_path, cfg)
    out = tmp_path / "run"
    res = invoke(["carleman", "--config", str(p), "--output-dir", str(out)])
    assert res.exit_code == 0, res.output
    man = read_manifest(out)
    names = [e["name"] for e in man["files"]]
    assert names == ["carleman_00.json", "carleman_01.json", "carleman_sweep.csv"]
    sweep = (out / "carleman_sweep.csv").read_text().splitlines()
    assert sweep[0] == "sweep_value,term,value,stderr"
    assert len(sweep) == 1 + 2 * 11  # 11 terms per sweep point
    rep0 = json.loads((out / "carleman_00.json").read_text())
    rep1 = json.loads((out / "carleman_01.json").read_text())
    assert rep0["s"] == 2.0 and rep1["s"] == 4.0
    assert rep0["admissible"] is True


def test_sweep_rejected_for_other_subcommands(tmp_path):
    cfg = {
        "grid": GRID,
        "sweep": {"parameter": "weight.s", "values": [1.0]},
    }
    p = write_cfg(tmp_path, cfg)
    res = invoke(["simulate", "--config", str(p), "--output-dir",
                  str(tmp_path / "x")])
    assert res.exit_code == 3
    assert "/sweep" in res.stderr


# ---------------------------------------------------------------------------
# exit codes


def test_exit_usage_missing_config():
    assert invoke(["simulate"]).exit_code == 2


def test_exit_usage_unknown_subcommand():
    assert invoke(["frobnicate", "--config", "x"]).exit_code == 2


def test_exit_config_unreadable(tmp_path):
    res = invoke(
        ["identities", "--config", str(tmp_path / "absent.json"),
         "--output-dir", str(tmp_path / "o")]
    )
    assert res.exit_code == 3
    assert "config error" in res.stderr


def test_exit_numeric_blowup(tmp_path):
    p = write_cfg(
        tmp_path,
        {
            "grid": {"M": 63, "N": 512, "T": 128.0},
            "data": {"y0": {"sine": {"mode": 1, "amplitude": 1.0}}},
        },
    )
    res = invoke(
        ["simulate", "--config", str(p), "--output-dir", str(tmp_path / "o")]
    )
    assert res.exit_code == 4
    assert "numeric failure" in res.stderr


def test_exit_admissibility_hard_fail(tmp_path):
    # final time far below the observability threshold
    p = write_cfg(
        tmp_path,
        {
            "grid": GRID,
            "weight": dict(WEIGHT),
            "data": {"y0": {"sine": {"mode": 1, "amplitude": 1.0}}},
        },
    )
    out = tmp_path / "o"
    res = invoke(["carleman", "--config", str(p), "--output-dir", str(out)])
    assert res.exit_code == 5
    # diagnostics are still written for inspection
    obj = json.loads((out / "carleman.json").read_text())
    assert obj["admissible"] is False
    assert obj["admissibility"]["t_condition"] is False


def test_exit_statistical_identity_gate(tmp_path, monkeypatch):
    monkeypatch.setattr(cli_mod, "IDENTITY_GATE", -1.0)
    p = write_cfg(tmp_path, {"grid": GRID})
    code = cli_mod._execute(
        "identities", str(p), str(tmp_path / "o"), None, None
    )
    assert code == 6


def test_exit_config_coupling_seed_b(tmp_path):
    p = write_cfg(
        tmp_path,
        {
            "grid": {"M": 4, "N": 6, "T": 1.0},
            "data": {"y0": {"sine": {"mode": 1, "amplitude": 1.0}}},
            "coefficients": {"d": {"constant": 0.5}},
            "mc": {"paths": 2, "master_seed": 1, "master_seed_b": 2},
        },
    )
    res = invoke(
        ["stability", "--config", str(p), "--output-dir", str(tmp_path / "o")]
    )
    assert res.exit_code == 3
    assert "coupling error" in res.stderr


def test_cfl_warning_on_stderr(tmp_path):
    p = write_cfg(
        tmp_path,
        {
            "grid": {"M": 15, "N": 4, "T": 1.0},   # dt = 0.25 > dx = 1/16
            "data": {"y0": {"sine": {"mode": 1, "amplitude": 0.01}}},
        },
    )
    res = invoke(
        ["simulate", "--config", str(p), "--output-dir", str(tmp_path / "o")]
    )
    assert "warning" in res.stderr
