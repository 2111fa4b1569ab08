import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from supercrit import export
from supercrit.cli import main

BALL_CERT = {
    "command": "certify",
    "profile": {"kind": "ball", "center": [2, 0, 0], "radius": 1},
    "problem": {"type": "rotational", "ks": [1], "N": 4, "p": 6},
    "certify": {"theorem": "1.2", "t0": 1, "t1": 3},
}

DISK_SOLVE = {
    "command": "solve",
    "profile": {"kind": "ball", "center": [0, 0], "radius": 1},
    "problem": {"type": "plain", "p": 4},
    "solver": {"h": 0.0625},
}


def _write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg, indent=2) if not isinstance(cfg, str) else cfg)
    return str(path)


def test_certify_ball(tmp_path):
    out = tmp_path / "out"
    assert main(["certify", "--config", _write(tmp_path, BALL_CERT), "--out", str(out)]) == 0
    cert = json.loads((out / "certificate.json").read_text())
    assert cert["verdict"] == "NONEXISTENCE"
    assert json.loads((out / "config.json").read_text())["problem"]["p"] == 6


def test_p_flag_overrides(tmp_path):
    out = tmp_path / "out"
    assert main(["certify", "--config", _write(tmp_path, BALL_CERT), "--out", str(out), "--p", "4"]) == 0
    assert json.loads((out / "certificate.json").read_text())["verdict"] == "EXISTENCE_SUBCRITICAL"


def test_solve_artifacts(tmp_path):
    out = tmp_path / "out"
    assert main(["solve", "--config", _write(tmp_path, DISK_SOLVE), "--out", str(out)]) == 0
    report = json.loads((out / "solution.json").read_text())
    assert report["converged"] is True
    rows = (out / "solution.csv").read_text().strip().splitlines()
    values = np.array([float(r.split(",")[-1]) for r in rows[1:]])
    pgm = (out / "solution.pgm").read_text().splitlines()
    assert pgm[0] == "P2"
    assert float(pgm[1].split()[-1]) == values.min()
    assert float(pgm[2].split()[-1]) == values.max()
    # one CSV row per inside node
    from supercrit.geometry import make_profile
    from supercrit.solver.grid import MaskedGrid

    assert len(rows) - 1 == MaskedGrid(make_profile("ball", center=[0, 0], radius=1), 0.0625).n


def test_same_seed_byte_identical(tmp_path):
    cfg = _write(tmp_path, DISK_SOLVE)
    main(["solve", "--config", cfg, "--out", str(tmp_path / "a"), "--seed", "3"])
    main(["solve", "--config", cfg, "--out", str(tmp_path / "b"), "--seed", "3"])
    for name in ("solution.json", "solution.csv", "solution.pgm", "history.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    echoes = [json.loads((tmp_path / d / "config.json").read_text()) for d in "ab"]
    assert dict(echoes[0], out=None) == dict(echoes[1], out=None)


def test_rerun_from_echo(tmp_path):
    main(["certify", "--config", _write(tmp_path, BALL_CERT), "--out", str(tmp_path / "a")])
    echo = str(tmp_path / "a" / "config.json")
    main(["certify", "--config", echo, "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "certificate.json").read_bytes() == (tmp_path / "b" / "certificate.json").read_bytes()


@pytest.mark.parametrize("text", ["", "{}", "[1, 2]", "{\"command\": \"solve\", \"bogus\": 1}"])
def test_bad_configs_exit_2_without_artifacts(tmp_path, capsys, text):
    out = tmp_path / "out"
    assert main(["solve", "--config", _write(tmp_path, text), "--out", str(out)]) == 2
    assert not out.exists()
    assert "error" in capsys.readouterr().err


def test_schema_error_has_line_number(tmp_path, capsys):
    cfg = dict(DISK_SOLVE, solver={"h": 0.0625, "colour": "red"})
    main(["solve", "--config", _write(tmp_path, cfg), "--out", str(tmp_path / "o")])
    err = capsys.readouterr().err
    line = next(i for i, l in enumerate(json.dumps(cfg, indent=2).splitlines(), 1) if "colour" in l)
    assert f"cfg.json:{line}:" in err


def test_command_mismatch(tmp_path):
    assert main(["solve", "--config", _write(tmp_path, BALL_CERT), "--out", str(tmp_path / "o")]) == 2


def test_hypothesis_error_exit_2(tmp_path):
    cfg = dict(BALL_CERT, problem={"type": "rotational", "ks": [2], "N": 4, "p": 6},
               profile={"kind": "ball", "center": [2, 0], "radius": 1})
    assert main(["certify", "--config", _write(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 2


def test_nonconvergence_exit_3(tmp_path):
    cfg = dict(DISK_SOLVE, solver={"h": 0.0625, "max_iterations": 1, "polish": False})
    out = tmp_path / "o"
    assert main(["solve", "--config", _write(tmp_path, cfg), "--out", str(out)]) == 3
    assert not out.exists()


def test_unwritable_directory(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["certify", "--config", _write(tmp_path, BALL_CERT), "--out", str(blocker / "sub")]) == 2


def test_oracle_and_algebra(tmp_path):
    cfg = _write(tmp_path, {"command": "oracle", "oracle": {"kind": "radial", "d": 2}})
    assert main(["oracle", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "oracle.json").read_text())["centerValue"] == pytest.approx(3.5739009819, rel=1e-9)
    cfg = _write(tmp_path, {"command": "oracle", "oracle": {"kind": "radial", "d": 3}}, "c2.json")
    assert main(["oracle", "--config", cfg, "--out", str(tmp_path / "o2"), "--p", "6"]) == 2
    cfg = _write(tmp_path, {"command": "verify-algebra", "algebra": {"samples": 100}}, "c3.json")
    assert main(["verify-algebra", "--config", cfg, "--out", str(tmp_path / "o3")]) == 0
    res = json.loads((tmp_path / "o3" / "algebra.json").read_text())
    assert res["dilation_constant_oracle"] == 4


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("SUPERCRIT_THREADS", "1")
    assert main(["certify", "--config", _write(tmp_path, BALL_CERT), "--out", str(tmp_path / "o")]) == 0
    monkeypatch.setenv("SUPERCRIT_THREADS", "many")
    assert main(["certify", "--config", _write(tmp_path, BALL_CERT), "--out", str(tmp_path / "p")]) == 2


# -- export -------------------------------------------------------------------------------


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_json_floats_round_trip(x):
    assert json.loads(export.dumps({"x": x}))["x"] == x


def test_json_nonfinite_as_strings():
    assert json.loads(export.dumps({"a": math.inf, "b": -math.inf, "c": math.nan})) == {
        "a": "inf", "b": "-inf", "c": "nan"}


def test_json_sorted_and_stable():
    a = export.dumps({"b": 1, "a": [1.0, 0.1], "c": {"z": True, "y": None}})
    b = export.dumps({"c": {"y": None, "z": True}, "a": [1.0, 0.1], "b": 1})
    assert a == b and a.index('"a"') < a.index('"b"')


def test_json_rejects_unknown_types():
    with pytest.raises(TypeError):
        export.dumps({"x": object()})
