import json
from pathlib import Path

import numpy as np
import pytest

from gfvnet import cli, files
from gfvnet.files import InputError, parse_complex, parse_targets

DATA = Path(cli.__file__).parent / "data"


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj, indent=2))
    return p


SMALL = {
    "version": 1,
    "agent": {"tf": {"num": [1.0], "den": [1.0, 0.0]}},
    "network": {"A": [[0, 1], [0, 0]], "B": [[0], [1]], "C": [[1, 0]]},
    "design": {"bounds": [-3, 1, -2, 2], "resolution": [41, 41], "margin": 1e-6},
    "sim": {"t_final": 5.0, "dt": 0.01, "seed": 2},
}


def test_parse_targets():
    assert parse_targets("1±2i;-3") == [1 + 2j, 1 - 2j, -3]
    assert parse_targets("-1+-0.5i") == [-1 + 0.5j, -1 - 0.5j]
    assert parse_complex([1, -2]) == 1 - 2j
    with pytest.raises(InputError):
        parse_targets(";")
    with pytest.raises(InputError):
        parse_complex("abc")


def test_malformed_json_reports_line(tmp_path, capsys):
    p = _write(tmp_path, "bad.json", '{\n  "version": 1,\n  "agent": ,\n}')
    code = cli.main(["design", str(p), "--out", str(tmp_path / "o")])
    assert code == 2
    assert ":3:" in capsys.readouterr().err
    assert sorted(x.name for x in tmp_path.iterdir()) == ["bad.json"]


def test_bad_matrix_points_at_line(tmp_path, capsys):
    obj = json.loads(json.dumps(SMALL))
    obj["network"]["B"] = [[0, 1], [1]]
    p = _write(tmp_path, "bad.json", obj)
    assert cli.main(["check", str(p)]) == 2
    err = capsys.readouterr().err
    assert "B" in err and "line" in err


def test_region_command(tmp_path, capsys):
    p = _write(tmp_path, "s.json", SMALL)
    assert cli.main(["region", str(p), "--out", str(tmp_path / "r"), "--res", "11x9"]) == 0
    rows = (tmp_path / "r.region.csv").read_text().splitlines()
    assert rows[0] == "re,im,inside" and len(rows) == 1 + 11 * 9
    assert (tmp_path / "r.region.svg").read_text().startswith("<svg")
    assert "network stable open-loop: no" in capsys.readouterr().out


def test_design_and_simulate_round_trip(tmp_path):
    p = _write(tmp_path, "s.json", SMALL)
    assert cli.main(["design", str(p), "--out", str(tmp_path / "d")]) == 0
    d = json.loads((tmp_path / "d.design.json").read_text())
    assert d["verified"] is True
    code = cli.main(["simulate", str(p), "--design", str(tmp_path / "d.design.json"),
                     "--out", str(tmp_path / "s")])
    assert code == 0
    lines = (tmp_path / "s.traj.csv").read_text().splitlines()
    assert lines[0].startswith("time,x_1,x_2,xhat_1")
    assert len(lines) == 1 + 501


def test_outputs_are_deterministic(tmp_path):
    p = _write(tmp_path, "s.json", SMALL)
    for tag in ("a", "b"):
        assert cli.main(["design", str(p), "--out", str(tmp_path / tag)]) == 0
        assert cli.main(["simulate", str(p), "--design", str(tmp_path / f"{tag}.design.json"),
                         "--out", str(tmp_path / tag)]) == 0
    for suffix in (".design.json", ".traj.csv", ".norms.svg"):
        assert (tmp_path / f"a{suffix}").read_bytes() == (tmp_path / f"b{suffix}").read_bytes()


def test_uncontrollable_design_exits_3(tmp_path, capsys):
    obj = json.loads(json.dumps(SMALL))
    obj["network"] = {"A": [[1, 0], [0, 2]], "B": [[1], [0]], "C": [[1, 1]]}
    p = _write(tmp_path, "u.json", obj)
    assert cli.main(["design", str(p), "--out", str(tmp_path / "u"),
                     "--targets=-1±0.5i"]) == 3
    assert "PBH certificate" in capsys.readouterr().out
    assert not (tmp_path / "u.design.json").exists()


def test_empty_region_design_exits_3(tmp_path):
    obj = json.loads(json.dumps(SMALL))
    obj["design"]["bounds"] = [0.5, 2, -1, 1]
    p = _write(tmp_path, "e.json", obj)
    assert cli.main(["design", str(p), "--out", str(tmp_path / "e")]) == 3


def test_unverified_design_exits_4(tmp_path):
    # targets outside the region still place exactly, but verification fails
    p = _write(tmp_path, "s.json", SMALL)
    assert cli.main(["design", str(p), "--out", str(tmp_path / "d"),
                     "--targets", "1±1i"]) == 4
    assert json.loads((tmp_path / "d.design.json").read_text())["verified"] is False


def test_check_exit_codes(tmp_path):
    fixture = str(DATA / "mimo_counterexample.json")
    assert cli.main(["check", fixture, "--out", str(tmp_path / "x")]) == 5
    rep = json.loads((tmp_path / "x.check.json").read_text())
    assert rep["verdict"] == "necessity-passed-but-lifted-fails"
    assert cli.main(["check", str(DATA / "pendulum.json")]) == 0


def test_simulate_requires_design(tmp_path):
    p = _write(tmp_path, "s.json", SMALL)
    assert cli.main(["simulate", str(p), "--out", str(tmp_path / "s")]) == 2
    assert cli.main(["simulate", str(p), "--out", str(tmp_path / "s"), "--mode", "open-loop"]) == 0


def test_bad_seed_env(tmp_path, monkeypatch):
    monkeypatch.setenv("TOOL_SEED", "x")
    p = _write(tmp_path, "s.json", SMALL)
    assert cli.main(["design", str(p), "--out", str(tmp_path / "d")]) == 2


def test_demo_into_file_path_exits_2(tmp_path):
    f = tmp_path / "occupied"
    f.write_text("")
    assert cli.main(["demo-pendulum", str(f)]) == 2


def test_demo_small_gain(tmp_path, capsys):
    code = cli.main(["demo-pendulum", str(tmp_path / "demo"), "--k", "0.1",
                     "--res", "80x80", "--t-final", "5", "--record-every", "10"])
    out = capsys.readouterr().out
    assert code == 0
    assert "== region" in out and "verified: True" in out
    assert len(list((tmp_path / "demo").iterdir())) == 6


def test_dumps_is_stable():
    assert files.dumps({"b": 0.1, "a": [1, 2.5]}) == files.dumps({"a": [1, 2.5], "b": 0.1})
    assert json.loads(files.dumps({"x": 0.1 + 0.2}))["x"] == 0.1 + 0.2
    assert files.fmt(np.float64(1) / 3) == "0.33333333333333331"
