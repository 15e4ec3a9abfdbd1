import csv
import io
import json
import textwrap

import pytest

from sshchain.cli import main, parse_config
from sshchain.config import ConfigError
from sshchain.export import format_value, load_json
from sshchain.phasescan import preset


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return str(path)


FIG2C_INI = """
    [run]
    command = sweep

    [chain]
    n_cells = 80
    w = 0.5
    z = 0.0

    [sweep]
    axes = v:0:1:200
    states = edge, psi1, psi20, psi50
    observables = K
"""


def test_flags_only():
    cfg = parse_config(["spectrum", "--n", "40", "--v", "0.3", "--w", "0.5", "--z", "0.0"])
    assert cfg.command == "spectrum"
    assert (cfg.chain.n_cells, cfg.chain.v, cfg.chain.w, cfg.chain.z) == (40, 0.3, 0.5, 0.0)
    assert cfg.output.format == "csv" and cfg.output.precision == 12


def test_config_file_declares_fig2c(tmp_path):
    cfg = parse_config(["--config", write(tmp_path, "fig2c.ini", FIG2C_INI)])
    assert cfg.sweep == preset("fig2c")


def test_flags_override_file(tmp_path):
    path = write(tmp_path, "fig2c.ini", FIG2C_INI)
    cfg = parse_config(["sweep", "--config", path, "--n", "60", "--workers", "2"])
    assert cfg.sweep.fixed.n_cells == 60 and cfg.workers == 2


def test_conflicting_axis_and_fixed_value():
    with pytest.raises(ConfigError, match="conflicting fixed --v and sweep axis v"):
        parse_config(["sweep", "--v", "0.3", "--axis", "v:0:1:10"])


def test_unknown_key_is_named(tmp_path):
    path = write(tmp_path, "bad.ini", "[chain]\nn_cells = 4\nhopping = 3\n")
    with pytest.raises(ConfigError, match="chain.hopping"):
        parse_config(["spectrum", "--config", path])


@pytest.mark.parametrize(
    "argv, message",
    [
        (["spectrum", "--precision", "3"], "precision"),
        (["spectrum", "--n", "0"], "n_cells"),
        (["sweep"], "axis"),
        (["diagram", "--axis", "v:0:1:4"], "2 axes"),
        (["spectrum", "--axis", "v:0:1:4"], "unrecognized"),
    ],
)
def test_invalid_configs(argv, message):
    with pytest.raises(ConfigError, match=message):
        parse_config(argv)


def test_malformed_file(tmp_path, capsys):
    path = write(tmp_path, "broken.ini", "this is not ini\n")
    assert main(["spectrum", "--config", path]) == 1
    err = capsys.readouterr().err
    assert err.startswith("error: malformed config file") and err.count("\n") == 1


def test_usage_error_exit_code(capsys):
    assert main(["nonsense"]) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_unwritable_path_exit_code(tmp_path, capsys):
    out = tmp_path / "missing-dir" / "x.csv"
    assert main(["spectrum", "--n", "3", "--out", str(out)]) == 3
    assert capsys.readouterr().err.startswith("error: cannot write")
    assert not list(tmp_path.iterdir())


def test_sweep_csv_schema(tmp_path):
    out = tmp_path / "fig2c.csv"
    assert main(["sweep", "--preset", "fig2c", "--fast", "--n", "60", "--out", str(out), "--workers", "1"]) == 0
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0] == ["v", "K_edge", "K_psi1", "K_psi20", "K_psi50", "status"]
    assert len(rows) == 65
    raw = out.read_bytes()
    assert b"\r\n" not in raw


def test_diagram_matrix_csv(tmp_path):
    out = tmp_path / "d.csv"
    argv = ["diagram", "--n", "10", "--v", "0.4", "--axis", "w/v:0:2:3", "--axis", "z/v:0:1:4",
            "--states", "psi1", "--observables", "K", "--out", str(out), "--workers", "1"]
    assert main(argv) == 0
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0] == ["w/v\\z/v", "0.0", format_value(1 / 3, 12), format_value(2 / 3, 12), "1.0"]
    assert [r[0] for r in rows[1:]] == ["0.0", "1.0", "2.0"]
    assert all(len(r) == 5 for r in rows)


def test_diagram_multiple_columns_write_one_file_each(tmp_path):
    out = tmp_path / "fig4.csv"
    argv = ["diagram", "--preset", "fig4", "--fast", "--n", "12", "--out", str(out), "--workers", "1"]
    assert main(argv) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["fig4_K_psi1.csv", "fig4_P_psi1.csv"]


def test_json_metadata_round_trip(tmp_path):
    out = tmp_path / "s.json"
    argv = ["sweep", "--n", "10", "--axis", "v:0:1:5", "--observables", "K,P,gap", "--format", "json",
            "--out", str(out), "--workers", "1"]
    assert main(argv) == 0
    doc = load_json(str(out))
    assert doc["metadata"]["sweep"] == parse_config(argv).sweep.as_dict()
    assert "timestamp" in doc["metadata"]
    assert doc["columns"][-1] == "status" and len(doc["rows"]) == 5


def test_referential_transparency(tmp_path):
    argv = ["sweep", "--n", "12", "--axis", "v:0:1:6", "--axis", "z:0:0.5:3", "--observables", "K,P,zeta_numeric",
            "--no-timestamp", "--workers", "2"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("command", ["spectrum", "bands", "winding", "polarization", "schmidt"])
def test_single_point_commands(command, capsys):
    assert main([command, "--n", "6", "--v", "0.2", "--w", "0.5", "--nk", "64", "--format", "json", "--no-timestamp"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["metadata"]["command"] == command
    assert doc["rows"]


def test_winding_command_reports_singular_status(capsys):
    assert main(["winding", "--v", "0.5", "--w", "0.5"]) == 0
    out = capsys.readouterr().out
    assert "undefined at TPT" in out


def test_schmidt_states_flag(capsys):
    assert main(["schmidt", "--n", "40", "--v", "0.2", "--w", "0.5", "--states", "edge,psi1"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [r["label"] for r in rows] == ["edge", "psi1"]
    assert float(rows[0]["K"]) == pytest.approx(2.0, abs=1e-6)


def test_selftest_command(capsys):
    assert main(["selftest"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines and all(line.startswith("PASS") for line in lines)


@pytest.mark.parametrize("x, precision, text", [(0.1, 12, "0.1"), (1 / 3, 6, "0.333333"), (2.0, 12, "2.0"),
                                                (float("nan"), 12, "nan"), (1e-20, 12, "1e-20")])
def test_float_formatting(x, precision, text):
    assert format_value(x, precision) == text
