import numpy as np
import pytest

from xynoise.cli import ConfigError, main, parse_config, parse_grid, sweep_config
from xynoise.experiments import default_grid
from xynoise.io import read_csv, read_curve

FAST = ["--tmax", "200", "--grid", "0,0.05,0.1,0.2,0.4,0.8,1.6,3.2"]


def write(path, text):
    path.write_text(text)
    return str(path)


def test_minimal_config_gets_default_physics(tmp_path):
    ini = write(tmp_path / "c.ini", "[system]\nn_qubits = 3\n[run]\npreparation = w_state\n[noise]\nplacement = 3\ngrid = default\n")
    cfg = sweep_config(parse_config(ini))
    s = cfg.spec
    assert (s.omega0, s.J, s.delta, s.gamma, s.nbar) == (4.0, pytest.approx(0.2), pytest.approx(0.1), 0.01, 0.0)
    assert cfg.placement == frozenset({3})
    assert list(cfg.grid) == default_grid()
    assert cfg.resolved_response == "esd_time"


def test_flags_override_file(tmp_path):
    ini = write(tmp_path / "c.ini", "[system]\nn_qubits = 3\nnbar = 1\n[run]\npreparation = w_state\n")
    cfg = parse_config(ini, {"nbar": 2.5, "t_max": 50.0})
    assert cfg.nbar == 2.5 and cfg.t_max == 50.0


@pytest.mark.parametrize(
    "text, needle",
    [
        ("[system]\nbogus = 1\n", "bogus"),
        ("[nosuch]\nx = 1\n", "nosuch"),
        ("[system]\nn_qubits = three\n", "n_qubits"),
        ("[system]\nn_qubits = 5\n", "n_qubits"),
        ("[noise]\ngrid = 0,-0.5,1\n", "-0.5"),
        ("[noise]\ngrid = 0,2,1\n", "increasing"),
        ("[system]\nn_qubits = 4\n[noise]\nplacement = 5\n", "5"),
        ("[run]\ndt = 0\n", "dt"),
        ("[system]\ngamma = -1\n", "gamma"),
    ],
)
def test_config_errors_name_the_key(tmp_path, text, needle):
    with pytest.raises(ConfigError, match=needle):
        parse_config(write(tmp_path / "c.ini", text))


def test_grid_forms():
    assert parse_grid("default") == default_grid()
    assert len(parse_grid("default:25")) == 25
    assert parse_grid("0, 0.5;1") == [0.0, 0.5, 1.0]
    with pytest.raises(ConfigError, match="start at 0"):
        parse_grid("0.1,1")


@pytest.mark.parametrize(
    "argv",
    [
        ["sweep", "--preparation", "w_state", "--grid", "0,-1"],
        ["sweep", "--n-qubits", "4", "--preparation", "psi_plus_4q_prep1", "--placement", "5"],
        ["sweep", "--preparation", "nonexistent"],
        ["sweep", "--preparation", "psi_plus_2q"],
        ["reproduce-table", "A9"],
        ["classify"],
    ],
)
def test_cli_config_errors_exit_2(tmp_path, argv, capsys):
    assert main(argv + ["--out-dir", str(tmp_path)]) == 2
    assert "config error" in capsys.readouterr().err


def test_evolve_first_row(tmp_path):
    out = tmp_path / "ev"
    code = main(["evolve", "--n-qubits", "2", "--preparation", "phi_plus_2q", "--omega0", "1", "--j", "0.1",
                 "--delta", "0.1", "--tmax", "20", "--out-dir", str(out)])
    assert code == 0
    header, rows = read_csv(out / "curve.csv")
    assert header == ["t", "concurrence"]
    assert float(rows[0][0]) == 0.0 and float(rows[0][1]) == 1.0
    assert (out / "plot.svg").read_text().lstrip().startswith("<?xml")
    assert "[manifest]" in (out / "manifest.txt").read_text()


def test_sweep_outputs_and_manifest_rerun(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    argv = ["sweep", "--n-qubits", "2", "--preparation", "psi_plus_2q", "--omega0", "1", "--j", "0.1",
            "--placement", "1,2"] + FAST
    assert main(argv + ["--out-dir", str(a)]) == 0
    header, rows = read_csv(a / "curve.csv")
    assert header == ["M", "response", "censored"]
    assert len(rows) == 8
    assert main(["sweep", "--config", str(a / "manifest.txt"), "--out-dir", str(b)]) == 0
    assert (a / "curve.csv").read_bytes() == (b / "curve.csv").read_bytes()


def test_csv_round_trip(tmp_path):
    out = tmp_path / "s"
    assert main(["sweep", "--preparation", "psi_plus_3q_prep1", "--placement", "3", "--out-dir", str(out)] + FAST) == 0
    curve = read_curve(out / "curve.csv")
    # re-emit through the classify command and compare numerically
    out2 = tmp_path / "c"
    assert main(["classify", str(out / "curve.csv"), "--out-dir", str(out2)]) == 0
    again = read_curve(out2 / "curve.csv")
    np.testing.assert_allclose(again.responses, curve.responses, rtol=1e-15, atol=0)
    np.testing.assert_array_equal(again.m_values, curve.m_values)
    np.testing.assert_array_equal(again.censored, curve.censored)


def test_classify_command(tmp_path, capsys):
    csv = tmp_path / "v.csv"
    m = np.linspace(0, 1, 11)
    csv.write_text("M,response,censored\n" + "".join(f"{float(x)!r},{float(1 + abs(x - 0.5))!r},0\n" for x in m))
    assert main(["classify", str(csv), "--out-dir", str(tmp_path / "o")]) == 0
    assert "label = stochastic_antiresonance" in capsys.readouterr().out


def test_reproduce_table_a1_rows_in_order(tmp_path):
    out = tmp_path / "t"
    code = main(["reproduce-table", "A1", "--grid", "0,0.002,0.005,0.01,0.05,0.2,1,3", "--tmax", "300",
                 "--out-dir", str(out)])
    assert code in (0, 4)
    header, rows = read_csv(out / "report.csv")
    assert header[:5] == ["row", "preparation", "placement", "expected", "predicted"]
    assert [int(r[0]) for r in rows] == list(range(1, 9))
    assert [r[1] for r in rows] == ["eee", "eeg", "ege", "egg", "gee", "geg", "gge", "ggg"]


def test_divergence_exits_3(tmp_path, capsys):
    code = main(["sweep", "--n-qubits", "2", "--preparation", "psi_plus_2q", "--placement", "1,2",
                 "--grid", "0,1e12", "--tmax", "10", "--out-dir", str(tmp_path)])
    assert code == 3
    assert "M=1e+12" in capsys.readouterr().err


def test_unwritable_output_exits_1(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code = main(["evolve", "--n-qubits", "2", "--preparation", "phi_plus_2q", "--tmax", "1",
                 "--out-dir", str(blocker / "sub")])
    assert code == 1


def test_noise_model_key(tmp_path):
    ini = write(tmp_path / "c.ini", "[system]\nn_qubits = 4\n[run]\npreparation = psi_plus_4q_prep5\n"
                                    "[noise]\nplacement = 3,4\nmodel = independent\n")
    assert sweep_config(parse_config(ini)).noise_model == "independent"
    assert sweep_config(parse_config(ini, {"model": "collective"})).noise_model == "collective"
    with pytest.raises(ConfigError, match="model"):
        parse_config(write(tmp_path / "d.ini", "[noise]\nmodel = shared\n"))
