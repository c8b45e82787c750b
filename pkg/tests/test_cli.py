import json

import numpy as np
import pytest

from nehari.cli import main
from nehari.symbol import MatrixSymbol, dumps_symbol, load_symbol, save_symbol


def write_symbol(tmp_path, name, sym):
    path = tmp_path / name
    save_symbol(sym, path)
    return str(path)


def diag_symbol(*scalars):
    from nehari.symbol import block_diag

    return block_diag(*[MatrixSymbol.scalar(t) for t in scalars])


def test_info_reports_norms(tmp_path, capsys):
    path = write_symbol(tmp_path, "zbar.json", MatrixSymbol.scalar({-1: 1.0}))
    assert main(["info", path]) == 0
    out = capsys.readouterr().out
    assert "hankel norm: 1" in out
    assert "1 x 1" in out


def test_info_profile_for_diagonal(tmp_path, capsys):
    path = write_symbol(tmp_path, "d.json", diag_symbol({-1: 1.0}, {-1: 0.5}))
    assert main(["info", path]) == 0
    out = capsys.readouterr().out
    assert "s0: 1 " in out
    assert "s1: 0.5 " in out


def test_info_malformed_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{broken")
    assert main(["info", str(bad)]) == 1
    assert "line" in capsys.readouterr().err


def test_superopt_report_and_trace(tmp_path):
    path = write_symbol(tmp_path, "d.json", diag_symbol({-1: 1.0}, {-1: 0.5}))
    out = tmp_path / "report.json"
    csv_path = tmp_path / "trace.csv"
    code = main(
        ["superopt", path, "--out", str(out), "--trace-csv", str(csv_path), "--grid", "256"]
    )
    assert code == 0
    report = json.loads(out.read_text())
    assert np.allclose(report["t"], [1.0, 0.5], atol=1e-8)
    assert report["r"] == [1, 2]
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "theta,s0,s1,res_s0,res_s1"
    assert len(lines) == 257


def test_superopt_scalar_two_term(tmp_path):
    path = write_symbol(tmp_path, "s.json", MatrixSymbol.scalar({-1: 1.0, -2: 0.5}))
    out = tmp_path / "report.json"
    assert main(["superopt", path, "--out", str(out), "--grid", "256"]) == 0
    report = json.loads(out.read_text())
    assert abs(report["t"][0] - (1.0 + np.sqrt(2.0)) / 2.0) < 1e-9


def test_superopt_zero_symbol(tmp_path):
    path = write_symbol(tmp_path, "z.json", MatrixSymbol.zeros(1, 1))
    out = tmp_path / "r.json"
    assert main(["superopt", path, "--out", str(out), "--grid", "256"]) == 0
    assert json.loads(out.read_text())["t"] == [0.0]


def test_superopt_plot_renders_figures(tmp_path):
    path = write_symbol(tmp_path, "d.json", diag_symbol({-1: 1.0}, {-1: 0.5}))
    prefix = tmp_path / "fig"
    code = main(
        ["superopt", path, "--out", str(tmp_path / "r.json"), "--grid", "256", "--plot", str(prefix)]
    )
    assert code == 0
    profile = tmp_path / "fig_profile.png"
    levels = tmp_path / "fig_levels.png"
    assert profile.exists() and profile.stat().st_size > 1000
    assert levels.exists() and levels.stat().st_size > 1000
    assert profile.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_certify_exit_codes(tmp_path):
    zbar = write_symbol(tmp_path, "zbar.json", MatrixSymbol.scalar({-1: 1.0}))
    z = write_symbol(tmp_path, "z.json", MatrixSymbol.scalar({1: 1.0}))
    nonuniq = write_symbol(tmp_path, "nu.json", diag_symbol({-1: 1.0}, {}))
    assert main(["certify", "ba", zbar, "--grid", "256"]) == 0
    assert main(["certify", "ba", z, "--grid", "256"]) == 2
    assert main(["certify", "vba", zbar, "--grid", "256"]) == 0
    assert main(["certify", "iso", nonuniq, "--grid", "256"]) == 2
    assert main(["certify", "iso", zbar, "--grid", "256"]) == 0


def test_complete_writes_unitary_completion(tmp_path):
    inv = 1.0 / np.sqrt(2.0)
    ups = MatrixSymbol.from_entries(
        2, 1, {(0, 0): MatrixSymbol.scalar({0: inv}), (1, 0): MatrixSymbol.scalar({1: inv})}
    )
    path = write_symbol(tmp_path, "ups.json", ups)
    out = tmp_path / "completion.json"
    assert main(["complete", path, "--out", str(out), "--grid", "256"]) == 0
    payload = json.loads(out.read_text())
    assert payload["diagnostics"]["unitarity_residual"] < 1e-7
    assert payload["V"]["rows"] == 2 and payload["V"]["cols"] == 2


def test_complete_rejects_non_inner(tmp_path):
    path = write_symbol(tmp_path, "bad.json", MatrixSymbol.constant([[0.5], [0.0]]))
    assert main(["complete", path, "--grid", "256"]) == 1


def test_example_generators(tmp_path):
    out = tmp_path / "diag5.json"
    assert main(["example", "diag5", "--t", "1,0.9,0.8", "--out", str(out)]) == 0
    sym = load_symbol(out)
    assert (sym.rows, sym.cols) == (4, 4)
    assert abs(sym.coeff(-1)[1, 1] - 1.0) < 1e-15
    assert abs(sym.coeff(-1)[3, 3] - 0.8) < 1e-15
    # round trip is byte identical
    assert dumps_symbol(sym) == out.read_text()

    out2 = tmp_path / "bp.json"
    assert main(["example", "scalar-bp", "--k", "2", "--out", str(out2)]) == 0
    assert load_symbol(out2).band == (-2, -2)

    out3 = tmp_path / "nu.json"
    assert main(["example", "py-nonunique", "--out", str(out3)]) == 0
    nu = load_symbol(out3)
    assert (nu.rows, nu.cols) == (2, 2)
    assert abs(nu.coeff(-1)[0, 0] - 1.0) < 1e-15


def test_determinism_byte_identical_reports(tmp_path):
    path = write_symbol(tmp_path, "d.json", diag_symbol({-1: 1.0}, {-1: 0.5}))
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    args = ["--grid", "256", "--seed", "7"]
    assert main(["superopt", path, "--out", str(out1)] + args) == 0
    assert main(["superopt", path, "--out", str(out2)] + args) == 0
    assert out1.read_bytes() == out2.read_bytes()
    cert1, cert2 = tmp_path / "c1.json", tmp_path / "c2.json"
    assert main(["certify", "ba", path, "--out", str(cert1)] + args) == 0
    assert main(["certify", "ba", path, "--out", str(cert2)] + args) == 0
    assert cert1.read_bytes() == cert2.read_bytes()


def test_tail_sigma_flag(tmp_path):
    path = write_symbol(
        tmp_path, "tail.json", diag_symbol({}, {-1: 1.0}, {-1: 0.9}, {-1: 0.8})
    )
    out = tmp_path / "r.json"
    code = main(
        ["superopt", path, "--out", str(out), "--grid", "256", "--depth", "3", "--tail-sigma", "0.8"]
    )
    assert code == 0
    report = json.loads(out.read_text())
    assert np.allclose(report["t"], [1.0, 0.9, 0.8], atol=1e-9)
    assert report["t_inf"] == 0.8
    assert report["tail_model"] is True
