import json

import pytest

from qmem import __version__
from qmem.cli import EXIT_FAILED, EXIT_INVALID, EXIT_OK, load_code, run
from qmem.errors import ConfigError


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_version(capsys):
    assert run(["--version"]) == EXIT_OK
    assert __version__ in capsys.readouterr().out


def test_code_build(capsys):
    assert run(["code", "build", "--family", "hgp", "--h", "11"]) == EXIT_OK
    cert = _json(capsys)
    assert (cert["n"], cert["k"], cert["d_min"]) == (5, 1, 2)
    assert cert["d_min_status"] == "exact"


def test_code_export_then_simulate(tmp_path, capsys):
    path = tmp_path / "steane.json"
    assert run(["code", "export", "--family", "steane", "--out", str(path)]) == EXIT_OK
    code = load_code(str(path))
    assert (code.n, code.k) == (7, 1)

    argv = ["simulate", "--code", str(path), "--p-tilde", "0", "--trials", "50"]
    assert run(argv) == EXIT_OK
    result = _json(capsys)
    assert result["logical_error_estimate"] == 0.0
    assert result["trials_run"] == 50


def test_load_code_rejects_unknown_keys(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"h_x": "11", "h_z": "11", "extra": 1}))
    with pytest.raises(ConfigError):
        load_code(str(path))


def test_bounds_upper_at_no_cloning_point(capsys):
    assert run(["bounds", "upper", "--p-tilde", "0.25"]) == EXIT_OK
    assert _json(capsys)["value"] == 0.0
    assert run(["bounds", "upper", "--p-tilde", "0.25", "--zeta", "0"]) == EXIT_OK
    assert _json(capsys)["value"] == 0.0


def test_classical_ub(capsys):
    assert run(["classical", "ub", "--alpha", "0", "--variant", "new"]) == EXIT_OK
    assert _json(capsys) == {"alpha": 0.0, "variant": "new", "ub": 1.0}
    assert run(["classical", "ub", "--alpha", "0.1"]) == EXIT_OK
    point = _json(capsys)
    assert point["ub_new"] > point["ub_old"]


@pytest.mark.parametrize(
    "argv",
    [
        ["bounds", "upper", "--p-tilde", "0.3"],
        ["bounds", "second-order", "--p-tilde", "0.01", "--n", "100", "--eps", "1.5"],
        ["code", "build", "--family", "hgp"],
        ["code", "build", "--h", "11"],
        ["code", "build", "--params", '{"family": "hgp", "rows": "11"}'],
        ["memory", "rate", "--params", '{"family": "surface"}'],
        ["optimize", "decoder-time", "--config", '{"tau_c": 1e-9}'],
        ["bounds", "upper"],
        ["no-such-command"],
    ],
)
def test_invalid_input_exits_2(argv, capsys):
    assert run(argv) == EXIT_INVALID


def test_infeasible_exits_3(capsys):
    assert run(["optimize", "decoder-time", "--config", '{"tau_0_ns": 1e6}']) == EXIT_FAILED


def test_emit_fig3_is_deterministic(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["emit", "fig3", "--grid", "5", "--out", str(first)]) == EXIT_OK
    assert run(["emit", "fig3", "--grid", "5", "--out", str(second)]) == EXIT_OK
    text = first.read_text()
    assert text == second.read_text()
    lines = text.splitlines()
    assert lines[0] == "alpha,p_star,delta_h_star,ub_new,ub_old,gap"
    assert len(lines) == 6


def test_emit_fig2_with_curve(tmp_path, capsys):
    curve = tmp_path / "curve.csv"
    argv = ["emit", "fig2", "--resolution", "3", "--curve-out", str(curve)]
    assert run(argv) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n,tau_ns,q_so"
    assert len(lines) == 1 + 9
    curve_lines = curve.read_text().splitlines()
    assert curve_lines[0] == "n,tau_ns,p_tilde,q_so"
    assert len(curve_lines) == 1 + 3


def test_reproduce(capsys):
    assert run(["reproduce", "section7"]) == EXIT_OK
    report = _json(capsys)
    assert report["pass"] is True
    names = {c["name"] for c in report["checks"]}
    assert {"expander_rate", "bb_rate", "second_order_bound", "optimizer_q_star"} <= names
    assert all(c["pass"] for c in report["checks"])
    assert report["informational"]["non_asymptotic_gap"] > 0


def test_code_build_from_params(tmp_path, capsys):
    assert run(["code", "build", "--params", '{"family": "hgp", "h": "11"}']) == EXIT_OK
    assert _json(capsys)["n"] == 5
    path = tmp_path / "gross.json"
    gross = {"family": "bb", "l": 12, "m": 6, "a": "x^3+y+y^2", "b": "y^3+x+x^2"}
    path.write_text(json.dumps(gross))
    assert run(["code", "build", "--params", str(path)]) == EXIT_OK
    cert = _json(capsys)
    assert (cert["n"], cert["k"]) == (144, 12)


def test_memory_rate_hgp_and_expander_agree(capsys):
    assert run(["memory", "rate", "--family", "hgp"]) == EXIT_OK
    hgp = _json(capsys)
    assert run(["memory", "rate", "--family", "expander"]) == EXIT_OK
    assert _json(capsys) == hgp
    assert run(["memory", "rate"]) == EXIT_OK
    assert _json(capsys) == hgp
    assert hgp["storage_rate"] == pytest.approx(0.0004246, abs=1e-7)


def test_memory_rate_params_override_flags(capsys):
    argv = ["memory", "rate", "--family", "hgp", "--params", '{"family": "bb", "n": 144, "k": 12}']
    assert run(argv) == EXIT_OK
    assert _json(capsys)["chi"] == 1728


def test_memory_pe_accepts_hgp(capsys):
    argv = ["memory", "pe", "--family", "hgp", "--n", "1e6", "--p", "1e-20"]
    assert run(argv) == EXIT_OK
    hgp = _json(capsys)
    assert run(argv[:3] + ["expander"] + argv[4:]) == EXIT_OK
    assert _json(capsys) == hgp
    assert run(["memory", "pe", "--family", "hgp", "--p", "1e-20"]) == EXIT_INVALID


def test_second_order_log_term_flag(capsys):
    base = ["bounds", "second-order", "--p-tilde", "5.297e-4", "--n", "2.565e6", "--eps", "1e-6"]
    assert run(base) == EXIT_OK
    base2 = _json(capsys)
    assert run(base + ["--log-term", "ln"]) == EXIT_OK
    natural = _json(capsys)
    assert natural["inputs"]["log_term"] == "ln"
    assert natural["value"] < base2["value"]
