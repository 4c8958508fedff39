import json
import math

import pytest

from hqoc.circuit import Circuit, disp_q, serialize_circuit, squeeze
from hqoc.cli import main
from hqoc.pipeline import prep_size_formula


@pytest.fixture
def circuit_file(tmp_path):
    c = Circuit(1, 1, (squeeze(0, 1.5), disp_q(0, 4.0)))
    path = tmp_path / "circuit.json"
    path.write_text(serialize_circuit(c))
    return path


def test_analyze(circuit_file, tmp_path):
    out = tmp_path / "report.json"
    assert main(["analyze", str(circuit_file), "--out", str(out)]) == 0
    report = json.loads(out.read_text())["report"]
    assert report["per_mode"][0]["g_bar"] == pytest.approx(1.5)
    assert report["per_mode"][0]["xi_bar"] == pytest.approx(4.0)
    assert "energy_upper_bound" in report


def test_substitute(circuit_file, tmp_path, capsys):
    out = tmp_path / "sub.json"
    assert main(["substitute", str(circuit_file), "--out", str(out)]) == 0
    from hqoc.circuit import parse_circuit

    sub = parse_circuit(out.read_text())
    assert all(abs(g.t) <= 1 for g in sub.gates if g.kind == "disp_q")


def test_simulate(circuit_file, tmp_path):
    out = tmp_path / "sim.json"
    assert main(["simulate", str(circuit_file), "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["norm"] == pytest.approx(1.0, abs=1e-9)
    assert payload["energy_max"] <= payload["analysis"]["energy_upper_bound"]


def test_prep_gate_count(tmp_path):
    out = tmp_path / "prep.json"
    assert main(["prep", "--n", "3", "--delta", "0.02", "--emit", str(out)]) == 0
    from hqoc.circuit import parse_circuit

    c = parse_circuit(out.read_text())
    assert len(c.gates) == prep_size_formula(3, 0.02)


def test_prep_requires_parameters(capsys):
    assert main(["prep", "--delta", "0.02"]) == 1


def test_sample_deterministic(tmp_path):
    args = ["sample", "--n", "2", "--m", "1", "--delta", "0.02", "--shots", "50",
            "--seed", "7"]
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    bud = tmp_path / "budget.json"
    assert main(args + ["--out", str(out1), "--budget-out", str(bud)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert set(out1.read_text().splitlines()) == {"00"}
    budget = json.loads(bud.read_text())["budget"]
    assert budget["eps_gate"] == 0.0
    assert budget["sizes"]["T_total"] == budget["sizes"]["T_prep"]


def test_sample_logical_x(tmp_path):
    out = tmp_path / "x.csv"
    assert main(["sample", "--n", "2", "--m", "1", "--delta", "0.02", "--shots",
                 "20", "--seed", "1", "--logical", "X:2", "--out", str(out)]) == 0
    assert set(out.read_text().splitlines()) == {"01"}


def test_tradeoff_table(tmp_path):
    out = tmp_path / "table.json"
    assert main(["tradeoff", "--table", "--n-values", "16,64,256", "--out",
                 str(out)]) == 0
    table = json.loads(out.read_text())["table"]
    assert {row["regime"] for row in table} == {"m=1", "m=ceil(sqrt(n))", "m=n"}


def test_tradeoff_point_queries(tmp_path):
    out = tmp_path / "point.json"
    assert main(["tradeoff", "--n", "10", "--m", "2", "--s", "100", "--epsilon",
                 "0.5", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["required_energy"]["log2"] > 0


def test_lowerbound(tmp_path):
    out = tmp_path / "lb.json"
    assert main(["lowerbound", "--d", "2", "--m", "1", "--r", "0", "--delta",
                 str(1 / 36), "--R", "1.0", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["radius_dimension_bound"] == pytest.approx(math.sqrt(math.pi) / 2)
    assert payload["donoho_stark"]["trace"] == pytest.approx(4 / math.pi, rel=0.005)


def test_verify_subset(capsys):
    assert main(["verify", "--criteria", "11,12"]) == 0
    out = capsys.readouterr().out
    assert "criterion 11" in out and "criterion 12" in out


def test_unknown_criteria_rejected():
    assert main(["verify", "--criteria", "99"]) == 1


def test_missing_file_is_validation_error():
    assert main(["analyze", "/nonexistent/circuit.json"]) == 1


def test_mem_cap_exit_code(circuit_file):
    assert main(["simulate", str(circuit_file), "--mem-cap-mb", "0.0001"]) == 2
