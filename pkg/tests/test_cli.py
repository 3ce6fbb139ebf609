import json
import math

import pytest

from cli import EXIT_CONTRACT, EXIT_OK, EXIT_USAGE, main
from filter_circuit import CircuitRunReport, OperatorReport
from scenarios import ErrorReport, ScenarioReport


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    assert code == EXIT_OK
    return json.loads(out)


def magnitude(pair):
    return math.hypot(*pair)


def test_operator_diagonal(capsys):
    report = run_json(capsys, "operator")
    assert [magnitude(z) for z in report["diagonal"]] == pytest.approx([0.25, 0, 0, 0.25], abs=1e-6)
    assert report["compensation_phi"] == pytest.approx(0.0, abs=1e-9)
    assert report["auto_compensation"] is True
    assert report["acceptance"]["HH"] == pytest.approx(0.0625)
    assert report["acceptance"]["HV"] == pytest.approx(0, abs=1e-12)
    assert magnitude(report["s11_elements"]["1"]) == pytest.approx(0, abs=1e-12)


def test_operator_without_attenuator(capsys):
    report = run_json(capsys, "operator", "--attenuator-r", "0")
    assert [magnitude(z) for z in report["diagonal"]] == pytest.approx([0.25, 0, 0, 0.5], abs=1e-6)


def test_operator_csv_is_four_by_eight(capsys):
    code, out = run(capsys, "operator", "--format", "csv")
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    comments = [line for line in lines if line.startswith("#")]
    assert comments == ["# compensation_phi: 0 (auto)", "# acceptance: HH=0.0625 HV=0 VH=0 VV=0.0625"]
    header, *rows = [line for line in lines if not line.startswith("#")]
    assert header.split(",")[:2] == ["HH_re", "HH_im"]
    assert len(rows) == 4
    for row in rows:
        values = [float(x) for x in row.split(",")]
        assert len(values) == 8
    assert float(rows[0].split(",")[0]) == pytest.approx(0.25)


def test_scenario_entangle(capsys):
    report = run_json(capsys, "scenario", "entangle")
    assert report["acceptance"] == pytest.approx(0.03125)
    assert report["concurrence"] == pytest.approx(1.0)
    assert report["amplitudes"]["HH"][0] == pytest.approx(1 / math.sqrt(2), rel=1e-5)
    assert report["amplitudes"]["VV"][0] == pytest.approx(1 / math.sqrt(2), rel=1e-5)


def test_scenario_ghz4(capsys):
    report = run_json(capsys, "scenario", "ghz4")
    assert [magnitude(a) for a in report["unnormalized_amplitudes"].values()] == pytest.approx([0.125, 0.125])


def test_scenario_encode2_coefficients(capsys):
    report = run_json(capsys, "scenario", "encode2", "--ch", "0.6", "--cv", "0.8")
    amplitudes = report["unnormalized_amplitudes"]
    assert amplitudes["HH"][0] == pytest.approx(0.6 / (4 * math.sqrt(2)), rel=1e-5)
    assert amplitudes["VV"][0] == pytest.approx(0.8 / (4 * math.sqrt(2)), rel=1e-5)


def test_scenario_accepts_complex_coefficients(capsys):
    report = run_json(capsys, "scenario", "encode3", "--ch", "0.6", "--cv", "0.8j")
    assert report["amplitudes"]["VVV"][1] == pytest.approx(0.8, rel=1e-5)


def test_seeded_max_entangled_runs_are_identical(capsys):
    first = run(capsys, "scenario", "max-entangled", "--seed", "3")
    second = run(capsys, "scenario", "max-entangled", "--seed", "3")
    assert first[0] == EXIT_OK
    assert first == second
    assert json.loads(first[1])["concurrence"] == pytest.approx(1.0, abs=1e-6)


def test_relative_phase_between_c1_and_c2_is_a_usage_error(capsys):
    assert main(["scenario", "max-entangled", "--c1", "0.6", "--c2", "0.8j"]) == EXIT_USAGE


def test_unknown_scenario_is_a_usage_error(capsys):
    assert main(["scenario", "teleport"]) == EXIT_USAGE


def test_unnormalized_coefficients_are_a_usage_error(capsys):
    assert main(["scenario", "encode2", "--ch", "1", "--cv", "1"]) == EXIT_USAGE


def test_error_analysis_reference_values(capsys):
    report = run_json(capsys, "error-analysis", "--eta", "0.88", "--dark", "0")
    assert report["misread_2_as_1"] == pytest.approx(0.2112)
    assert 0.04 <= report["hv_error_rate"] <= 0.06
    assert 0.65 <= report["mixture_entangled_fraction"] <= 0.75
    assert report["quoted_values"]["misread_2_as_1"] == 0.19


def test_error_analysis_ideal_limit(capsys):
    report = run_json(capsys, "error-analysis", "--eta", "1.0", "--dark", "0")
    assert report["misread_2_as_1"] == 0
    assert report["hv_error_rate"] == pytest.approx(0, abs=1e-12)
    assert report["false_transmission_prob"] == pytest.approx(0, abs=1e-12)


def test_error_analysis_dark_counts(capsys):
    report = run_json(capsys, "error-analysis", "--dark-rate", "1e4", "--window", "1e-9")
    assert report["dark_counts_per_pulse"] == 1e-5


def test_error_analysis_text_format(capsys):
    code, out = run(capsys, "error-analysis", "--eta", "0.88", "--format", "text")
    assert code == EXIT_OK
    assert any(line.startswith("misread_2_as_1") and "0.2112" in line for line in out.splitlines())


def test_invalid_eta_is_a_usage_error(capsys):
    assert main(["error-analysis", "--eta", "1.5"]) == EXIT_USAGE


def test_sweep_csv(capsys):
    code, out = run(capsys, "sweep", "--eta-min", "0.8", "--eta-max", "1.0", "--steps", "3", "--format", "csv")
    assert code == EXIT_OK
    header, *rows = out.strip().splitlines()
    eta_column = header.split(",").index("eta")
    assert [float(r.split(",")[eta_column]) for r in rows] == pytest.approx([0.8, 0.9, 1.0])


def test_circuit_filter_fixture(capsys, circuits_dir):
    report = run_json(capsys, "circuit", str(circuits_dir / "filter.json"))
    assert report["acceptance"] == pytest.approx(0.0625)
    (branch,) = report["branches"]
    (term,) = branch["terms"]
    assert term["occupation"] == {"p1H": 1, "p2H": 1}
    assert magnitude(term["amplitude"]) == pytest.approx(0.25)


def test_circuit_input_override(capsys, circuits_dir):
    report = run_json(capsys, "circuit", str(circuits_dir / "filter.json"), "--input", "p1H=1,p2V=1")
    assert report["acceptance"] == 0
    assert report["branches"] == []


def test_circuit_mz_core_fixture(capsys, circuits_dir):
    report = run_json(capsys, "circuit", str(circuits_dir / "mz_core.json"))
    (branch,) = report["branches"]
    (term,) = branch["terms"]
    assert term["occupation"] == {"a": 1, "b": 1}
    assert magnitude(term["amplitude"]) == pytest.approx(0.25)


def test_circuit_beam_splitter_fixture_bunches(capsys, circuits_dir):
    report = run_json(capsys, "circuit", str(circuits_dir / "bs_half.json"))
    (branch,) = report["branches"]
    amplitudes = {json.dumps(t["occupation"], sort_keys=True): t["amplitude"] for t in branch["terms"]}
    assert set(amplitudes) == {'{"a": 2}', '{"b": 2}'}
    for re, im in amplitudes.values():
        assert re == pytest.approx(0, abs=1e-9)
        assert im == pytest.approx(1 / math.sqrt(2), rel=1e-5)


def test_malformed_circuit_file(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"modes": ["a"], "elements": [', encoding="utf-8")
    assert main(["circuit", str(path)]) == EXIT_USAGE
    assert "line" in capsys.readouterr().err


def test_missing_circuit_file(capsys, tmp_path):
    assert main(["circuit", str(tmp_path / "absent.json")]) == EXIT_USAGE


def test_execution_failure_is_a_contract_violation(capsys, tmp_path):
    path = tmp_path / "inject.json"
    path.write_text(json.dumps({
        "modes": ["a"],
        "elements": [{"type": "inject", "mode": "a", "photons": 1}],
        "input": {"terms": [{"occupation": {"a": 1}}]},
    }), encoding="utf-8")
    assert main(["circuit", str(path)]) == EXIT_CONTRACT


def test_output_is_deterministic(capsys, circuits_dir):
    first = run(capsys, "circuit", str(circuits_dir / "filter.json"), "--format", "text")
    second = run(capsys, "circuit", str(circuits_dir / "filter.json"), "--format", "text")
    assert first == second


def test_missing_command_is_a_usage_error(capsys):
    assert main([]) == EXIT_USAGE


@pytest.mark.parametrize("argv, model", [
    (["operator"], OperatorReport),
    (["operator", "--phi", "3.14159"], OperatorReport),
    (["scenario", "entangle", "--eta", "0.88"], ScenarioReport),
    (["scenario", "encode-n", "--photons", "4"], ScenarioReport),
    (["error-analysis", "--eta", "0.88"], ErrorReport),
    (["error-analysis", "--eta", "0.7", "--dark", "0.01"], ErrorReport),
    (["circuit", "filter.json"], CircuitRunReport),
])
def test_json_output_validates_against_report_models(capsys, circuits_dir, argv, model):
    if argv[0] == "circuit":
        argv = ["circuit", str(circuits_dir / argv[1])]
    code, out = run(capsys, *argv)
    assert code == EXIT_OK
    model.model_validate(json.loads(out))


def test_sweep_json_validates_against_report_model(capsys):
    code, out = run(capsys, "sweep", "--eta-min", "0.5", "--eta-max", "1.0", "--steps", "4")
    assert code == EXIT_OK
    reports = [ErrorReport.model_validate(item) for item in json.loads(out)]
    assert [r.eta for r in reports] == sorted(r.eta for r in reports)
