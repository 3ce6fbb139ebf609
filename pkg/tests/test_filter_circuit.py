import json
import math

import numpy as np
import pytest

from detection import DetectorModel, Ensemble
from filter_circuit import (
    FILTER_MODES,
    POLARIZATION_BASIS,
    POLARIZATION_MODES,
    Circuit,
    CircuitError,
    CircuitParseError,
    InjectTargetError,
    UseAfterDetectError,
    build_beam_splitter_circuit,
    build_filter_circuit,
    build_mz_core_circuit,
    compute_auto_compensation,
    dump_circuit,
    effective_polarization_operator,
    load_circuit,
    parse_circuit,
    polarization_state,
    run_circuit,
    run_pure,
    serialize_circuit,
)
from fock_state import FockState, ModeRegistry, distance


@pytest.fixture(scope="module")
def ideal_filter():
    return build_filter_circuit()


def test_filter_operator_projects_onto_parallel_polarizations(ideal_filter):
    operator = effective_polarization_operator(ideal_filter)
    expected = np.diag([0.25, 0, 0, 0.25])
    assert np.allclose(operator.entries, expected, atol=1e-12)
    assert operator.is_diagonal()
    assert abs(operator.entry("HH", "HH")) == pytest.approx(0.25, abs=1e-12)
    assert abs(operator.entry("VV", "VV")) == pytest.approx(0.25, abs=1e-12)


def test_mixed_inputs_are_suppressed(ideal_filter):
    entries = effective_polarization_operator(ideal_filter).entries
    for index in (1, 2):
        assert np.max(np.abs(entries[index, :])) < 1e-12
        assert np.max(np.abs(entries[:, index])) < 1e-12


def test_auto_compensation_is_zero_with_i_on_reflection():
    assert compute_auto_compensation() == pytest.approx(0.0, abs=1e-12)


def test_removing_the_attenuator_restores_vacuum_amplitude():
    operator = effective_polarization_operator(build_filter_circuit(attenuator_r=0.0))
    assert np.allclose(operator.diagonal(), [0.25, 0, 0, 0.5], atol=1e-12)


def test_attenuator_on_either_v_rail_gives_the_same_operator(ideal_filter):
    other = build_filter_circuit(attenuator_mode="p1V")
    assert np.allclose(
        effective_polarization_operator(other).entries,
        effective_polarization_operator(ideal_filter).entries,
        atol=1e-12,
    )


def test_explicit_phase_rotates_hh_entry():
    operator = effective_polarization_operator(build_filter_circuit(compensation_phi=math.pi))
    assert operator.entry("HH", "HH") == pytest.approx(-0.25, abs=1e-12)
    assert operator.entry("VV", "VV") == pytest.approx(0.25, abs=1e-12)


def test_parallel_inputs_pass_with_one_sixteenth(ideal_filter):
    registry = ideal_filter.registry
    for basis in ("HH", "VV"):
        state = polarization_state(registry, {basis: 1.0})
        out = run_circuit(ideal_filter, Ensemble.from_state(state))
        assert out.acceptance_probability() == pytest.approx(1 / 16, abs=1e-12)
    for basis in ("HV", "VH"):
        out = run_circuit(ideal_filter, Ensemble.from_state(polarization_state(registry, {basis: 1.0})))
        assert out.is_empty()


def test_ensemble_run_matches_pure_run(ideal_filter, rng):
    registry = ideal_filter.registry
    amplitudes = rng.normal(size=4) + 1j * rng.normal(size=4)
    amplitudes /= np.linalg.norm(amplitudes)
    state = polarization_state(registry, dict(zip(POLARIZATION_BASIS, amplitudes)))
    out = run_circuit(ideal_filter, Ensemble.from_state(state))
    assert len(out) == 1
    assert distance(out.branches[0].amplitudes(), run_pure(ideal_filter, state)) < 1e-12


def test_operator_is_linear(ideal_filter, rng):
    registry = ideal_filter.registry
    operator = effective_polarization_operator(ideal_filter)
    for _ in range(5):
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        out = run_pure(ideal_filter, polarization_state(registry, dict(zip(POLARIZATION_BASIS, v))))
        readout = []
        for basis in POLARIZATION_BASIS:
            (occ,) = polarization_state(registry, {basis: 1.0}).terms
            readout.append(out.amplitude(occ))
        assert np.allclose(readout, operator.apply(v), atol=1e-12)


def test_empty_circuit_has_identity_operator():
    circuit = Circuit(modes=POLARIZATION_MODES, inputs=POLARIZATION_MODES, outputs=POLARIZATION_MODES)
    assert np.allclose(effective_polarization_operator(circuit).entries, np.eye(4))


def test_operator_needs_ideal_detectors():
    lossy = build_filter_circuit(detector_model=DetectorModel.lossy(0.88))
    with pytest.raises(CircuitError):
        effective_polarization_operator(lossy)


def test_mach_zehnder_core():
    core = build_mz_core_circuit()
    registry = core.registry

    def run(a, b):
        state = FockState(registry, {(a, b, 0, 0): 1.0})
        return run_circuit(core, Ensemble.from_state(state))

    pair = run(1, 1)
    assert len(pair) == 1
    assert abs(pair.branches[0].amplitudes().amplitude((1, 1, 0, 0))) == pytest.approx(0.25, abs=1e-12)
    assert run(0, 1).is_empty()
    assert run(1, 0).is_empty()
    vac = run(0, 0).branches[0].amplitudes()
    assert vac.amplitude((0, 0, 0, 0)) == pytest.approx(0.5, abs=1e-12)


def test_bundled_fixtures_match_builders(circuits_dir):
    assert load_circuit(circuits_dir / "bs_half.json") == build_beam_splitter_circuit()
    assert load_circuit(circuits_dir / "mz_core.json") == build_mz_core_circuit()
    assert load_circuit(circuits_dir / "filter.json") == build_filter_circuit(input_occupation={"p1H": 1, "p2H": 1})


@pytest.mark.parametrize("name", ["bs_half.json", "mz_core.json", "filter.json"])
def test_round_trip_of_bundled_circuits(circuits_dir, name):
    circuit = load_circuit(circuits_dir / name)
    assert parse_circuit(serialize_circuit(circuit)) == circuit


def test_round_trip_keeps_lossy_models():
    circuit = build_filter_circuit(detector_model=DetectorModel.lossy(0.88, 1e-5))
    again = parse_circuit(serialize_circuit(circuit))
    assert again == circuit
    assert not again.has_ideal_detectors


def test_dump_and_load(tmp_path):
    path = tmp_path / "core.json"
    dump_circuit(build_mz_core_circuit(), path)
    assert load_circuit(path) == build_mz_core_circuit()


def _document(elements, modes=("a", "b")):
    return json.dumps({"modes": list(modes), "inputs": [], "outputs": [], "elements": elements})


def test_unknown_mode_names_element_and_label():
    text = _document([{"type": "bs", "modes": ["a", "b"], "r": 0.5}, {"type": "phase", "mode": "p3H", "phi": 0.1}])
    with pytest.raises(CircuitParseError) as info:
        parse_circuit(text)
    assert info.value.element_index == 1
    assert info.value.label == "p3H"
    assert "p3H" in str(info.value)


def test_use_after_detect_is_rejected():
    text = _document([
        {"type": "detect", "mode": "a", "expect": 0},
        {"type": "bs", "modes": ["a", "b"], "r": 0.5},
    ])
    with pytest.raises(UseAfterDetectError) as info:
        parse_circuit(text)
    assert info.value.element_index == 1


def test_unknown_element_type_is_rejected():
    with pytest.raises(CircuitParseError) as info:
        parse_circuit(_document([{"type": "mirror", "mode": "a"}]))
    assert info.value.element_index == 0


@pytest.mark.parametrize("element", [
    {"type": "bs", "modes": ["a", "b"], "r": "half"},
    {"type": "bs", "modes": ["a", "b"], "r": 1.5},
    {"type": "phase", "mode": "a", "phi": 0.1, "colour": "red"},
    {"type": "permute", "map": {"a": "a", "b": "a"}},
    {"type": "inject", "mode": "a", "photons": -1},
])
def test_malformed_elements_are_rejected(element):
    with pytest.raises(CircuitParseError) as info:
        parse_circuit(_document([element]))
    assert info.value.element_index == 0


def test_malformed_json_reports_line():
    with pytest.raises(CircuitParseError, match="line 2"):
        parse_circuit('{"modes": ["a"],\n "elements": [}')


def test_injecting_into_an_occupied_mode_fails_at_execution():
    circuit = Circuit(modes=("a",), elements=[{"type": "inject", "mode": "a", "photons": 1}])
    state = FockState(circuit.registry, {(1,): 1.0})
    with pytest.raises(InjectTargetError):
        run_circuit(circuit, Ensemble.from_state(state))


def test_input_registry_must_match():
    with pytest.raises(CircuitError):
        run_circuit(build_mz_core_circuit(), Ensemble.from_state(FockState(ModeRegistry(("a", "b")), {(1, 1): 1.0})))


def test_embed_appends_spectator_modes(ideal_filter):
    wide = ideal_filter.embed(["s1H", "s1V"])
    assert wide.modes == FILTER_MODES + ("s1H", "s1V")
    assert wide.elements == ideal_filter.elements


def test_build_rejects_bad_parameters():
    with pytest.raises(ValueError):
        build_filter_circuit(attenuator_r=1.5)
    with pytest.raises(ValueError):
        build_filter_circuit(attenuator_mode="p1H")
    with pytest.raises(ValueError):
        build_filter_circuit(compensation_phi="manual")
