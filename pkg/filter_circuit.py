"""
Circuit netlists, the two-photon polarization filter and its effective operator

A circuit is an ordered list of elements over a fixed mode registry. Circuit
files are JSON documents validated with pydantic; unknown fields are rejected.
"""
import cmath
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Annotated, Dict, Iterable, List, Literal, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from detection import DetectorModel, Ensemble, ideal_postselect, lossy_postselect
from fock_state import FockError, FockState, ModeRegistry
from optics import (
    AncillaNotVacuumError,
    BeamSplitterSpec,
    PhaseSpec,
    apply_beam_splitter,
    apply_phase,
    inject_photons,
    permute_modes,
    s11_matrix_element,
)

logger = logging.getLogger(__name__)

FILTER_MODES = ("p1H", "p1V", "p2H", "p2V", "anc1", "anc2", "attAnc")
POLARIZATION_MODES = ("p1H", "p1V", "p2H", "p2V")
POLARIZATION_BASIS = ("HH", "HV", "VH", "VV")
OPERATOR_TOLERANCE = 1e-12


class CircuitError(ValueError):
    """Base error for invalid circuits."""


class CircuitParseError(CircuitError):
    def __init__(self, message: str, element_index: Optional[int] = None, label: Optional[str] = None):
        self.element_index = element_index
        self.label = label
        prefix = f"element {element_index}: " if element_index is not None else ""
        super().__init__(prefix + message)


class UseAfterDetectError(CircuitParseError):
    pass


class InjectTargetError(CircuitError):
    pass


class ContractViolation(RuntimeError):
    """A numerical result broke a documented contract."""


# --- 1. Circuit elements ---
class _Element(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    def mode_labels(self) -> Tuple[str, ...]:
        raise NotImplementedError


class BeamSplitterElement(_Element):
    type: Literal["bs"] = "bs"
    modes: Tuple[str, str]
    r: float = Field(0.5, ge=0.0, le=1.0, description="Power reflectivity")

    @field_validator("modes")
    @classmethod
    def _distinct(cls, modes):
        if modes[0] == modes[1]:
            raise ValueError("beam splitter ports must differ")
        return modes

    def mode_labels(self):
        return self.modes


class PhaseElement(_Element):
    type: Literal["phase"] = "phase"
    mode: str
    phi: float = Field(..., description="Radians")

    def mode_labels(self):
        return (self.mode,)


class PermuteElement(_Element):
    type: Literal["permute"] = "permute"
    map: Dict[str, str] = Field(..., description="Photons in mode `from` move to mode `to`")

    @field_validator("map")
    @classmethod
    def _bijective(cls, mapping):
        if set(mapping) != set(mapping.values()):
            raise ValueError("permute map must send its modes onto themselves bijectively")
        return mapping

    def mode_labels(self):
        return tuple(self.map)


class InjectElement(_Element):
    type: Literal["inject"] = "inject"
    mode: str
    photons: int = Field(..., ge=0)

    def mode_labels(self):
        return (self.mode,)


class DetectElement(_Element):
    type: Literal["detect"] = "detect"
    mode: str
    expect: int = Field(..., ge=0, description="Photon count reported on success")
    model: DetectorModel = Field(default_factory=DetectorModel.ideal)

    def mode_labels(self):
        return (self.mode,)


CircuitElement = Annotated[
    Union[BeamSplitterElement, PhaseElement, PermuteElement, InjectElement, DetectElement],
    Field(discriminator="type"),
]


class InputTerm(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    occupation: Dict[str, int]
    re: float = 1.0
    im: float = 0.0


class InputSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    terms: Tuple[InputTerm, ...]


# --- 2. Circuit ---
class Circuit(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    modes: Tuple[str, ...]
    inputs: Tuple[str, ...] = ()
    outputs: Tuple[str, ...] = ()
    elements: Tuple[CircuitElement, ...] = ()
    input: Optional[InputSpec] = None

    @model_validator(mode="after")
    def _check_references(self):
        if len(set(self.modes)) != len(self.modes) or not self.modes:
            raise CircuitParseError(f"modes must be a non-empty list of unique labels, got {list(self.modes)}")
        known = set(self.modes)
        for label in self.inputs + self.outputs:
            if label not in known:
                raise CircuitParseError(f"declared input/output mode {label!r} is not in modes", label=label)

        detected: Dict[str, int] = {}
        for index, element in enumerate(self.elements):
            for label in element.mode_labels():
                if label not in known:
                    raise CircuitParseError(f"unknown mode {label!r}", element_index=index, label=label)
                if label in detected:
                    raise UseAfterDetectError(
                        f"mode {label!r} used after its detection at element {detected[label]}",
                        element_index=index,
                        label=label,
                    )
            if isinstance(element, DetectElement):
                detected[element.mode] = index

        if self.input is not None:
            for term in self.input.terms:
                for label in term.occupation:
                    if label not in known:
                        raise CircuitParseError(f"input names unknown mode {label!r}", label=label)
        return self

    @property
    def registry(self) -> ModeRegistry:
        return ModeRegistry(self.modes)

    @property
    def has_ideal_detectors(self) -> bool:
        return all(e.model.is_ideal for e in self.elements if isinstance(e, DetectElement))

    def embed(self, extra_labels: Iterable[str]) -> "Circuit":
        """Same circuit over a registry with extra (spectator) modes appended."""
        data = self.model_dump()
        data["modes"] = list(self.modes) + list(extra_labels)
        return Circuit.model_validate(data)

    def initial_state(self, occupation: Optional[Mapping[str, int]] = None) -> FockState:
        """Input named by `occupation`, else the file's input block."""
        registry = self.registry
        if occupation is not None:
            return FockState.from_labels(registry, [(occupation, 1.0)])
        if self.input is None:
            raise CircuitError("circuit declares no input state")
        return FockState.from_labels(
            registry, [(term.occupation, complex(term.re, term.im)) for term in self.input.terms]
        )


# --- 3. Execution ---
def _permutation(registry: ModeRegistry, mapping: Mapping[str, str]) -> List[int]:
    permutation = list(range(registry.size))
    for source, destination in mapping.items():
        permutation[registry.index(source)] = registry.index(destination)
    return permutation


def _pure_step(registry: ModeRegistry, element, index: int):
    """State transformation for every element except lossy detection."""
    if isinstance(element, BeamSplitterElement):
        spec = BeamSplitterSpec(
            mode_a=registry.index(element.modes[0]),
            mode_b=registry.index(element.modes[1]),
            reflectivity=element.r,
        )
        return lambda state: apply_beam_splitter(state, spec)
    if isinstance(element, PhaseElement):
        spec = PhaseSpec(mode=registry.index(element.mode), phi=element.phi)
        return lambda state: apply_phase(state, spec)
    if isinstance(element, PermuteElement):
        permutation = _permutation(registry, element.map)
        return lambda state: permute_modes(state, permutation)
    if isinstance(element, InjectElement):
        def inject(state):
            try:
                return inject_photons(state, element.mode, element.photons)
            except AncillaNotVacuumError as e:
                raise InjectTargetError(f"element {index}: {e}") from e
        return inject
    if isinstance(element, DetectElement):
        return lambda state: ideal_postselect(state, element.mode, element.expect)
    raise CircuitError(f"element {index}: unsupported element {element!r}")


def _check_registry(circuit: Circuit, registry: ModeRegistry) -> None:
    if registry != circuit.registry:
        raise CircuitError(
            f"input registry {list(registry.labels)} does not match circuit modes {list(circuit.modes)}"
        )


def run_pure(circuit: Circuit, state: FockState) -> FockState:
    """Sequential pure-state evolution; every detector must be ideal."""
    _check_registry(circuit, state.registry)
    if not circuit.has_ideal_detectors:
        raise CircuitError("pure-state evolution needs ideal detectors")
    registry = circuit.registry
    for index, element in enumerate(circuit.elements):
        state = _pure_step(registry, element, index)(state)
    return state


def run_circuit(circuit: Circuit, input: Ensemble) -> Ensemble:
    """Apply every element in order; lossy detectors split branches by true photon number."""
    _check_registry(circuit, input.registry)
    registry = circuit.registry
    ensemble = input
    for index, element in enumerate(circuit.elements):
        if isinstance(element, DetectElement) and not element.model.is_ideal:
            ensemble = lossy_postselect(ensemble, element.mode, element.expect, element.model)
        else:
            ensemble = ensemble.apply(_pure_step(registry, element, index))
        logger.debug("element %d (%s): %d branches, acceptance %.6g",
                     index, element.type, len(ensemble), ensemble.acceptance_probability())
    return ensemble


# --- 4. Effective polarization operator ---
@dataclass(frozen=True)
class PolarizationOperator:
    """4x4 matrix over (HH, HV, VH, VV); entries[out, in]."""
    entries: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.entries, dtype=complex)
        if matrix.shape != (4, 4) or not np.all(np.isfinite(matrix)):
            raise ValueError("a polarization operator is a finite 4x4 matrix")
        object.__setattr__(self, "entries", matrix)

    def entry(self, out: str, into: str) -> complex:
        return complex(self.entries[POLARIZATION_BASIS.index(out), POLARIZATION_BASIS.index(into)])

    def diagonal(self) -> np.ndarray:
        return np.diag(self.entries).copy()

    def is_diagonal(self, tolerance: float = OPERATOR_TOLERANCE) -> bool:
        off = self.entries - np.diag(np.diag(self.entries))
        return bool(np.max(np.abs(off)) <= tolerance)

    def apply(self, vector: Sequence[complex]) -> np.ndarray:
        return self.entries @ np.asarray(vector, dtype=complex)


def _two_photon_occupation(registry: ModeRegistry, modes: Sequence[str], basis: str) -> Tuple[int, ...]:
    """One photon per path: modes are (path1 H, path1 V, path2 H, path2 V)."""
    occ = [0] * registry.size
    first = modes[0] if basis[0] == "H" else modes[1]
    second = modes[2] if basis[1] == "H" else modes[3]
    occ[registry.index(first)] += 1
    occ[registry.index(second)] += 1
    return tuple(occ)


def effective_polarization_operator(circuit: Circuit) -> PolarizationOperator:
    if not circuit.has_ideal_detectors:
        raise CircuitError("operator extraction needs ideal detectors")
    if len(circuit.inputs) != 4 or len(circuit.outputs) != 4:
        raise CircuitError("operator extraction needs four input and four output polarization modes")
    registry = circuit.registry
    matrix = np.zeros((4, 4), dtype=complex)
    for column, basis_in in enumerate(POLARIZATION_BASIS):
        state = FockState(registry, {_two_photon_occupation(registry, circuit.inputs, basis_in): 1.0})
        out = run_pure(circuit, state)
        for row, basis_out in enumerate(POLARIZATION_BASIS):
            matrix[row, column] = out.amplitude(_two_photon_occupation(registry, circuit.outputs, basis_out))
    return PolarizationOperator(matrix)


def polarization_state(registry: ModeRegistry, amplitudes: Mapping[str, complex],
                       modes: Sequence[str] = POLARIZATION_MODES) -> FockState:
    """Two-photon state from amplitudes on 'HH', 'HV', 'VH', 'VV'."""
    return FockState.from_amplitudes(
        registry, {_two_photon_occupation(registry, modes, basis): a for basis, a in amplitudes.items()}
    )


# --- 5. Prebuilt circuits ---
def _swap_h_rails() -> PermuteElement:
    return PermuteElement(map={"p1H": "p2H", "p2H": "p1H"})


def _filter_elements(phi: float, detector_model: DetectorModel, attenuator_r: float,
                     attenuator_mode: str) -> List:
    return [
        _swap_h_rails(),
        BeamSplitterElement(modes=("p1H", "p2H"), r=0.5),
        InjectElement(mode="anc1", photons=1),
        BeamSplitterElement(modes=("p1H", "anc1"), r=0.5),
        DetectElement(mode="anc1", expect=1, model=detector_model),
        InjectElement(mode="anc2", photons=1),
        BeamSplitterElement(modes=("p2H", "anc2"), r=0.5),
        DetectElement(mode="anc2", expect=1, model=detector_model),
        BeamSplitterElement(modes=("p1H", "p2H"), r=0.5),
        PhaseElement(mode="p1H", phi=phi),
        InjectElement(mode="attAnc", photons=0),
        BeamSplitterElement(modes=(attenuator_mode, "attAnc"), r=attenuator_r),
        DetectElement(mode="attAnc", expect=0, model=detector_model),
        _swap_h_rails(),
    ]


def _normalize_angle(phi: float) -> float:
    phi = math.remainder(phi, 2.0 * math.pi)
    return 0.0 if abs(phi) < OPERATOR_TOLERANCE else phi


def compute_auto_compensation(attenuator_r: float = 0.75, attenuator_mode: str = "p2V") -> float:
    """Phase that makes the HH entry of the ideal filter real and positive."""
    bare = Circuit(
        modes=FILTER_MODES,
        inputs=POLARIZATION_MODES,
        outputs=POLARIZATION_MODES,
        elements=_filter_elements(0.0, DetectorModel.ideal(), attenuator_r, attenuator_mode),
    )
    hh = effective_polarization_operator(bare).entry("HH", "HH")
    if abs(hh) <= OPERATOR_TOLERANCE:
        return 0.0
    return _normalize_angle(-cmath.phase(hh))


def build_filter_circuit(
    compensation_phi: Union[float, Literal["auto"]] = "auto",
    detector_model: Optional[DetectorModel] = None,
    attenuator_r: float = 0.75,
    attenuator_mode: str = "p2V",
    input_occupation: Optional[Mapping[str, int]] = None,
) -> Circuit:
    """The two-photon polarization filter: H-rail Mach-Zehnder core plus V-rail attenuator."""
    detector_model = detector_model or DetectorModel.ideal()
    if not 0.0 <= attenuator_r <= 1.0:
        raise ValueError(f"attenuator reflectivity must lie in [0, 1], got {attenuator_r}")
    if attenuator_mode not in ("p1V", "p2V"):
        raise ValueError(f"attenuator must sit on p1V or p2V, got {attenuator_mode!r}")
    if isinstance(compensation_phi, str):
        if compensation_phi.lower() != "auto":
            raise ValueError(f"compensation phase must be a number or 'auto', got {compensation_phi!r}")
        phi = compute_auto_compensation(attenuator_r, attenuator_mode)
    else:
        phi = float(compensation_phi)
        if not math.isfinite(phi):
            raise ValueError("compensation phase must be finite")

    logger.info("building filter: phi=%.6g, attenuator R=%.6g on %s, detectors=%s",
                phi, attenuator_r, attenuator_mode, detector_model.kind.value)
    spec_input = None
    if input_occupation is not None:
        spec_input = InputSpec(terms=(InputTerm(occupation=dict(input_occupation)),))
    return Circuit(
        modes=FILTER_MODES,
        inputs=POLARIZATION_MODES,
        outputs=POLARIZATION_MODES,
        elements=_filter_elements(phi, detector_model, attenuator_r, attenuator_mode),
        input=spec_input,
    )


def build_mz_core_circuit() -> Circuit:
    """Splitter, conditional S11 on both arms, splitter; input |1;1>."""
    return Circuit(
        modes=("a", "b", "anc1", "anc2"),
        inputs=("a", "b"),
        outputs=("a", "b"),
        elements=(
            BeamSplitterElement(modes=("a", "b"), r=0.5),
            InjectElement(mode="anc1", photons=1),
            BeamSplitterElement(modes=("a", "anc1"), r=0.5),
            DetectElement(mode="anc1", expect=1),
            InjectElement(mode="anc2", photons=1),
            BeamSplitterElement(modes=("b", "anc2"), r=0.5),
            DetectElement(mode="anc2", expect=1),
            BeamSplitterElement(modes=("a", "b"), r=0.5),
        ),
        input=InputSpec(terms=(InputTerm(occupation={"a": 1, "b": 1}),)),
    )


def build_beam_splitter_circuit() -> Circuit:
    return Circuit(
        modes=("a", "b"),
        inputs=("a", "b"),
        outputs=("a", "b"),
        elements=(BeamSplitterElement(modes=("a", "b"), r=0.5),),
        input=InputSpec(terms=(InputTerm(occupation={"a": 1, "b": 1}),)),
    )


# --- 6. Circuit files ---
def _error_location(loc: Sequence) -> Tuple[Optional[int], str]:
    if len(loc) >= 2 and loc[0] == "elements" and isinstance(loc[1], int):
        return loc[1], ".".join(str(part) for part in loc[2:])
    return None, ".".join(str(part) for part in loc)


def parse_circuit(text: str) -> Circuit:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise CircuitParseError(f"malformed JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
    if not isinstance(document, dict):
        raise CircuitParseError("a circuit file must hold a JSON object")
    try:
        return Circuit.model_validate(document)
    except ValidationError as e:
        for error in e.errors():
            original = (error.get("ctx") or {}).get("error")
            if isinstance(original, CircuitError):
                raise original from e
        first = e.errors()[0]
        element_index, field = _error_location(first["loc"])
        where = f"{field}: " if field else ""
        raise CircuitParseError(where + first["msg"], element_index=element_index) from e


def serialize_circuit(circuit: Circuit) -> str:
    return json.dumps(circuit.model_dump(mode="json", exclude_none=True), indent=2) + "\n"


def load_circuit(path: Union[str, Path]) -> Circuit:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise CircuitParseError(f"cannot read circuit file {path}: {e}") from e
    return parse_circuit(text)


def dump_circuit(circuit: Circuit, path: Union[str, Path]) -> None:
    Path(path).write_text(serialize_circuit(circuit), encoding="utf-8")
    logger.info("circuit written to %s", path)


# --- 7. Reports shared by the front ends ---
def _pair(z: complex) -> Tuple[float, float]:
    return (float(z.real), float(z.imag))


class OperatorReport(BaseModel):
    attenuator_r: float
    attenuator_mode: str
    compensation_phi: float
    auto_compensation: bool
    basis: List[str] = Field(default_factory=lambda: list(POLARIZATION_BASIS))
    entries: List[List[Tuple[float, float]]] = Field(..., description="Rows are outputs, columns inputs")
    diagonal: List[Tuple[float, float]]
    acceptance: Dict[str, float] = Field(..., description="Post-selection probability per basis input")
    s11_elements: Dict[str, Tuple[float, float]] = Field(
        ..., description="Single-ancilla conditional amplitude for n = 0..4 photons")


def operator_report(attenuator_r: float = 0.75, attenuator_mode: str = "p2V",
                    phi: Optional[float] = None) -> OperatorReport:
    """Effective operator of the ideal filter; raises ContractViolation when it is not diagonal."""
    auto = phi is None
    circuit = build_filter_circuit("auto" if auto else phi, attenuator_r=attenuator_r,
                                   attenuator_mode=attenuator_mode)
    used_phi = next(e.phi for e in circuit.elements if isinstance(e, PhaseElement))
    operator = effective_polarization_operator(circuit)
    if not operator.is_diagonal():
        logger.warning("effective operator is not diagonal:\n%s", operator.entries)
        raise ContractViolation("effective polarization operator is not diagonal within 1e-12")

    registry = circuit.registry
    acceptance = {}
    for basis in POLARIZATION_BASIS:
        state = FockState(registry, {_two_photon_occupation(registry, circuit.inputs, basis): 1.0})
        acceptance[basis] = run_pure(circuit, state).norm_squared()
    return OperatorReport(
        attenuator_r=attenuator_r,
        attenuator_mode=attenuator_mode,
        compensation_phi=used_phi,
        auto_compensation=auto,
        entries=[[_pair(z) for z in row] for row in operator.entries],
        diagonal=[_pair(z) for z in operator.diagonal()],
        acceptance=acceptance,
        s11_elements={str(n): _pair(s11_matrix_element(n, n)) for n in range(5)},
    )


class TermReport(BaseModel):
    occupation: Dict[str, int]
    amplitude: Tuple[float, float]


class BranchReport(BaseModel):
    weight: float
    terms: List[TermReport]


class CircuitRunReport(BaseModel):
    modes: List[str]
    input: List[TermReport]
    acceptance: float
    branches: List[BranchReport]


def _terms(state: FockState, scale: float = 1.0) -> List[TermReport]:
    labels = state.registry.labels
    return [
        TermReport(
            occupation={label: n for label, n in zip(labels, occ) if n},
            amplitude=_pair(scale * amplitude),
        )
        for occ, amplitude in state.terms_sorted()
    ]


def circuit_report(circuit: Circuit, occupation: Optional[Mapping[str, int]] = None) -> CircuitRunReport:
    """Run a circuit on its declared input (or `occupation`) and describe the conditioned ensemble.

    Branch terms carry unnormalized amplitudes: sqrt(weight) times the branch state.
    """
    state = circuit.initial_state(occupation)
    try:
        output = run_circuit(circuit, Ensemble.from_state(state.normalized()))
    except (InjectTargetError, FockError) as e:
        raise ContractViolation(f"circuit execution failed: {e}") from e
    logger.info("circuit run: %d branches, acceptance %.6g", len(output), output.acceptance_probability())
    return CircuitRunReport(
        modes=list(circuit.modes),
        input=_terms(state),
        acceptance=output.acceptance_probability(),
        branches=[
            BranchReport(weight=branch.weight, terms=_terms(branch.state, math.sqrt(branch.weight)))
            for branch in output
        ],
    )
