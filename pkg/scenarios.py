"""
Prebuilt filter experiments and the detector error analysis

Each scenario builds its input directly as a state, sends two photons through
the filter and returns the conditioned ensemble with its acceptance
probability. Photons that do not pass the filter ride along in spectator modes.
"""
import cmath
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from analysis import concurrence, fidelity_to_pure, reduce_to_polarization, vector_from_amplitudes
from config import get_config
from detection import DetectorModel, Ensemble, povm_probability
from filter_circuit import FILTER_MODES, POLARIZATION_MODES, Circuit, build_filter_circuit, run_circuit
from fock_state import FockState, ModeRegistry

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-12
# printed reports keep six significant digits and must still validate
FRACTION_SLACK = 2e-6
SQRT_HALF = 1.0 / math.sqrt(2.0)
PATH_MODES = (("p1H", "p1V"), ("p2H", "p2V"))

QUOTED_VALUES = {
    "misread_2_as_1": 0.19,
    "hv_error_rate": 0.05,
    "ideal_success_prob": 0.0313,
    "false_transmission_prob": 0.0125,
    "mixture_entangled_fraction": 0.70,
    "mixture_single_photon_fraction": 0.30,
    "dark_counts_per_pulse": 1e-5,
}

SCENARIO_NAMES = ("entangle", "max-entangled", "ghz4", "encode2", "encode3", "encode-n")


def _check_normalized(*coefficients: complex) -> None:
    total = math.fsum(abs(c) ** 2 for c in coefficients)
    if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
        raise ValueError(f"coefficients must be normalized, squared norm is {total:.15g}")


class MaxEntangledParams(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    c1: complex
    c2: complex
    phi: float = 0.0

    @model_validator(mode="after")
    def _normalized(self):
        _check_normalized(self.c1, self.c2)
        # |c1^2 + c2^2| = 1 exactly when c1 and c2 share one phase
        if abs(abs(self.c1 ** 2 + self.c2 ** 2) - 1.0) > NORMALIZATION_TOLERANCE:
            raise ValueError("c1 and c2 must share a common phase for the state to be maximally entangled")
        return self


class QubitCoeffs(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    cH: complex
    cV: complex

    @model_validator(mode="after")
    def _normalized(self):
        _check_normalized(self.cH, self.cV)
        return self


class ErrorReport(BaseModel):
    eta: float
    dark: float
    misread_2_as_1: float = Field(..., ge=0.0, le=1.0)
    hv_error_rate: float = Field(..., ge=0.0, le=1.0)
    hv_input_error_rates: Dict[str, float]
    ideal_success_prob: float = Field(..., ge=0.0, le=1.0)
    false_transmission_prob: float = Field(..., ge=0.0, le=1.0)
    mixture_entangled_fraction: float = Field(
        ..., ge=0.0, le=1.0,
        description="ideal_success_prob / (ideal_success_prob + false_transmission_prob): a budget ratio "
                    "of two separate runs, not a weight of the conditioned ensemble")
    mixture_single_photon_fraction: float = Field(
        ..., ge=0.0, le=1.0, description="1 - mixture_entangled_fraction; same budget ratio")
    pair_output_fraction: float = Field(
        ..., ge=0.0, le=1.0,
        description="Share of the accepted |R;L> weight, lossy detectors, in two-photon branches")
    single_output_fraction: float = Field(
        ..., ge=0.0, le=1.0, description="Share of the same accepted weight in one-photon branches")
    vacuum_output_fraction: float = Field(
        ..., ge=0.0, le=1.0, description="Share of the same accepted weight in branches with no photon")
    lossy_success_prob: float = Field(..., ge=0.0, le=1.0)
    dark_counts_per_pulse: float = Field(..., ge=0.0)
    quoted_values: Dict[str, float] = Field(default_factory=lambda: dict(QUOTED_VALUES))

    @model_validator(mode="after")
    def _fractions_sum_to_one(self):
        if abs(self.mixture_entangled_fraction + self.mixture_single_photon_fraction - 1.0) > FRACTION_SLACK:
            raise ValueError("mixture fractions must sum to 1")
        return self


class ScenarioReport(BaseModel):
    """What every front end prints for a scenario run."""
    name: str
    description: str
    photons: List[str] = Field(..., description="Photon order of the amplitude keys")
    acceptance: float
    branches: int
    amplitudes: Optional[Dict[str, Tuple[float, float]]] = Field(
        None, description="Normalized output amplitudes (re, im); single-branch outputs only")
    unnormalized_amplitudes: Optional[Dict[str, Tuple[float, float]]] = None
    circular_amplitudes: Optional[Dict[str, Tuple[float, float]]] = None
    photon_number_weights: Dict[str, float] = Field(default_factory=dict)
    concurrence: Optional[float] = None
    fidelity: Optional[float] = None


# --- state construction ---
@lru_cache(maxsize=None)
def polarization_registry() -> ModeRegistry:
    return ModeRegistry(POLARIZATION_MODES)


def _photon_occupation(registry: ModeRegistry, photon_modes: Sequence[Tuple[str, str]], word: str) -> Tuple[int, ...]:
    occ = [0] * registry.size
    for (h, v), letter in zip(photon_modes, word):
        occ[registry.index(h if letter == "H" else v)] += 1
    return tuple(occ)


def polarization_product_state(registry: ModeRegistry, photon_modes: Sequence[Tuple[str, str]],
                               amplitudes: Mapping[str, complex]) -> FockState:
    """State from amplitudes on polarization words such as 'HV' or 'HHVV'."""
    return FockState.from_amplitudes(
        registry, {_photon_occupation(registry, photon_modes, word): a for word, a in amplitudes.items()}
    )


def max_entangled_state(p: MaxEntangledParams) -> FockState:
    """(1/sqrt2)[|H>(c1|H> + c2|V>) + e^{-i phi}|V>(c2|H> - c1|V>)] over the polarization modes."""
    phase = cmath.exp(-1j * p.phi)
    amplitudes = {
        "HH": SQRT_HALF * p.c1,
        "HV": SQRT_HALF * p.c2,
        "VH": SQRT_HALF * phase * p.c2,
        "VV": -SQRT_HALF * phase * p.c1,
    }
    return polarization_product_state(polarization_registry(), PATH_MODES, amplitudes)


def circular_state() -> FockState:
    """|R;L> = (|H> + i|V>)(|H> - i|V>)/2."""
    amplitudes = {"HH": 0.5, "HV": -0.5j, "VH": 0.5j, "VV": 0.5}
    return polarization_product_state(polarization_registry(), PATH_MODES, amplitudes)


def ghz_amplitudes(n_photons: int) -> Dict[str, complex]:
    """(|H...H> + |V...V>)/sqrt2; a single photon gives (|H> + |V>)/sqrt2."""
    if n_photons < 1:
        raise ValueError(f"need at least one photon, got {n_photons}")
    return {"H" * n_photons: SQRT_HALF, "V" * n_photons: SQRT_HALF}


# --- reading states back ---
def photon_amplitudes(state: FockState, photon_modes: Sequence[Tuple[str, str]]) -> Dict[str, complex]:
    """Amplitudes keyed by per-photon polarization words; terms outside that subspace are skipped."""
    registry = state.registry
    indices = [(registry.index(h), registry.index(v)) for h, v in photon_modes]
    tracked = {i for pair in indices for i in pair}
    out: Dict[str, complex] = {}
    for occ, amplitude in state.terms_sorted():
        if any(occ[i] for i in range(registry.size) if i not in tracked):
            continue
        if any(occ[h] + occ[v] != 1 for h, v in indices):
            continue
        word = "".join("H" if occ[h] else "V" for h, _ in indices)
        out[word] = amplitude
    return dict(sorted(out.items()))


def circular_amplitudes(amplitudes: Mapping[str, complex]) -> Dict[str, complex]:
    """Two-photon amplitudes re-expressed in the R/L basis, R = (H + iV)/sqrt2."""
    bra = {"R": {"H": SQRT_HALF, "V": -1j * SQRT_HALF}, "L": {"H": SQRT_HALF, "V": 1j * SQRT_HALF}}
    out = {}
    for x, y in itertools.product("RL", repeat=2):
        out[x + y] = sum(
            bra[x][a] * bra[y][b] * complex(amplitudes.get(a + b, 0.0))
            for a, b in itertools.product("HV", repeat=2)
        )
    return out


# --- filtering ---
@lru_cache(maxsize=64)
def _filter_for(model: DetectorModel, extra_labels: Tuple[str, ...]) -> Circuit:
    circuit = build_filter_circuit("auto", detector_model=model)
    return circuit.embed(extra_labels) if extra_labels else circuit


def _check_one_photon_per_path(state: FockState) -> None:
    registry = state.registry
    paths = [(registry.index(h), registry.index(v)) for h, v in PATH_MODES]
    ancillas = [registry.index(label) for label in FILTER_MODES[4:]]
    for occ in state.terms:
        if any(occ[h] + occ[v] != 1 for h, v in paths) or any(occ[i] for i in ancillas):
            raise ValueError(f"filter input needs exactly one photon per input path, got term {occ}")


def filter_state(state: FockState, model: Optional[DetectorModel] = None) -> Tuple[Ensemble, float]:
    """Run the filter on a state whose registry holds the filter modes plus any spectators."""
    model = model or DetectorModel.ideal()
    labels = state.registry.labels
    if labels[:len(FILTER_MODES)] != FILTER_MODES:
        raise ValueError(f"state registry must start with the filter modes {list(FILTER_MODES)}")
    _check_one_photon_per_path(state)
    circuit = _filter_for(model, labels[len(FILTER_MODES):])
    ensemble = run_circuit(circuit, Ensemble.from_state(state))
    return ensemble, ensemble.acceptance_probability()


def filter_pair(input: FockState, model: Optional[DetectorModel] = None) -> Tuple[Ensemble, float]:
    """Filter a two-photon state given over the polarization modes (or the full filter registry)."""
    registry = ModeRegistry(FILTER_MODES)
    if input.registry.labels == POLARIZATION_MODES:
        input = input.embed(registry)
    elif input.registry != registry:
        raise ValueError(f"input must live on {list(POLARIZATION_MODES)} or {list(FILTER_MODES)}")
    return filter_state(input, model)


def _spectator_modes(count: int, first: int) -> List[Tuple[str, str]]:
    return [(f"s{first + i}H", f"s{first + i}V") for i in range(count)]


def _filter_with_spectators(amplitudes: Mapping[str, complex], filtered: Tuple[int, int],
                            spectators: Sequence[Tuple[str, str]], photon_order: Sequence[int],
                            model: Optional[DetectorModel]) -> Tuple[Ensemble, float, List[Tuple[str, str]]]:
    """Filter two photons of a multi-photon state.

    `amplitudes` is keyed by polarization words in photon order; photon
    `filtered[0]` enters path 1 and `filtered[1]` path 2. The other photons
    take the spectator modes in order. Returns the (H, V) modes of every
    photon in photon order.
    """
    labels = FILTER_MODES + tuple(label for pair in spectators for label in pair)
    registry = ModeRegistry(labels)
    spare = iter(spectators)
    photon_modes: List[Tuple[str, str]] = []
    for photon in photon_order:
        if photon == filtered[0]:
            photon_modes.append(PATH_MODES[0])
        elif photon == filtered[1]:
            photon_modes.append(PATH_MODES[1])
        else:
            photon_modes.append(next(spare))
    state = polarization_product_state(registry, photon_modes, amplitudes)
    ensemble, acceptance = filter_state(state, model)
    return ensemble, acceptance, photon_modes


def ghz4(model: Optional[DetectorModel] = None, swap_paths: bool = False) -> Tuple[Ensemble, float]:
    """Two Bell pairs (1,2) and (3,4); photons 2 and 3 are filtered."""
    ensemble, acceptance, _ = _ghz4(model, swap_paths)
    return ensemble, acceptance


def _ghz4(model, swap_paths):
    bell = ghz_amplitudes(2)
    amplitudes = {a + b: bell[a] * bell[b] for a in bell for b in bell}
    filtered = (2, 1) if swap_paths else (1, 2)
    return _filter_with_spectators(amplitudes, filtered, _spectator_modes(2, 1), range(4), model)


def encode_n(q: QubitCoeffs, n_photons: int, model: Optional[DetectorModel] = None,
             swap_paths: bool = False) -> Tuple[Ensemble, float]:
    """Filter the last photon of an (n-1)-photon GHZ state against the qubit photon."""
    ensemble, acceptance, _ = _encode_n(q, n_photons, model, swap_paths)
    return ensemble, acceptance


def _encode_n(q, n_photons, model, swap_paths):
    if n_photons < 2:
        raise ValueError(f"an encoded state needs at least two photons, got {n_photons}")
    ghz = ghz_amplitudes(n_photons - 1)
    qubit = {"H": q.cH, "V": q.cV}
    amplitudes = {word + letter: a * c for word, a in ghz.items() for letter, c in qubit.items()}
    last, qubit_photon = n_photons - 2, n_photons - 1
    filtered = (qubit_photon, last) if swap_paths else (last, qubit_photon)
    return _filter_with_spectators(amplitudes, filtered, _spectator_modes(n_photons - 2, 1),
                                   range(n_photons), model)


def encode2(q: QubitCoeffs, model: Optional[DetectorModel] = None, swap_paths: bool = False):
    return encode_n(q, 2, model, swap_paths)


def encode3(q: QubitCoeffs, model: Optional[DetectorModel] = None, swap_paths: bool = False):
    return encode_n(q, 3, model, swap_paths)


# --- error analysis ---
def _acceptance(amplitudes: Mapping[str, complex], model: DetectorModel) -> Tuple[Ensemble, float]:
    state = polarization_product_state(polarization_registry(), PATH_MODES, amplitudes)
    return filter_pair(state, model)


def error_analysis(eta: float, dark: float = 0.0, dark_rate_cps: Optional[float] = None,
                   window_s: Optional[float] = None) -> ErrorReport:
    config = get_config()
    dark_rate_cps = config.dark_rate_cps if dark_rate_cps is None else dark_rate_cps
    window_s = config.window_s if window_s is None else window_s
    if dark_rate_cps < 0 or window_s < 0:
        raise ValueError("dark count rate and detection window must be non-negative")
    lossy = DetectorModel.lossy(eta, dark)
    logger.info("error analysis: eta=%.6g dark=%.6g", eta, dark)

    hv_rates = {
        "HV": _acceptance({"HV": 1.0}, lossy)[1],
        "VH": _acceptance({"VH": 1.0}, lossy)[1],
    }
    rl = {"HH": 0.5, "HV": -0.5j, "VH": 0.5j, "VV": 0.5}
    _, ideal_success = _acceptance(rl, DetectorModel.ideal())
    _, false_transmission = _acceptance({k: rl[k] for k in ("HV", "VH")}, lossy)
    accepted, lossy_success = _acceptance(rl, lossy)

    split = accepted.split_by_photon_number()
    total = math.fsum(split.values())

    def fraction(n):
        return split.get(n, 0.0) / total if total > 0 else 0.0

    entangled = ideal_success / (ideal_success + false_transmission) if ideal_success > 0 else 0.0
    return ErrorReport(
        eta=eta,
        dark=dark,
        misread_2_as_1=povm_probability(lossy, 1, 2),
        hv_error_rate=max(hv_rates.values()),
        hv_input_error_rates=hv_rates,
        ideal_success_prob=ideal_success,
        false_transmission_prob=false_transmission,
        mixture_entangled_fraction=entangled,
        mixture_single_photon_fraction=1.0 - entangled,
        pair_output_fraction=fraction(2),
        single_output_fraction=fraction(1),
        vacuum_output_fraction=fraction(0),
        lossy_success_prob=lossy_success,
        dark_counts_per_pulse=dark_rate_cps * window_s,
    )


def sweep(eta_values: Sequence[float], dark: float = 0.0, workers: Optional[int] = None) -> List[ErrorReport]:
    """Error analysis over a grid of efficiencies, ordered by eta."""
    workers = workers or get_config().sweep_workers
    values = sorted(float(eta) for eta in eta_values)
    logger.info("sweep over %d eta values with %d workers", len(values), workers)
    if workers <= 1:
        return [error_analysis(eta, dark) for eta in values]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda eta: error_analysis(eta, dark), values))


# --- reports ---
def _pair(z: complex) -> Tuple[float, float]:
    return (float(z.real), float(z.imag))


def _pairs(amplitudes: Mapping[str, complex]) -> Dict[str, Tuple[float, float]]:
    return {key: _pair(complex(value)) for key, value in amplitudes.items()}


def _report(name: str, description: str, ensemble: Ensemble, acceptance: float,
            photon_modes: Sequence[Tuple[str, str]], target: Optional[Mapping[str, complex]] = None,
            circular: bool = False) -> ScenarioReport:
    report = ScenarioReport(
        name=name,
        description=description,
        photons=[f"{h}/{v}" for h, v in photon_modes],
        acceptance=acceptance,
        branches=len(ensemble),
        photon_number_weights={str(n): w for n, w in ensemble.split_by_photon_number().items()},
    )
    if len(ensemble) == 1:
        branch = ensemble.branches[0]
        normalized = photon_amplitudes(branch.state, photon_modes)
        report.amplitudes = _pairs(normalized)
        report.unnormalized_amplitudes = _pairs(photon_amplitudes(branch.amplitudes(), photon_modes))
        if circular:
            report.circular_amplitudes = _pairs(circular_amplitudes(normalized))
    if len(photon_modes) == 2 and acceptance > 0:
        rho = reduce_to_polarization(ensemble, tuple(photon_modes))
        if rho.trace > 0:
            rho = rho.normalized()
            report.concurrence = concurrence(rho)
            if target is not None:
                vector = vector_from_amplitudes(target)
                report.fidelity = fidelity_to_pure(rho, vector / math.sqrt(abs(vector @ vector.conj())))
    return report


def run_scenario(name: str, *, ch: complex = SQRT_HALF, cv: complex = SQRT_HALF, c1: complex = 1.0,
                 c2: complex = 0.0, phi: float = 0.0, photons: int = 3, eta: Optional[float] = None,
                 dark: float = 0.0, swap_paths: bool = False) -> ScenarioReport:
    """Build and run a named scenario; eta=None means ideal detectors."""
    if name not in SCENARIO_NAMES:
        raise ValueError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIO_NAMES)}")
    model = DetectorModel.ideal() if eta is None else DetectorModel.lossy(eta, dark)
    logger.info("scenario %s (detectors: %s)", name, model.kind.value)

    if name == "entangle":
        ensemble, acceptance = filter_pair(circular_state(), model)
        return _report(name, "|R;L> = (|H>+i|V>)(|H>-i|V>)/2", ensemble, acceptance, PATH_MODES,
                       target={"HH": 1.0, "VV": 1.0}, circular=True)
    if name == "max-entangled":
        params = MaxEntangledParams(c1=c1, c2=c2, phi=phi)
        ensemble, acceptance = filter_pair(max_entangled_state(params), model)
        target = {"HH": params.c1, "VV": -cmath.exp(-1j * phi) * params.c1}
        return _report(name, f"maximally entangled input c1={c1}, c2={c2}, phi={phi}", ensemble,
                       acceptance, PATH_MODES, target=target if abs(params.c1) > 0 else None)
    if name == "ghz4":
        ensemble, acceptance, modes = _ghz4(model, swap_paths)
        return _report(name, "two Bell pairs, photons 2 and 3 filtered", ensemble, acceptance, modes)

    q = QubitCoeffs(cH=ch, cV=cv)
    n = {"encode2": 2, "encode3": 3}.get(name, photons)
    ensemble, acceptance, modes = _encode_n(q, n, model, swap_paths)
    return _report(name, f"qubit cH={ch}, cV={cv} encoded into {n} photons", ensemble, acceptance, modes,
                   target={"HH": q.cH, "VV": q.cV} if n == 2 else None)
