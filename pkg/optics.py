"""
Linear-optical elements acting on Fock states

Beam splitter convention: a† -> sqrt(1-R) a† + i sqrt(R) b†,
b† -> i sqrt(R) a† + sqrt(1-R) b† (phase i on reflection).
"""
import cmath
import logging
import math
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from detection import ideal_postselect
from fock_state import (
    FockError,
    FockState,
    InvalidModeError,
    ModeRegistry,
    Occupation,
    make_basis_state,
)

logger = logging.getLogger(__name__)

SQRT_HALF = 1.0 / math.sqrt(2.0)
ATTENUATOR_ANCILLA = "_attenuator_ancilla"


class AncillaNotVacuumError(FockError):
    pass


class BeamSplitterSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode_a: int = Field(..., ge=0, description="Registry index of the first port")
    mode_b: int = Field(..., ge=0, description="Registry index of the second port")
    reflectivity: float = Field(0.5, ge=0.0, le=1.0, description="Power reflectivity R")

    @model_validator(mode="after")
    def _distinct_ports(self):
        if self.mode_a == self.mode_b:
            raise ValueError("a beam splitter needs two distinct modes")
        return self


class PhaseSpec(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    mode: int = Field(..., ge=0, description="Registry index")
    phi: float = Field(..., description="Phase in radians")


@lru_cache(maxsize=4096)
def _splitter_table(n_a: int, n_b: int, t: float, reflection: complex) -> Tuple[Tuple[int, int, complex], ...]:
    """Output (m_a, m_b, coefficient) for |n_a, n_b> under the mode transformation."""
    coefficients: Dict[Tuple[int, int], complex] = {}
    for k in range(n_a + 1):
        # (t a† + r b†)^n_a
        left = math.comb(n_a, k) * t ** k * reflection ** (n_a - k)
        for l in range(n_b + 1):
            # (r a† + t b†)^n_b
            right = math.comb(n_b, l) * reflection ** l * t ** (n_b - l)
            m_a = k + l
            m_b = n_a + n_b - m_a
            key = (m_a, m_b)
            coefficients[key] = coefficients.get(key, 0j) + left * right
    norm = math.sqrt(math.factorial(n_a) * math.factorial(n_b))
    return tuple(
        (m_a, m_b, c * math.sqrt(math.factorial(m_a) * math.factorial(m_b)) / norm)
        for (m_a, m_b), c in sorted(coefficients.items())
        if c != 0
    )


def _apply_splitter(state: FockState, spec: BeamSplitterSpec, reflection_sign: int) -> FockState:
    a = state.registry.check_index(spec.mode_a)
    b = state.registry.check_index(spec.mode_b)
    t = math.sqrt(1.0 - spec.reflectivity)
    reflection = reflection_sign * 1j * math.sqrt(spec.reflectivity)

    out: Dict[Occupation, complex] = {}
    for occ, amplitude in state.terms.items():
        for m_a, m_b, c in _splitter_table(occ[a], occ[b], t, reflection):
            target = list(occ)
            target[a] = m_a
            target[b] = m_b
            key = tuple(target)
            out[key] = out.get(key, 0j) + amplitude * c
    return state.derive(out)


def apply_beam_splitter(state: FockState, spec: BeamSplitterSpec) -> FockState:
    return _apply_splitter(state, spec, +1)


def apply_beam_splitter_inverse(state: FockState, spec: BeamSplitterSpec) -> FockState:
    """Conjugate-transpose transformation: reflection phase -i."""
    return _apply_splitter(state, spec, -1)


def apply_phase(state: FockState, spec: PhaseSpec) -> FockState:
    mode = state.registry.check_index(spec.mode)
    return state.derive({
        occ: amplitude * cmath.exp(1j * spec.phi * occ[mode])
        for occ, amplitude in state.terms.items()
    })


def permute_modes(state: FockState, permutation: Sequence[int]) -> FockState:
    """Move the photons of mode i to mode permutation[i]."""
    permutation = list(permutation)
    if sorted(permutation) != list(range(state.registry.size)):
        raise InvalidModeError(
            f"{permutation} is not a bijection on {state.registry.size} modes"
        )
    out: Dict[Occupation, complex] = {}
    for occ, amplitude in state.terms.items():
        target = [0] * len(occ)
        for source, destination in enumerate(permutation):
            target[destination] = occ[source]
        out[tuple(target)] = amplitude
    return state.derive(out)


def swap_permutation(size: int, pairs: Sequence[Tuple[int, int]]) -> List[int]:
    permutation = list(range(size))
    for i, j in pairs:
        permutation[i], permutation[j] = permutation[j], permutation[i]
    return permutation


def inject_photons(state: FockState, mode, photons: int) -> FockState:
    """Feed a Fock source of `photons` photons into a mode that is vacuum in every term."""
    index = state.registry.resolve(mode)
    if photons < 0:
        raise FockError(f"cannot inject {photons} photons")
    for occ in state.terms:
        if occ[index] != 0:
            raise AncillaNotVacuumError(
                f"mode {state.registry.labels[index]!r} is occupied in term {occ}"
            )
    return state.derive({
        occ[:index] + (photons,) + occ[index + 1:]: amplitude
        for occ, amplitude in state.terms.items()
    })


def s11_closed_form(n: int) -> complex:
    """(i/sqrt2)^(n+1) (n - 1): vanishes for exactly one photon.

    Magnitudes match s11_matrix_element(n, n); the phase of the beam-splitter
    convention differs by an n-dependent factor.
    """
    if n < 0:
        raise ValueError(f"photon number must be non-negative, got {n}")
    return (1j * SQRT_HALF) ** (n + 1) * (n - 1)


def apply_s11(state: FockState, signal_mode, ancilla_mode) -> FockState:
    """One ancilla photon in, R=1/2 splitter, one photon detected in the ancilla port."""
    signal = state.registry.resolve(signal_mode)
    ancilla = state.registry.resolve(ancilla_mode)
    fed = inject_photons(state, ancilla, 1)
    mixed = apply_beam_splitter(fed, BeamSplitterSpec(mode_a=signal, mode_b=ancilla, reflectivity=0.5))
    return ideal_postselect(mixed, ancilla, 1)


def s11_matrix_element(m: int, n: int) -> complex:
    """<m;1| U_1/2 |n;1> computed with the beam splitter itself."""
    registry = ModeRegistry(("signal", "ancilla"))
    cap = max(m, n) + 2
    state = make_basis_state(registry, (n, 1), photon_cap=cap)
    out = apply_beam_splitter(state, BeamSplitterSpec(mode_a=0, mode_b=1, reflectivity=0.5))
    return out.amplitude((m, 1))


def _check_reflectivity(reflectivity: float) -> None:
    if not 0.0 <= reflectivity <= 1.0:
        raise ValueError(f"reflectivity must lie in [0, 1], got {reflectivity}")


def apply_vacuum_attenuator(state: FockState, mode, reflectivity: float) -> FockState:
    """Closed form of a splitter with vacuum ancilla and zero reflected photons: t^n."""
    _check_reflectivity(reflectivity)
    index = state.registry.resolve(mode)
    t = math.sqrt(1.0 - reflectivity)
    return state.derive({
        occ: amplitude * t ** occ[index] for occ, amplitude in state.terms.items()
    })


def apply_vacuum_attenuator_by_ancilla(state: FockState, mode, reflectivity: float) -> FockState:
    """Same operation built from a splitter, a fresh vacuum mode and a zero-photon projection."""
    _check_reflectivity(reflectivity)
    index = state.registry.resolve(mode)
    registry = state.registry.extended((ATTENUATOR_ANCILLA,))
    widened = state.embed(registry)
    ancilla = registry.index(ATTENUATOR_ANCILLA)
    mixed = apply_beam_splitter(
        widened, BeamSplitterSpec(mode_a=index, mode_b=ancilla, reflectivity=reflectivity)
    )
    return ideal_postselect(mixed, ancilla, 0).without_modes((ATTENUATOR_ANCILLA,))
