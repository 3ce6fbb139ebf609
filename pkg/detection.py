"""
Detector models and post-selection

Conditioned mixed states are kept as ensembles of normalized pure branches;
the total branch weight is the probability that every conditioning so far
succeeded.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Iterable, List, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config import get_config
from fock_state import FockError, FockState, ModeRegistry, Occupation

logger = logging.getLogger(__name__)

WEIGHT_SLACK = 1e-9


class DetectorKind(str, Enum):
    IDEAL = "ideal"
    LOSSY = "lossy"


class DetectorModel(BaseModel):
    """Number-resolving detector: binomial photon loss plus at most one dark count."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: DetectorKind = Field(DetectorKind.IDEAL, description="ideal or lossy")
    eta: float = Field(1.0, ge=0.0, le=1.0, description="Per-photon detection efficiency")
    dark: float = Field(0.0, ge=0.0, le=1.0, description="Probability of one dark count per window")

    @field_validator("kind", mode="before")
    @classmethod
    def _lowercase_kind(cls, value):
        return value.lower() if isinstance(value, str) else value

    @model_validator(mode="after")
    def _ideal_is_perfect(self):
        if self.kind is DetectorKind.IDEAL and (self.eta != 1.0 or self.dark != 0.0):
            raise ValueError("an ideal detector has eta=1 and dark=0")
        return self

    @classmethod
    def ideal(cls) -> "DetectorModel":
        return cls()

    @classmethod
    def lossy(cls, eta: float, dark: float = 0.0) -> "DetectorModel":
        return cls(kind=DetectorKind.LOSSY, eta=eta, dark=dark)

    @property
    def is_ideal(self) -> bool:
        return self.kind is DetectorKind.IDEAL


def _binomial(k: int, n: int, eta: float) -> float:
    if k < 0 or k > n:
        return 0.0
    return math.comb(n, k) * eta ** k * (1.0 - eta) ** (n - k)


def povm_probability(model: DetectorModel, reported: int, incident: int) -> float:
    """Probability that the detector reports `reported` photons given `incident`."""
    if reported < 0 or incident < 0:
        raise ValueError(f"photon counts must be non-negative, got reported={reported}, incident={incident}")
    if model.is_ideal:
        return 1.0 if reported == incident else 0.0
    return (1.0 - model.dark) * _binomial(reported, incident, model.eta) + \
        model.dark * _binomial(reported - 1, incident, model.eta)


def ideal_postselect(state: FockState, mode, count: int) -> FockState:
    """Keep terms with exactly `count` photons in `mode`; the detector absorbs them."""
    index = state.registry.resolve(mode)
    kept: Dict[Occupation, complex] = {}
    for occ, amplitude in state.terms.items():
        if occ[index] == count:
            kept[occ[:index] + (0,) + occ[index + 1:]] = amplitude
    return state.derive(kept)


@dataclass(frozen=True)
class Branch:
    weight: float
    state: FockState

    def amplitudes(self) -> FockState:
        """Unnormalized branch: sqrt(weight) times the stored state."""
        root = math.sqrt(self.weight)
        return self.state.derive({occ: root * a for occ, a in self.state.terms.items()})


class Ensemble:
    """Weighted list of normalized pure branches over one registry."""

    __slots__ = ("registry", "branches")

    def __init__(self, registry: ModeRegistry, branches: Iterable[Branch] = ()):
        self.registry = registry
        kept: List[Branch] = []
        floor = get_config().prune_tolerance ** 2
        for branch in branches:
            if branch.state.registry != registry:
                raise FockError("every branch must share the ensemble registry")
            if branch.weight < 0.0:
                raise FockError(f"negative branch weight {branch.weight}")
            if branch.weight <= floor:
                continue
            if abs(branch.state.norm_squared() - 1.0) > WEIGHT_SLACK:
                raise FockError("ensemble branches must be normalized")
            kept.append(branch)
        self.branches: Tuple[Branch, ...] = tuple(kept)
        total = self.acceptance_probability()
        if total > 1.0 + WEIGHT_SLACK:
            raise FockError(f"branch weights sum to {total}, above 1")

    @classmethod
    def from_state(cls, state: FockState) -> "Ensemble":
        weight = state.norm_squared()
        if state.is_zero():
            return cls(state.registry)
        return cls(state.registry, [Branch(weight, state.normalized())])

    @classmethod
    def from_unnormalized(cls, registry: ModeRegistry, states: Iterable[Tuple[float, FockState]]) -> "Ensemble":
        """Branches from (probability factor, unnormalized state) pairs."""
        branches = []
        for factor, state in states:
            if state.is_zero() or factor == 0.0:
                continue
            branches.append(Branch(factor * state.norm_squared(), state.normalized()))
        return cls(registry, branches)

    def acceptance_probability(self) -> float:
        return math.fsum(b.weight for b in self.branches)

    def __len__(self) -> int:
        return len(self.branches)

    def __iter__(self):
        return iter(self.branches)

    def is_empty(self) -> bool:
        return not self.branches

    def apply(self, transform: Callable[[FockState], FockState]) -> "Ensemble":
        """Map a pure-state transformation over every branch, keeping any norm loss as weight."""
        return Ensemble.from_unnormalized(
            self.registry, ((b.weight, transform(b.state)) for b in self.branches)
        )

    def split_by_photon_number(self) -> Dict[int, float]:
        """Weight carried by each total photon number across all branches."""
        weights: Dict[int, float] = {}
        for branch in self.branches:
            for occ, amplitude in branch.state.terms.items():
                n = sum(occ)
                weights[n] = weights.get(n, 0.0) + branch.weight * abs(amplitude) ** 2
        return dict(sorted(weights.items()))

    def __repr__(self) -> str:
        return f"Ensemble({len(self.branches)} branches, acceptance={self.acceptance_probability():.6g})"


def lossy_postselect(ensemble: Ensemble, mode, reported: int, model: DetectorModel) -> Ensemble:
    """Condition every branch on the detector in `mode` reporting `reported` photons."""
    index = ensemble.registry.resolve(mode)
    branches: List[Branch] = []
    floor = get_config().prune_tolerance ** 2
    for branch in ensemble.branches:
        incident_counts = sorted({occ[index] for occ in branch.state.terms})
        for incident in incident_counts:
            probability = povm_probability(model, reported, incident)
            if probability == 0.0:
                continue
            projected = ideal_postselect(branch.state, index, incident)
            weight = branch.weight * projected.norm_squared() * probability
            if weight <= floor:
                continue
            logger.debug("detector %s: incident=%d reported=%d weight=%.3g",
                         ensemble.registry.labels[index], incident, reported, weight)
            branches.append(Branch(weight, projected.normalized()))
    return Ensemble(ensemble.registry, branches)


def acceptance_probability(ensemble: Ensemble) -> float:
    return ensemble.acceptance_probability()
