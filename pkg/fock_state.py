"""
Sparse multimode Fock states

A FockState maps occupation vectors (one photon count per registry mode) to
complex amplitudes. States are immutable values; every operation returns a
new state.
"""
import cmath
import logging
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from config import get_config

logger = logging.getLogger(__name__)

Occupation = Tuple[int, ...]


class FockError(ValueError):
    """Base error for invalid Fock-space operations."""


class RegistryMismatchError(FockError):
    pass


class PhotonCapError(FockError):
    pass


class InvalidModeError(FockError):
    pass


class DuplicateModeError(FockError):
    pass


@dataclass(frozen=True)
class ModeRegistry:
    """Ordered, unique mode labels; the index of a label never changes."""
    labels: Tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise FockError("a mode registry needs at least one mode")
        seen = set()
        for label in labels:
            if not isinstance(label, str) or not label:
                raise FockError(f"mode labels must be non-empty strings, got {label!r}")
            if label in seen:
                raise DuplicateModeError(f"duplicate mode label {label!r}")
            seen.add(label)

    @property
    def size(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: object) -> bool:
        return label in self.labels

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidModeError(f"unknown mode {label!r}; registry has {list(self.labels)}") from None

    def check_index(self, mode: int) -> int:
        if not isinstance(mode, int) or isinstance(mode, bool) or not 0 <= mode < self.size:
            raise InvalidModeError(f"mode index {mode!r} out of range [0, {self.size - 1}]")
        return mode

    def resolve(self, mode) -> int:
        """Accept either a label or an index."""
        if isinstance(mode, str):
            return self.index(mode)
        return self.check_index(mode)

    def extended(self, labels: Iterable[str]) -> "ModeRegistry":
        return ModeRegistry(self.labels + tuple(labels))


class FockState:
    """Sparse map from occupation vectors to amplitudes over a fixed registry."""

    __slots__ = ("registry", "photon_cap", "_terms")

    def __init__(
        self,
        registry: ModeRegistry,
        terms: Optional[Mapping[Sequence[int], complex]] = None,
        *,
        photon_cap: Optional[int] = None,
        prune_tolerance: Optional[float] = None,
    ):
        config = get_config()
        self.registry = registry
        self.photon_cap = config.photon_cap if photon_cap is None else photon_cap
        tolerance = config.prune_tolerance if prune_tolerance is None else prune_tolerance

        cleaned: Dict[Occupation, complex] = {}
        for occ, amplitude in (terms or {}).items():
            key = self._check_occupation(occ)
            amplitude = complex(amplitude)
            if not cmath.isfinite(amplitude):
                raise FockError(f"non-finite amplitude {amplitude} on {key}")
            if abs(amplitude) > tolerance:
                cleaned[key] = amplitude
        self._terms = cleaned

    def _check_occupation(self, occ: Sequence[int]) -> Occupation:
        key = tuple(int(n) for n in occ)
        if len(key) != self.registry.size:
            raise RegistryMismatchError(
                f"occupation {key} has {len(key)} entries, registry has {self.registry.size} modes"
            )
        for label, n in zip(self.registry.labels, key):
            if n < 0:
                raise FockError(f"negative photon count {n} in mode {label!r}")
            if n > self.photon_cap:
                raise PhotonCapError(
                    f"{n} photons in mode {label!r} exceeds the per-mode cap of {self.photon_cap}"
                )
        return key

    # --- construction helpers ---
    @classmethod
    def zero(cls, registry: ModeRegistry, photon_cap: Optional[int] = None) -> "FockState":
        return cls(registry, {}, photon_cap=photon_cap)

    @classmethod
    def from_amplitudes(
        cls,
        registry: ModeRegistry,
        amplitudes: Mapping[Sequence[int], complex],
        photon_cap: Optional[int] = None,
    ) -> "FockState":
        """Build a state, summing amplitudes of repeated occupations."""
        summed: Dict[Occupation, complex] = {}
        for occ, amplitude in amplitudes.items():
            key = tuple(occ)
            summed[key] = summed.get(key, 0j) + complex(amplitude)
        return cls(registry, summed, photon_cap=photon_cap)

    @classmethod
    def from_labels(
        cls,
        registry: ModeRegistry,
        terms: Iterable[Tuple[Mapping[str, int], complex]],
        photon_cap: Optional[int] = None,
    ) -> "FockState":
        """Build a state from (label -> count, amplitude) pairs; unnamed modes are vacuum."""
        amplitudes: Dict[Occupation, complex] = {}
        for counts, amplitude in terms:
            occ = [0] * registry.size
            for label, n in counts.items():
                occ[registry.index(label)] = n
            key = tuple(occ)
            amplitudes[key] = amplitudes.get(key, 0j) + complex(amplitude)
        return cls(registry, amplitudes, photon_cap=photon_cap)

    def derive(self, terms: Mapping[Occupation, complex]) -> "FockState":
        """New state over the same registry and cap."""
        return FockState(self.registry, terms, photon_cap=self.photon_cap)

    # --- accessors ---
    @property
    def terms(self) -> Mapping[Occupation, complex]:
        return MappingProxyType(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    def amplitude(self, occ: Sequence[int]) -> complex:
        return self._terms.get(tuple(occ), 0j)

    def terms_sorted(self) -> List[Tuple[Occupation, complex]]:
        return sorted(self._terms.items())

    def norm_squared(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self._terms.values())

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def normalized(self) -> "FockState":
        norm = self.norm()
        if norm == 0.0:
            raise FockError("cannot normalize the zero state")
        return self.derive({occ: a / norm for occ, a in self._terms.items()})

    def embed(self, registry: ModeRegistry) -> "FockState":
        """Same state over a larger registry; the extra modes are vacuum."""
        positions = [registry.index(label) for label in self.registry.labels]
        embedded: Dict[Occupation, complex] = {}
        for occ, amplitude in self._terms.items():
            target = [0] * registry.size
            for position, n in zip(positions, occ):
                target[position] = n
            embedded[tuple(target)] = amplitude
        return FockState(registry, embedded, photon_cap=self.photon_cap)

    def without_modes(self, labels: Iterable[str]) -> "FockState":
        """Drop modes that are vacuum in every term."""
        dropped = {self.registry.index(label) for label in labels}
        keep = [i for i in range(self.registry.size) if i not in dropped]
        if not keep:
            raise FockError("cannot drop every mode of a registry")
        registry = ModeRegistry(tuple(self.registry.labels[i] for i in keep))
        reduced: Dict[Occupation, complex] = {}
        for occ, amplitude in self._terms.items():
            if any(occ[i] for i in dropped):
                raise FockError(f"cannot drop occupied modes from term {occ}")
            reduced[tuple(occ[i] for i in keep)] = amplitude
        return FockState(registry, reduced, photon_cap=self.photon_cap)

    def __repr__(self) -> str:
        if not self._terms:
            return f"FockState({list(self.registry.labels)}, 0)"
        body = " + ".join(f"({a:.6g})|{','.join(map(str, occ))}>" for occ, a in self.terms_sorted())
        return f"FockState({list(self.registry.labels)}, {body})"


def _require_same_registry(a: FockState, b: FockState) -> None:
    if a.registry != b.registry:
        raise RegistryMismatchError(
            f"registries differ: {list(a.registry.labels)} vs {list(b.registry.labels)}"
        )


def make_basis_state(registry: ModeRegistry, occ: Sequence[int], photon_cap: Optional[int] = None) -> FockState:
    return FockState(registry, {tuple(occ): 1.0}, photon_cap=photon_cap)


def vacuum(registry: ModeRegistry, photon_cap: Optional[int] = None) -> FockState:
    return make_basis_state(registry, (0,) * registry.size, photon_cap)


def inner_product(a: FockState, b: FockState) -> complex:
    """<a|b>, conjugate-linear in a."""
    _require_same_registry(a, b)
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    total = 0j
    for occ, amplitude in small.terms.items():
        other = large.terms.get(occ)
        if other is None:
            continue
        if small is a:
            total += amplitude.conjugate() * other
        else:
            total += other.conjugate() * amplitude
    return total


def scale(state: FockState, c: complex) -> FockState:
    c = complex(c)
    return state.derive({occ: c * a for occ, a in state.terms.items()})


def add(a: FockState, b: FockState) -> FockState:
    _require_same_registry(a, b)
    summed = dict(a.terms)
    for occ, amplitude in b.terms.items():
        summed[occ] = summed.get(occ, 0j) + amplitude
    return FockState(a.registry, summed, photon_cap=max(a.photon_cap, b.photon_cap))


def tensor(a: FockState, b: FockState) -> FockState:
    try:
        registry = a.registry.extended(b.registry.labels)
    except DuplicateModeError as e:
        raise RegistryMismatchError(f"cannot tensor states sharing a mode: {e}") from e
    product = {
        occ_a + occ_b: amp_a * amp_b
        for occ_a, amp_a in a.terms.items()
        for occ_b, amp_b in b.terms.items()
    }
    return FockState(registry, product, photon_cap=max(a.photon_cap, b.photon_cap))


def total_photon_number(state: FockState) -> Set[int]:
    return {sum(occ) for occ in state.terms}


def distance(a: FockState, b: FockState) -> float:
    """Norm of a - b, without pruning the difference."""
    _require_same_registry(a, b)
    keys = set(a.terms) | set(b.terms)
    return math.sqrt(math.fsum(abs(a.amplitude(k) - b.amplitude(k)) ** 2 for k in keys))
