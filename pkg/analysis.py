"""
Entanglement and fidelity metrics on two-photon polarization outputs
"""
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from detection import Ensemble

logger = logging.getLogger(__name__)

BASIS = ("HH", "HV", "VH", "VV")
DEFAULT_PATHS = (("p1H", "p1V"), ("p2H", "p2V"))
HERMITIAN_TOLERANCE = 1e-12
EIGENVALUE_FLOOR = -1e-10
RANK_TOLERANCE = 1e-13
TRACE_SLACK = 1e-9

SIGMA_Y = np.array([[0, -1j], [1j, 0]])
SPIN_FLIP = np.kron(SIGMA_Y, SIGMA_Y)


@dataclass(frozen=True)
class TwoQubitDensity:
    """Possibly sub-normalized density matrix over (HH, HV, VH, VV).

    `leakage` is the weight of branches outside the one-photon-per-path
    subspace, kept apart from the matrix.
    """
    entries: np.ndarray
    leakage: float = 0.0

    def __post_init__(self):
        rho = np.asarray(self.entries, dtype=complex)
        if rho.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got shape {rho.shape}")
        scale = max(1.0, float(np.max(np.abs(rho))))
        if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOLERANCE * scale:
            raise ValueError("density matrix is not Hermitian")
        smallest = float(np.min(linalg.eigvalsh(rho)))
        if smallest < EIGENVALUE_FLOOR:
            raise ValueError(f"density matrix has negative eigenvalue {smallest:.3g}")
        trace = float(np.real(np.trace(rho)))
        if not -TRACE_SLACK <= trace <= 1.0 + TRACE_SLACK:
            raise ValueError(f"trace {trace:.6g} outside [0, 1]")
        object.__setattr__(self, "entries", rho)

    @classmethod
    def from_pure(cls, vector: Sequence[complex]) -> "TwoQubitDensity":
        v = np.asarray(vector, dtype=complex)
        return cls(np.outer(v, v.conj()))

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))

    def normalized(self) -> "TwoQubitDensity":
        trace = self.trace
        if trace <= TRACE_SLACK:
            raise ValueError("cannot normalize a density matrix with zero trace")
        return TwoQubitDensity(self.entries / trace)

    def is_normalized(self) -> bool:
        return abs(self.trace - 1.0) <= TRACE_SLACK


def _polarization_index(occ, registry, paths) -> Optional[int]:
    """Basis index of an occupation with one photon per path and nothing elsewhere."""
    (h1, v1), (h2, v2) = [(registry.index(h), registry.index(v)) for h, v in paths]
    if occ[h1] + occ[v1] != 1 or occ[h2] + occ[v2] != 1:
        return None
    if sum(occ) != 2:
        return None
    first = "H" if occ[h1] else "V"
    second = "H" if occ[h2] else "V"
    return BASIS.index(first + second)


def reduce_to_polarization(
    ensemble: Ensemble,
    path_pair: Tuple[Tuple[str, str], Tuple[str, str]] = DEFAULT_PATHS,
) -> TwoQubitDensity:
    """Sum of weight * |v><v| over branches, v the branch's one-photon-per-path part."""
    registry = ensemble.registry
    labels = [label for path in path_pair for label in path]
    if len(path_pair) != 2 or any(len(path) != 2 for path in path_pair) or len(set(labels)) != 4:
        raise ValueError(f"path pair must name two (H, V) mode pairs, got {path_pair!r}")
    for label in labels:
        registry.index(label)

    rho = np.zeros((4, 4), dtype=complex)
    leakage = 0.0
    for branch in ensemble:
        v = np.zeros(4, dtype=complex)
        for occ, amplitude in branch.state.terms.items():
            index = _polarization_index(occ, registry, path_pair)
            if index is not None:
                v[index] = amplitude
        inside = float(np.vdot(v, v).real)
        rho += branch.weight * np.outer(v, v.conj())
        leakage += branch.weight * max(0.0, 1.0 - inside)
    # Exact Hermitian symmetrization removes rounding asymmetry.
    rho = (rho + rho.conj().T) / 2
    return TwoQubitDensity(rho, leakage=leakage)


def concurrence(rho: TwoQubitDensity) -> float:
    """Two-qubit concurrence from the singular values of the spin-flip overlap matrix.

    With rho = sum_i |w_i><w_i| (w_i = sqrt(p_i) psi_i) the singular values of
    tau_ij = w_i^T (sy x sy) w_j are the decreasing square roots entering
    max(0, l1 - l2 - l3 - l4).
    """
    if not rho.is_normalized():
        raise ValueError(f"concurrence needs a normalized density matrix, trace is {rho.trace:.6g}")
    eigenvalues, eigenvectors = linalg.eigh(rho.entries)
    # eigenvalues under the rank tolerance are solver noise
    eigenvalues = np.where(eigenvalues > RANK_TOLERANCE * max(rho.trace, 1.0), eigenvalues, 0.0)
    weights = np.sqrt(eigenvalues)
    w = eigenvectors * weights
    tau = w.T @ SPIN_FLIP @ w
    lam = np.sort(linalg.svdvals(tau))[::-1]
    value = lam[0] - lam[1] - lam[2] - lam[3]
    return float(min(1.0, max(0.0, value)))


def fidelity_to_pure(rho: TwoQubitDensity, target: Sequence[complex]) -> float:
    t = np.asarray(target, dtype=complex)
    if t.shape != (4,):
        raise ValueError("target must be a 4-vector over (HH, HV, VH, VV)")
    if abs(np.vdot(t, t).real - 1.0) > TRACE_SLACK:
        raise ValueError("target vector must have unit norm")
    if not rho.is_normalized():
        raise ValueError(f"fidelity needs a normalized density matrix, trace is {rho.trace:.6g}")
    value = float(np.real(np.vdot(t, rho.entries @ t)))
    return min(1.0, max(0.0, value))


def vector_from_amplitudes(amplitudes: Dict[str, complex]) -> np.ndarray:
    """4-vector from a {'HH': a, ...} map; missing entries are zero."""
    return np.array([complex(amplitudes.get(key, 0.0)) for key in BASIS])
