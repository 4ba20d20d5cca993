"""
Normal modes by simultaneous diagonalization of the capacitance and
inductive-energy matrices.

The capacitance (mass) matrix is whitened first, C~ = v_C / sqrt(lambda_C); the
whitened inductive matrix C~^T E_L C~ describes unit-mass oscillators whose
eigenvectors Xi give the node-flux map C~ Xi.
"""

import logging
import string
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import linear_sum_assignment

from multimon.circuit.matrices import LinearizedMatrices
from multimon.config.settings import solver_settings
from multimon.errors import DomainError, InstabilityError

logger = logging.getLogger(__name__)

TRIMON_SHAPES = {
    "A": np.array([1.0, 0.0, -1.0, 0.0]),
    "B": np.array([0.0, 1.0, 0.0, -1.0]),
    "C": np.array([1.0, -1.0, 1.0, -1.0]),
}


@dataclass(frozen=True, eq=False)
class ModeSolution:
    """
    Finite-frequency normal modes, sorted by ascending frequency.

    ``mode_matrix`` maps mode fluxes to node fluxes (columns are M-orthonormal,
    reduced flux units). ``zero_point_fluxes`` are sqrt(1/2 omega) with omega in
    angular GHz.
    """

    frequencies: np.ndarray
    mode_matrix: np.ndarray
    zero_mode_vectors: np.ndarray
    zero_point_fluxes: np.ndarray
    labels: Tuple[str, ...]
    mass: np.ndarray
    stiffness: np.ndarray
    degenerate_groups: Tuple[Tuple[int, ...], ...] = ()
    warnings: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def count(self) -> int:
        return len(self.frequencies)

    @property
    def omegas(self) -> np.ndarray:
        """Angular frequencies in rad/ns."""
        return 2.0 * np.pi * self.frequencies

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def qubit_order(self) -> List[int]:
        """Mode indices sorted by label."""
        return sorted(range(self.count), key=lambda k: self.labels[k])

    def shape(self, k: int) -> np.ndarray:
        """Unit-norm node-space shape of mode k."""
        column = self.mode_matrix[:, k]
        return column / np.linalg.norm(column)


def symmetric_ring_modes(n: int) -> List[np.ndarray]:
    """
    Standing-wave mode vectors of an n-fold symmetric ring.

    Mode mu = 1..n-1 has wave number ceil(mu/2); odd mu takes the cosine, even
    mu the sine, sampled at ring positions j = 0..n-1. Vectors are unit norm.
    """
    if n < 3:
        raise DomainError(f"A ring needs at least 3 nodes, got {n}")
    positions = np.arange(n)
    vectors = []
    for mu in range(1, n):
        wave = 2.0 * np.pi * positions * int(np.ceil(mu / 2)) / n
        vector = np.cos(wave) if mu % 2 else np.sin(wave)
        vectors.append(vector / np.linalg.norm(vector))
    return vectors


def _ring_references(ring_order: Sequence[int]) -> List[np.ndarray]:
    n = len(ring_order)
    references = []
    for vector in symmetric_ring_modes(n):
        node_vector = np.zeros(n)
        node_vector[list(ring_order)] = vector
        references.append(node_vector)
    return references


def _orient_block(block: np.ndarray, mass: np.ndarray, references: List[np.ndarray]) -> np.ndarray:
    """Rotate an M-orthonormal degenerate block onto Gram-Schmidt projections of references."""
    size = block.shape[1]
    basis: List[np.ndarray] = []
    candidates = [block.T @ mass @ ref for ref in references] + list(np.eye(size))
    for vector in candidates:
        norm0 = np.linalg.norm(vector)
        if norm0 == 0.0:
            continue
        for b in basis:
            vector = vector - (b @ vector) * b
        if np.linalg.norm(vector) > 1e-6 * norm0:
            basis.append(vector / np.linalg.norm(vector))
        if len(basis) == size:
            break
    return block @ np.column_stack(basis)


def _fix_signs(matrix: np.ndarray) -> np.ndarray:
    matrix = matrix.copy()
    for k in range(matrix.shape[1]):
        column = matrix[:, k]
        significant = np.flatnonzero(np.abs(column) > 1e-9 * np.max(np.abs(column)))
        if significant.size and column[significant[0]] < 0:
            matrix[:, k] = -column
    return matrix


def _assign_labels(mode_matrix: np.ndarray, ring_order: Optional[Sequence[int]]) -> Tuple[str, ...]:
    count = mode_matrix.shape[1]
    if ring_order is not None and len(ring_order) == 4 and count == 3:
        ideal = np.zeros((4, 3))
        for column, shape in enumerate(TRIMON_SHAPES.values()):
            ideal[list(ring_order), column] = shape / np.linalg.norm(shape)
        shapes = mode_matrix / np.linalg.norm(mode_matrix, axis=0)
        overlap = np.abs(shapes.T @ ideal)
        rows, cols = linear_sum_assignment(-overlap)
        names = list(TRIMON_SHAPES)
        labels = [""] * count
        for row, col in zip(rows, cols):
            labels[row] = names[col]
        return tuple(labels)
    return tuple(string.ascii_uppercase[k] for k in range(count))


def normal_modes(matrices: LinearizedMatrices) -> ModeSolution:
    """
    Solve the linearized circuit.

    Raises:
        InstabilityError: the whitened inductive matrix has a negative eigenvalue
    """
    stiffness = matrices.stiffness()
    mass = matrices.mass()

    lam_c, v_c = eigh(mass)
    whitening = v_c / np.sqrt(lam_c)
    reduced = whitening.T @ stiffness @ whitening
    reduced = 0.5 * (reduced + reduced.T)
    omega_sq, xi = eigh(reduced)

    scale = float(np.max(np.abs(omega_sq)))
    tolerance = solver_settings.zero_mode_tolerance * scale
    if np.any(omega_sq < -tolerance):
        raise InstabilityError(
            f"Linearization is unstable: eigenvalue {omega_sq.min():.3e} below zero"
        )

    transform = whitening @ xi
    is_zero = omega_sq < tolerance
    zero_vectors = transform[:, is_zero]
    if zero_vectors.size:
        zero_vectors = _fix_signs(zero_vectors / np.linalg.norm(zero_vectors, axis=0))

    omega_sq = omega_sq[~is_zero]
    mode_matrix = transform[:, ~is_zero]

    references = (
        _ring_references(matrices.ring_order)
        if matrices.ring_order is not None
        else list(np.eye(matrices.size))
    )
    groups = []
    start = 0
    gap = solver_settings.degeneracy_tolerance * scale
    for k in range(1, len(omega_sq) + 1):
        if k == len(omega_sq) or omega_sq[k] - omega_sq[k - 1] > gap:
            if k - start > 1:
                groups.append(tuple(range(start, k)))
                mode_matrix[:, start:k] = _orient_block(mode_matrix[:, start:k], mass, references)
            start = k
    mode_matrix = _fix_signs(mode_matrix)

    omegas = np.sqrt(omega_sq)
    labels = _assign_labels(mode_matrix, matrices.ring_order)
    warnings = []
    for group in groups:
        message = (
            f"Degenerate modes {', '.join(labels[k] for k in group)} at "
            f"{omegas[group[0]] / (2 * np.pi):.4f} GHz"
        )
        logger.warning(message)
        warnings.append(message)

    logger.info(
        f"Normal modes: {', '.join(f'{l}={w / (2 * np.pi):.4f}' for l, w in zip(labels, omegas))} GHz, "
        f"{zero_vectors.shape[1]} zero mode(s)"
    )
    return ModeSolution(
        frequencies=omegas / (2.0 * np.pi),
        mode_matrix=mode_matrix,
        zero_mode_vectors=zero_vectors,
        zero_point_fluxes=np.sqrt(1.0 / (2.0 * omegas)),
        labels=labels,
        mass=mass,
        stiffness=stiffness,
        degenerate_groups=tuple(groups),
        warnings=tuple(warnings),
    )
