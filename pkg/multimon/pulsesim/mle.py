"""Maximum-likelihood state reconstruction from projective measurements."""

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from multimon.config.settings import solver_settings
from multimon.errors import DomainError, RankDeficiencyError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ProjectionSet:
    """
    Projectors with their measured probabilities. ``settings_count`` is the
    number of complete measurement settings: the projectors sum to
    ``settings_count`` times the identity.
    """

    operators: np.ndarray
    values: np.ndarray
    settings_count: int
    keys: Tuple[str, ...] = field(default=())

    @property
    def dim(self) -> int:
        return self.operators.shape[1]

    def with_values(self, values) -> "ProjectionSet":
        return ProjectionSet(self.operators, np.asarray(values, dtype=float), self.settings_count, self.keys)


def informational_rank(operators: np.ndarray) -> int:
    """Rank of the projectors as real vectors in the Hermitian-operator space."""
    flat = operators.reshape(len(operators), -1)
    stacked = np.hstack([flat.real, flat.imag])
    return int(np.linalg.matrix_rank(stacked, tol=1e-9))


def project_to_state(matrix: np.ndarray) -> np.ndarray:
    """Nearest positive semidefinite unit-trace matrix by eigenvalue clipping."""
    matrix = 0.5 * (matrix + matrix.conj().T)
    values, vectors = np.linalg.eigh(matrix)
    values = np.clip(values, 0.0, None)
    if values.sum() <= 0:
        return np.eye(len(values)) / len(values)
    values /= values.sum()
    return (vectors * values) @ vectors.conj().T


def linear_inversion(projections: ProjectionSet) -> np.ndarray:
    """Least-squares density matrix, not yet constrained to be physical."""
    dim = projections.dim
    design = projections.operators.conj().reshape(len(projections.operators), -1)
    solution, *_ = np.linalg.lstsq(design, projections.values.astype(complex), rcond=None)
    return solution.reshape(dim, dim)


def log_likelihood(rho: np.ndarray, projections: ProjectionSet) -> float:
    predicted = np.real(np.einsum("kij,ji->k", projections.operators, rho))
    values = np.clip(projections.values, 0.0, None)
    mask = values > 0
    return float(np.sum(values[mask] * np.log(np.clip(predicted[mask], 1e-12, None))))


def maximum_likelihood(
    projections: ProjectionSet,
    dilution: Optional[float] = None,
    tolerance: Optional[float] = None,
    max_iterations: Optional[int] = None,
) -> np.ndarray:
    """
    Diluted R-rho-R iteration started from the projected linear inversion.

    Raises:
        RankDeficiencyError: the projectors do not span the operator space
    """
    dilution = dilution if dilution is not None else solver_settings.mle_dilution
    tolerance = tolerance if tolerance is not None else solver_settings.mle_tolerance
    max_iterations = max_iterations or solver_settings.mle_max_iterations

    dim = projections.dim
    rank = informational_rank(projections.operators)
    if rank < dim * dim:
        raise RankDeficiencyError(f"Projections span {rank} of {dim * dim} operator dimensions")

    values = np.clip(projections.values, 0.0, None)
    rho = project_to_state(linear_inversion(projections))
    identity = np.eye(dim)
    previous = log_likelihood(rho, projections)

    for iteration in range(1, max_iterations + 1):
        predicted = np.real(np.einsum("kij,ji->k", projections.operators, rho))
        ratios = np.where(values > 0, values / np.clip(predicted, 1e-12, None), 0.0)
        r_operator = np.einsum("k,kij->ij", ratios, projections.operators) / projections.settings_count
        step = identity + dilution * r_operator
        rho = step @ rho @ step.conj().T
        rho = 0.5 * (rho + rho.conj().T)
        rho /= np.trace(rho).real

        current = log_likelihood(rho, projections)
        if abs(current - previous) < tolerance * max(1.0, abs(current)):
            logger.debug(f"MLE converged after {iteration} iterations, log-likelihood {current:.8f}")
            break
        previous = current
    else:
        logger.warning(f"MLE stopped at {max_iterations} iterations without converging")
    return rho


def _require_state(matrix: np.ndarray, role: str) -> np.ndarray:
    """Hermitian part of ``matrix`` after checking it is a density matrix."""
    if np.max(np.abs(matrix - matrix.conj().T)) > 1e-10:
        raise DomainError(f"{role} state is not Hermitian")
    trace = np.trace(matrix).real
    if abs(trace - 1.0) > 1e-8:
        raise DomainError(f"{role} state has trace {trace:.10f}")
    hermitian = 0.5 * (matrix + matrix.conj().T)
    lowest = np.linalg.eigvalsh(hermitian).min()
    if lowest < -1e-8:
        raise DomainError(f"{role} state has eigenvalue {lowest:.2e}")
    return hermitian


def fidelity(rho: np.ndarray, target: np.ndarray) -> float:
    """
    Uhlmann fidelity Tr sqrt(sqrt(s) rho sqrt(s)); a 1-D target is a pure
    state, for which this reduces to sqrt(<psi|rho|psi>).

    Raises:
        DomainError: either argument is not a physical density matrix
    """
    rho = _require_state(np.asarray(rho, dtype=complex), "Estimated")
    target = np.asarray(target, dtype=complex)
    if target.ndim == 1:
        ket = target / np.linalg.norm(target)
        return float(np.sqrt(max(np.real(ket.conj() @ rho @ ket), 0.0)))

    target = _require_state(target, "Target")
    values, vectors = np.linalg.eigh(target)
    values = np.where(values > 1e-12 * values.max(), values, 0.0)
    root = (vectors * np.sqrt(values)) @ vectors.conj().T
    inner = np.linalg.eigvalsh(root @ rho @ root)
    return float(min(np.sum(np.sqrt(np.clip(inner, 0.0, None))), 1.0))
