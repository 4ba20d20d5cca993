"""Direct cavity couplings of the normal modes."""

import logging
from typing import Optional, Sequence

import numpy as np

from multimon.circuit.modes import TRIMON_SHAPES, ModeSolution

logger = logging.getLogger(__name__)


def ideal_reference(
    modes: ModeSolution,
    reference_mode: str = "A",
    ring_order: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """
    Node-space direction of the cavity field: the ideal trimon shape of
    ``reference_mode`` on four-node rings, else the mode's own shape.
    """
    nodes = modes.mode_matrix.shape[0]
    if nodes == 4 and reference_mode in TRIMON_SHAPES:
        vector = np.zeros(4)
        vector[list(ring_order or range(4))] = TRIMON_SHAPES[reference_mode]
        return vector / np.linalg.norm(vector)
    return modes.shape(modes.index(reference_mode))


def direct_couplings(
    modes: ModeSolution,
    g_ref_mhz: float,
    reference_mode: str = "A",
    ring_order: Optional[Sequence[int]] = None,
    reference_vector: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Project every mode shape on the cavity field direction:
    g'_mu = g_ref (shape_mu . ref) / |ref|^2.

    Returns:
        g' in MHz per mode, in mode index order; signed so that the reference
        mode's coupling is positive
    """
    reference = ideal_reference(modes, reference_mode, ring_order) if reference_vector is None \
        else np.asarray(reference_vector, dtype=float)
    reference = reference / np.linalg.norm(reference)
    projections = np.array([modes.shape(k) @ reference for k in range(modes.count)])
    sign = np.sign(projections[modes.index(reference_mode)]) or 1.0
    couplings = g_ref_mhz * sign * projections
    logger.info(
        "Direct couplings: " + ", ".join(f"g'_{l}={g:.2f}" for l, g in zip(modes.labels, couplings)) + " MHz"
    )
    return couplings
