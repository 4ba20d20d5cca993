"""Linearized inductive-energy and capacitance matrices of a netlist."""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.constants import e, h, hbar
from scipy.linalg import lapack

from multimon.circuit.netlist import Netlist
from multimon.errors import ConfigurationError, InstabilityError

logger = logging.getLogger(__name__)

# Charging energy e^2/2C of 1 fF, in GHz
EC_PER_FF_GHZ = e ** 2 / (2 * h * 1e-15) / 1e9
# phi0^2 / L for L = 1 nH, in GHz, with phi0 = hbar/2e
PHI0_SQ_OVER_NH_GHZ = (hbar / (2 * e)) ** 2 / 1e-9 / h / 1e9


@dataclass(frozen=True, eq=False)
class LinearizedMatrices:
    """
    Quadratic part of the circuit Lagrangian.

    ``EL`` is in GHz (E/h) and ``Cmat`` in fF. ``dc_phases`` and ``effective_ej``
    follow the order of the netlist's inductive branches.
    """

    EL: np.ndarray
    Cmat: np.ndarray
    dc_phases: np.ndarray
    effective_ej: np.ndarray
    ring_order: Optional[Tuple[int, ...]] = None

    @property
    def size(self) -> int:
        return self.EL.shape[0]

    def stiffness(self) -> np.ndarray:
        """Inductive matrix in angular GHz for reduced fluxes (phi0 = 1)."""
        return 2.0 * np.pi * self.EL

    def mass(self) -> np.ndarray:
        """Capacitance matrix as the mass matrix 1/(8 E_C) in 1/(angular GHz)."""
        return self.Cmat / (8.0 * 2.0 * np.pi * EC_PER_FF_GHZ)


def _check_positive_definite(cmat: np.ndarray) -> None:
    _, info = lapack.dpotrf(cmat, lower=True)
    if info == 0:
        return
    isolated = np.flatnonzero(np.all(cmat == 0.0, axis=1))
    if isolated.size:
        node = int(isolated[0])
        raise ConfigurationError(
            f"Capacitance matrix is singular: node {node} has no capacitance; "
            f"give it a non-zero capacitance to ground",
            node=node,
        )
    raise ConfigurationError(
        f"Capacitance matrix is not positive definite: leading minor of order {info} "
        f"(nodes 0..{info - 1}) is not positive"
    )


def build_matrices(netlist: Netlist, dc_phases: Optional[np.ndarray] = None) -> LinearizedMatrices:
    """
    Assemble E_L and C for a netlist linearized around the given static phases.

    Args:
        netlist: circuit description
        dc_phases: phase drop per inductive branch in radians (zeros when omitted)

    Raises:
        ConfigurationError: wrong phase count or a singular capacitance matrix
        InstabilityError: a junction biased beyond |phi| = pi/2
    """
    inductive = netlist.inductive_branches
    if dc_phases is None:
        dc_phases = np.zeros(len(inductive))
    dc_phases = np.asarray(dc_phases, dtype=float)
    if dc_phases.shape != (len(inductive),):
        raise ConfigurationError(
            f"Expected {len(inductive)} DC phases, got {dc_phases.shape[0] if dc_phases.ndim else 0}"
        )

    n = netlist.nodes
    el = np.zeros((n, n))
    effective_ej = np.zeros(len(inductive))
    for k, (branch, phase) in enumerate(zip(inductive, dc_phases)):
        effective_ej[k] = branch.ej_ghz * np.cos(phase)
        if effective_ej[k] < 0.0:
            raise InstabilityError(
                f"Junction {branch.i}-{branch.j} has negative effective E_J at phase {phase:.4f} rad"
            )
        energy = effective_ej[k]
        if branch.l_nh is not None:
            energy += PHI0_SQ_OVER_NH_GHZ / branch.l_nh
        el[branch.i, branch.i] += energy
        el[branch.j, branch.j] += energy
        el[branch.i, branch.j] -= energy
        el[branch.j, branch.i] -= energy

    cmat = np.diag(np.asarray(netlist.ground_caps_ff, dtype=float))
    for branch in netlist.branches:
        cmat[branch.i, branch.i] += branch.c_ff
        cmat[branch.j, branch.j] += branch.c_ff
        cmat[branch.i, branch.j] -= branch.c_ff
        cmat[branch.j, branch.i] -= branch.c_ff
    _check_positive_definite(cmat)

    order = netlist.ring_order()
    return LinearizedMatrices(
        EL=el,
        Cmat=cmat,
        dc_phases=dc_phases,
        effective_ej=effective_ej,
        ring_order=tuple(order) if order else None,
    )
