"""
Trimon parameterization by mean element values and signed asymmetries.

Junction k on bond 12, 23, 34, 41 gets E_J,k = E_Jm (1 + s_k . eta) with the
sign rows below, one column per asymmetry (AB, BC, CA). The same rows set the
nearest-neighbour capacitances from C_m and eta'.
"""

import logging
from typing import Annotated, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from multimon.circuit.netlist import Netlist
from multimon.circuit.presets import alternating_ground, four_node_ring
from multimon.errors import ConfigurationError, DomainError

logger = logging.getLogger(__name__)

BOND_SIGNS = np.array([
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, -1.0],
    [1.0, -1.0, -1.0],
    [-1.0, -1.0, 1.0],
])

Coefficient = Annotated[float, Field(gt=-1.0, lt=1.0)]
Triple = Tuple[Coefficient, Coefficient, Coefficient]


class AsymmetrySpec(BaseModel):
    """Mean junction energy and capacitance with their (AB, BC, CA) asymmetries."""

    model_config = ConfigDict(frozen=True)

    ej_mean: float = Field(..., gt=0.0, description="Mean Josephson energy E_Jm in GHz")
    eta: Triple = Field((0.0, 0.0, 0.0), description="Junction asymmetries (eta_AB, eta_BC, eta_CA)")
    c_mean: float = Field(..., gt=0.0, description="Mean nearest-neighbour capacitance C_m in fF")
    eta_prime: Triple = Field((0.0, 0.0, 0.0), description="Capacitor asymmetries (eta'_AB, eta'_BC, eta'_CA)")
    diagonal_caps: Tuple[float, float] = Field(..., description="Diagonal capacitors (C13, C24) in fF")
    ground_caps_ff: Optional[Tuple[float, float, float, float]] = Field(
        None, description="Node ground capacitances; alternating 0.01/0.02 fF when omitted"
    )
    flux_phi0: float = Field(0.0, description="External flux in Phi0")

    @model_validator(mode="after")
    def _check_diagonals(self) -> "AsymmetrySpec":
        if min(self.diagonal_caps) < 0:
            raise ConfigurationError(f"Diagonal capacitances must be non-negative, got {self.diagonal_caps}")
        return self

    def junction_energies(self) -> np.ndarray:
        return self.ej_mean * (1.0 + BOND_SIGNS @ np.asarray(self.eta))

    def bond_capacitances(self) -> np.ndarray:
        return self.c_mean * (1.0 + BOND_SIGNS @ np.asarray(self.eta_prime))


def apply_asymmetry(spec: AsymmetrySpec) -> Netlist:
    """
    Build the four-node ring netlist of a spec.

    Raises:
        DomainError: a junction energy or capacitance comes out non-positive
    """
    energies = spec.junction_energies()
    capacitances = spec.bond_capacitances()
    if np.any(energies <= 0) or np.any(capacitances <= 0):
        raise DomainError(
            f"Asymmetry gives non-positive elements: E_J={np.round(energies, 4).tolist()}, "
            f"C={np.round(capacitances, 4).tolist()}"
        )
    return four_node_ring(
        energies.tolist(),
        capacitances.tolist(),
        spec.diagonal_caps[0],
        spec.diagonal_caps[1],
        ground_caps_ff=list(spec.ground_caps_ff or alternating_ground(4)),
        flux_phi0=spec.flux_phi0,
    )


def _invert(values: np.ndarray) -> Tuple[float, Tuple[float, float, float]]:
    system = np.column_stack([np.ones(4), BOND_SIGNS])
    solution = np.linalg.solve(system.T @ system, system.T @ values)
    mean = float(solution[0])
    return mean, tuple(float(v) for v in solution[1:] / mean)


def recover_asymmetry(netlist: Netlist) -> AsymmetrySpec:
    """
    Inverse of ``apply_asymmetry`` for a four-node ring netlist.

    The four bond values are solved for (mean, mean * eta) in one linear system.
    """
    bonds = {(0, 1): 0, (1, 2): 1, (2, 3): 2, (0, 3): 3}
    energies = np.zeros(4)
    capacitances = np.zeros(4)
    diagonals = {}
    for branch in netlist.branches:
        if branch.pair in bonds:
            energies[bonds[branch.pair]] = branch.ej_ghz
            capacitances[bonds[branch.pair]] = branch.c_ff
        else:
            diagonals[branch.pair] = branch.c_ff
    if netlist.nodes != 4 or np.any(energies <= 0):
        raise DomainError("Asymmetry recovery needs a four-node ring with junctions on every bond")

    ej_mean, eta = _invert(energies)
    c_mean, eta_prime = _invert(capacitances)
    return AsymmetrySpec(
        ej_mean=ej_mean,
        eta=eta,
        c_mean=c_mean,
        eta_prime=eta_prime,
        diagonal_caps=(diagonals.get((0, 2), 0.0), diagonals.get((1, 3), 0.0)),
        ground_caps_ff=tuple(netlist.ground_caps_ff),
        flux_phi0=netlist.flux_phi0,
    )
