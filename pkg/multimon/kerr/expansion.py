"""Taylor expansion of the circuit potential in normal-mode coordinates."""

import logging
from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import Dict, Iterator, Tuple

import numpy as np

from multimon.circuit.matrices import PHI0_SQ_OVER_NH_GHZ, LinearizedMatrices
from multimon.circuit.modes import ModeSolution
from multimon.circuit.netlist import Netlist
from multimon.errors import DomainError

logger = logging.getLogger(__name__)

Exponent = Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class PotentialExpansion:
    """
    Polynomial U(x) = sum c_e prod x_mu^e_mu in mode fluxes x (reduced units).

    Coefficients are in angular GHz; the quadratic part equals omega_mu^2 / 2 on
    the diagonal. Orders 2..order are kept; the constant and linear parts are dropped.
    """

    coefficients: Dict[Exponent, float]
    order: int
    omegas: np.ndarray
    zero_point_fluxes: np.ndarray
    labels: Tuple[str, ...]

    def terms(self, degree: int) -> Dict[Exponent, float]:
        return {e: c for e, c in self.coefficients.items() if sum(e) == degree}

    def coefficient(self, exponent: Exponent) -> float:
        return self.coefficients.get(tuple(exponent), 0.0)

    def evaluate(self, x: np.ndarray) -> float:
        return float(sum(c * np.prod(np.power(x, e)) for e, c in self.coefficients.items()))


@lru_cache(maxsize=None)
def compositions(total: int, parts: int) -> Tuple[Exponent, ...]:
    """All exponent tuples of length ``parts`` summing to ``total``."""
    if parts == 1:
        return ((total,),)
    result = []
    for head in range(total, -1, -1):
        for tail in compositions(total - head, parts - 1):
            result.append((head,) + tail)
    return tuple(result)


def _multinomial(exponent: Exponent) -> int:
    value = factorial(sum(exponent))
    for k in exponent:
        value //= factorial(k)
    return value


def branch_series(ej: float, el: float, phase: float, order: int) -> Iterator[Tuple[int, float]]:
    """
    Taylor coefficients (angular GHz) of -E_J cos(phase + d) + E_L (phase + d)^2 / 2
    in powers d^n, n = 2..order.
    """
    # n-th derivative of cos cycles through cos, -sin, -cos, sin
    cycle = (np.cos(phase), -np.sin(phase), -np.cos(phase), np.sin(phase))
    for n in range(2, order + 1):
        value = -ej * cycle[n % 4] / factorial(n)
        if n == 2:
            value += el / 2.0
        yield n, 2.0 * np.pi * value


def expand_potential(
    netlist: Netlist,
    modes: ModeSolution,
    order: int = 4,
    matrices: LinearizedMatrices = None,
) -> PotentialExpansion:
    """
    Expand every branch potential around its static phase and project onto the modes.

    Args:
        netlist: circuit description
        modes: linear solution for the same netlist and flux
        order: highest even power kept (4, 6 or 8)
        matrices: linearization carrying the static phases (zero phases when omitted)

    Raises:
        DomainError: order odd or outside 4..8
    """
    if order % 2 or not 4 <= order <= 8:
        raise DomainError(f"Expansion order must be 4, 6 or 8, got {order}")

    inductive = netlist.inductive_branches
    phases = matrices.dc_phases if matrices is not None else np.zeros(len(inductive))
    count = modes.count
    coefficients: Dict[Exponent, float] = {}

    for branch, phase in zip(inductive, phases):
        weights = modes.mode_matrix[branch.i] - modes.mode_matrix[branch.j]
        el = PHI0_SQ_OVER_NH_GHZ / branch.l_nh if branch.l_nh else 0.0
        for n, series_coefficient in branch_series(branch.ej_ghz, el, phase, order):
            if series_coefficient == 0.0:
                continue
            for exponent in compositions(n, count):
                term = series_coefficient * _multinomial(exponent) * np.prod(np.power(weights, exponent))
                coefficients[exponent] = coefficients.get(exponent, 0.0) + term

    scale = max(abs(c) for c in coefficients.values())
    coefficients = {e: c for e, c in coefficients.items() if abs(c) > 1e-14 * scale}

    logger.info(f"Potential expanded to order {order}: {len(coefficients)} terms over {count} modes")
    return PotentialExpansion(
        coefficients=coefficients,
        order=order,
        omegas=modes.omegas,
        zero_point_fluxes=modes.zero_point_fluxes,
        labels=modes.labels,
    )
