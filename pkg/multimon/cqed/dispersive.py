"""
Dispersive shifts of the readout cavity for every computational basis state.

Each mode contributes through its own transitions out of the state: the
0->1 line when it is empty, the 1->0 and 1->2 lines when it is excited. The
cross-Kerr couplings move those lines by the excitations of the other modes,
which is the indirect part of the shift.
"""

import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from multimon.circuit.modes import ModeSolution
from multimon.config.settings import solver_settings
from multimon.cqed.couplings import direct_couplings, ideal_reference
from multimon.errors import DomainError, NearResonanceError
from multimon.kerr.extraction import KerrTensor
from multimon.labels import basis_label

logger = logging.getLogger(__name__)

DETUNING_REFERENCES = ("qubit_frequency", "appendix")


@dataclass(frozen=True, eq=False)
class CavityModel:
    """
    Cavity and its couplings, arrays in qubit-letter order.

    ``detunings`` are Delta_mu0 in GHz, ``g_direct`` in MHz and ``chi`` maps
    basis-state labels ('100', ...) to shifts in MHz.
    """

    omega_r: float
    g_ref: float
    field_direction: np.ndarray
    letters: Tuple[str, ...]
    g_direct: np.ndarray
    detunings: np.ndarray
    detuning_reference: str = "qubit_frequency"
    chi: Dict[str, float] = field(default_factory=dict)
    warnings: Tuple[str, ...] = field(default_factory=tuple)


def mode_detunings(
    kerr: KerrTensor,
    omega_r: float,
    frequencies: Optional[np.ndarray] = None,
    reference: str = "qubit_frequency",
) -> np.ndarray:
    """
    Qubit-cavity detunings in GHz, in qubit-letter order.

    ``qubit_frequency`` uses omega/2pi - J; ``appendix`` uses
    omega/2pi - 2 J - sum_nu 2 J_mu_nu.
    """
    if reference not in DETUNING_REFERENCES:
        raise DomainError(f"Unknown detuning reference {reference!r}")
    order = sorted(range(kerr.count), key=lambda k: kerr.labels[k])
    bare = kerr.frequencies if frequencies is None else np.asarray(frequencies, dtype=float)
    if reference == "qubit_frequency":
        levels = bare - kerr.self_kerr
    else:
        levels = bare - 2.0 * kerr.self_kerr - 2.0 * kerr.cross_kerr.sum(axis=1)
    return (levels - omega_r)[order]


def state_dispersive_shifts(
    g: np.ndarray,
    detunings: np.ndarray,
    self_kerr: np.ndarray,
    cross_kerr: np.ndarray,
    guard: Optional[float] = None,
    letters: Optional[Tuple[str, ...]] = None,
) -> Dict[str, float]:
    """
    Shifts of every excited basis state; all inputs and outputs share one unit.

    Per mode mu with S = sum of 2 J_mu_nu over the other excited modes:
      excited:  g^2/2 [1/D + 1/(D - S) - 2/(D - 2J - S)]
      empty:    g^2/2 [1/D - 1/(D - S)]

    Raises:
        NearResonanceError: a denominator within ``guard`` of zero
    """
    count = len(detunings)
    letters = letters or tuple(chr(ord("A") + k) for k in range(count))
    shifts = {}
    for state in itertools.product((0, 1), repeat=count):
        if not any(state):
            continue
        total = 0.0
        for mu in range(count):
            if g[mu] == 0.0:
                continue
            pull = sum(2.0 * cross_kerr[mu, nu] for nu in range(count) if nu != mu and state[nu])
            delta = detunings[mu]
            if state[mu]:
                denominators = [delta, delta - pull, delta - 2.0 * self_kerr[mu] - pull]
                weights = [1.0, 1.0, -2.0]
            else:
                denominators = [delta, delta - pull]
                weights = [1.0, -1.0]
            if guard is not None:
                for value in denominators:
                    if abs(value) < guard:
                        raise NearResonanceError(
                            f"Mode {letters[mu]} is within {abs(value):.3g} of the cavity "
                            f"in state {basis_label(state)}",
                            pair=(letters[mu], "cavity"),
                        )
            total += 0.5 * g[mu] ** 2 * sum(w / d for w, d in zip(weights, denominators))
        shifts[basis_label(state)] = total
    return shifts


def trimon_dispersive_shifts(
    g_a: float,
    delta_a: float,
    j_a: float,
    j_ab: float,
    j_ca: float,
) -> Tuple[float, float, float]:
    """Single-excitation shifts of a trimon coupled only through mode A."""
    chi_a = -2.0 * g_a ** 2 * j_a / (delta_a * (delta_a - 2.0 * j_a))
    chi_b = -g_a ** 2 * j_ab / (delta_a * (delta_a - 2.0 * j_ab))
    chi_c = -g_a ** 2 * j_ca / (delta_a * (delta_a - 2.0 * j_ca))
    return chi_a, chi_b, chi_c


def dispersive_shifts(
    cavity: CavityModel,
    kerr: KerrTensor,
    frequencies: Optional[np.ndarray] = None,
) -> Dict[str, float]:
    """
    Dispersive shift (MHz) of each excited computational state.

    Raises:
        NearResonanceError: any denominator within the near-resonance guard (1 MHz)
    """
    order = sorted(range(kerr.count), key=lambda k: kerr.labels[k])
    detunings = mode_detunings(kerr, cavity.omega_r, frequencies, cavity.detuning_reference)
    g = cavity.g_direct / 1e3
    shifts = state_dispersive_shifts(
        g,
        detunings,
        kerr.self_kerr[order],
        kerr.cross_kerr[np.ix_(order, order)],
        guard=solver_settings.near_resonance_mhz / 1e3,
        letters=cavity.letters,
    )
    return {state: 1e3 * value for state, value in shifts.items()}


def build_cavity_model(
    modes: ModeSolution,
    kerr: KerrTensor,
    omega_r: float,
    g_ref_mhz: float,
    reference_mode: str = "A",
    detuning_reference: str = "qubit_frequency",
    ring_order=None,
) -> CavityModel:
    """Couplings, detunings and dispersive shifts of a solved device."""
    order = modes.qubit_order()
    couplings = direct_couplings(modes, g_ref_mhz, reference_mode, ring_order)
    detunings = mode_detunings(kerr, omega_r, reference=detuning_reference)
    letters = tuple(modes.labels[k] for k in order)
    field_direction = ideal_reference(modes, reference_mode, ring_order)

    warnings: List[str] = []
    for letter, g, delta in zip(letters, couplings[order], detunings):
        if g == 0.0:
            continue
        ratio = abs(delta * 1e3 / g)
        if ratio < solver_settings.dispersive_ratio_warn:
            message = f"Mode {letter}: |Delta/g'| = {ratio:.1f} is below {solver_settings.dispersive_ratio_warn:g}"
            logger.warning(message)
            warnings.append(message)

    cavity = CavityModel(
        omega_r=omega_r,
        g_ref=g_ref_mhz,
        field_direction=field_direction,
        letters=letters,
        g_direct=couplings[order],
        detunings=detunings,
        detuning_reference=detuning_reference,
        warnings=tuple(warnings),
    )
    chi = dispersive_shifts(cavity, kerr)
    logger.info("Dispersive shifts: " + ", ".join(f"chi_{s}={v:.4f}" for s, v in chi.items()) + " MHz")
    return replace(cavity, chi=chi)
