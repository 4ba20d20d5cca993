"""
Brute-force reference spectrum: the full cosine Hamiltonian diagonalized in
the harmonic eigenbasis of the linearized circuit.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import reduce
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.linalg import eigh, expm

from multimon.circuit.matrices import PHI0_SQ_OVER_NH_GHZ, LinearizedMatrices
from multimon.circuit.modes import ModeSolution
from multimon.circuit.netlist import Netlist

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class OracleSpectrum:
    """Eigenenergies (GHz, ground state at zero) of the bare states they overlap most."""

    labels: Tuple[str, ...]
    energies: Dict[Tuple[int, ...], float]
    levels: int

    def single_excitations(self) -> np.ndarray:
        count = len(self.labels)
        return np.array([self.energies[tuple(int(k == m) for k in range(count))] for m in range(count)])

    def anharmonicities(self) -> np.ndarray:
        count = len(self.labels)
        singles = self.single_excitations()
        doubles = np.array([self.energies[tuple(2 * int(k == m) for k in range(count))] for m in range(count)])
        return doubles - 2.0 * singles

    def pair_shift(self, a: int, b: int) -> float:
        """E(1_a 1_b) - E(1_a) - E(1_b), i.e. -2 J_ab."""
        count = len(self.labels)
        state = tuple(int(k in (a, b)) for k in range(count))
        singles = self.single_excitations()
        return self.energies[state] - singles[a] - singles[b]


def _mode_operators(weight: float, zpf: float, levels: int, padding: int):
    """Truncated e^{i w x}, x and x^2 for one mode, built in a padded space."""
    dim = levels + padding
    ladder = np.diag(np.sqrt(np.arange(1, dim)), 1)
    x = zpf * (ladder + ladder.T)
    exponential = expm(1j * weight * x)[:levels, :levels]
    square = (x @ x)[:levels, :levels]
    return exponential, x[:levels, :levels], square


def _kron_all(factors):
    return reduce(np.kron, factors)


def brute_force_spectrum(
    netlist: Netlist,
    modes: ModeSolution,
    matrices: Optional[LinearizedMatrices] = None,
    levels: int = 10,
    padding: int = 30,
) -> OracleSpectrum:
    """
    Diagonalize H = sum omega n + sum_b [U_b(phi_b + d_b) - quadratic Taylor part]
    with d_b = sum_mu (T_i mu - T_j mu) x_mu, 10 levels per mode by default.

    Returns energies for every bare state with occupations up to 2.
    """
    count = modes.count
    dim = levels ** count
    phases = matrices.dc_phases if matrices is not None else np.zeros(len(netlist.inductive_branches))

    harmonic = reduce(np.add.outer, [w * np.arange(levels) for w in modes.omegas]).ravel()
    hamiltonian = np.diag(harmonic).astype(complex)
    identity = np.eye(levels)

    for branch, phase in zip(netlist.inductive_branches, phases):
        if not branch.is_junction:
            continue
        weights = modes.mode_matrix[branch.i] - modes.mode_matrix[branch.j]
        per_mode = [
            _mode_operators(w, z, levels, padding) for w, z in zip(weights, modes.zero_point_fluxes)
        ]
        displacement = _kron_all([op[0] for op in per_mode])
        cosine = 0.5 * (np.exp(1j * phase) * displacement + np.exp(-1j * phase) * displacement.conj().T)

        drop = np.zeros((dim, dim))
        drop_sq = np.zeros((dim, dim))
        for m in range(count):
            drop += _kron_all([per_mode[k][1] if k == m else identity for k in range(count)])
            drop_sq += _kron_all([per_mode[k][2] if k == m else identity for k in range(count)])
        for a, b in itertools.combinations(range(count), 2):
            drop_sq += 2.0 * _kron_all([
                per_mode[k][1] if k in (a, b) else identity for k in range(count)
            ])

        anharmonic = -branch.ej_ghz * (
            cosine - np.cos(phase) * np.eye(dim) + np.sin(phase) * drop + 0.5 * np.cos(phase) * drop_sq
        )
        hamiltonian += TWO_PI * anharmonic

    hamiltonian = 0.5 * (hamiltonian + hamiltonian.conj().T)
    values, vectors = eigh(hamiltonian)
    weights = np.abs(vectors) ** 2

    energies = {}
    for state in itertools.product(range(min(3, levels)), repeat=count):
        flat = np.ravel_multi_index(state, (levels,) * count)
        energies[state] = values[int(np.argmax(weights[flat]))]
    ground = energies[(0,) * count]
    energies = {state: (value - ground) / TWO_PI for state, value in energies.items()}
    logger.info(f"Oracle spectrum over {dim} states, {levels} levels per mode")
    return OracleSpectrum(labels=modes.labels, energies=energies, levels=levels)


def potential_energy(
    netlist: Netlist,
    modes: ModeSolution,
    x: np.ndarray,
    matrices: Optional[LinearizedMatrices] = None,
) -> float:
    """Classical potential (angular GHz) at mode fluxes ``x`` measured from the static point."""
    phases = matrices.dc_phases if matrices is not None else np.zeros(len(netlist.inductive_branches))
    total = 0.0
    for branch, phase in zip(netlist.inductive_branches, phases):
        drop = float((modes.mode_matrix[branch.i] - modes.mode_matrix[branch.j]) @ x)
        total -= branch.ej_ghz * (np.cos(phase + drop) - np.cos(phase))
        if branch.l_nh is not None:
            total += PHI0_SQ_OVER_NH_GHZ / branch.l_nh * ((phase + drop) ** 2 - phase ** 2) / 2.0
    return TWO_PI * total


def quartic_coefficient(
    netlist: Netlist,
    modes: ModeSolution,
    mode: int,
    step: float = 0.02,
    matrices: Optional[LinearizedMatrices] = None,
) -> float:
    """Coefficient of x_mode^4 from a five-point fourth difference of the potential."""
    direction = np.zeros(modes.count)
    direction[mode] = 1.0
    samples = [potential_energy(netlist, modes, k * step * direction, matrices) for k in (-2, -1, 0, 1, 2)]
    fourth = (samples[0] - 4 * samples[1] + 6 * samples[2] - 4 * samples[3] + samples[4]) / step ** 4
    return fourth / 24.0
