"""
Truncated multimon Hilbert space: the diagonal Kerr Hamiltonian, ladder
operators and cached segment propagators.

Occupation tuples index the basis in qubit-letter order, mode A most
significant. Energies are in GHz; time-evolution code works in rad/ns.
"""

import itertools
import logging
from collections import OrderedDict
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from multimon.kerr.extraction import KerrTensor
from multimon.kerr.levels import diagram_energy
from multimon.labels import transition_states

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class TrimonSystem:
    letters: Tuple[str, ...]
    levels: int
    energies: np.ndarray
    occupations: np.ndarray
    lowering: Tuple[np.ndarray, ...]

    @classmethod
    def from_kerr(cls, kerr: KerrTensor, levels: int = 3, include_three_body: bool = False) -> "TrimonSystem":
        """Diagonal Hamiltonian of the extracted Kerr coefficients, three-body term dropped by default."""
        order = sorted(range(kerr.count), key=lambda k: kerr.labels[k])
        linear = (kerr.frequencies - kerr.beta + kerr.frequency_shift)[order]
        self_kerr = kerr.self_kerr[order]
        cross = kerr.cross_kerr[np.ix_(order, order)]
        triple = kerr.three_body[np.ix_(order, order, order)] if include_three_body else None

        count = len(order)
        occupations = np.array(list(itertools.product(range(levels), repeat=count)), dtype=int)
        energies = np.array([diagram_energy(state, linear, self_kerr, cross, triple) for state in occupations])
        energies -= energies[0]

        single = np.diag(np.sqrt(np.arange(1, levels)), 1)
        lowering = []
        for mode in range(count):
            factors = [single if k == mode else np.eye(levels) for k in range(count)]
            operator = factors[0]
            for factor in factors[1:]:
                operator = np.kron(operator, factor)
            lowering.append(operator)
        return cls(
            letters=tuple(kerr.labels[k] for k in order),
            levels=levels,
            energies=energies,
            occupations=occupations,
            lowering=tuple(lowering),
        )

    @property
    def count(self) -> int:
        return len(self.letters)

    @property
    def dim(self) -> int:
        return self.levels ** self.count

    @property
    def total_number(self) -> np.ndarray:
        return self.occupations.sum(axis=1)

    def index(self, state: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(state), (self.levels,) * self.count))

    def computational_indices(self) -> List[int]:
        return [self.index(state) for state in itertools.product((0, 1), repeat=self.count)]

    def transition_indices(self, label: str) -> Tuple[int, int]:
        lower, upper = transition_states(label, self.count)
        return self.index(lower), self.index(upper)

    def transition_frequency(self, label: str) -> float:
        low, high = self.transition_indices(label)
        return float(self.energies[high] - self.energies[low])

    def raising(self, weights: Sequence[float]) -> np.ndarray:
        """Drive operator sum_mu w_mu a_mu^dagger."""
        operator = np.zeros((self.dim, self.dim))
        for w, a in zip(weights, self.lowering):
            operator = operator + w * a.T
        return operator

    def frame_phases(self, carrier_ghz: float, time_ns: float) -> np.ndarray:
        """Elementwise factor taking the interaction frame to the carrier frame at ``time_ns``."""
        theta = TWO_PI * (carrier_ghz * self.total_number - self.energies) * time_ns
        return np.exp(1j * (theta[:, None] - theta[None, :]))

    def number_phases(self, phi: float) -> np.ndarray:
        number = self.total_number
        return np.exp(-1j * phi * (number[:, None] - number[None, :]))


def dissipator_superoperator(lowering: Sequence[np.ndarray], gammas: Sequence[float]) -> np.ndarray:
    """Row-major vectorized sum of gamma D[a]."""
    dim = lowering[0].shape[0]
    identity = np.eye(dim)
    total = np.zeros((dim * dim, dim * dim), dtype=complex)
    for a, gamma in zip(lowering, gammas):
        if not gamma:
            continue
        number = a.conj().T @ a
        total += gamma * (np.kron(a, a.conj()) - 0.5 * np.kron(number, identity) - 0.5 * np.kron(identity, number.T))
    return total


class PropagatorCache:
    """
    Exact segment propagators in the carrier frame, keyed by carrier,
    amplitude, duration and drive weights. Drive phases enter by conjugation.
    """

    def __init__(self, system: TrimonSystem, gammas: Sequence[float], maxsize: int = 256):
        self.system = system
        self.gammas = tuple(float(g) for g in gammas)
        self.maxsize = maxsize
        self._dissipator = dissipator_superoperator(system.lowering, self.gammas)
        self._cache: "OrderedDict[tuple, np.ndarray]" = OrderedDict()
        self.hits = 0
        self.misses = 0

    def liouvillian(self, carrier_ghz: float, amplitude: float, weights: Sequence[float]) -> np.ndarray:
        system = self.system
        hamiltonian = np.diag(TWO_PI * (system.energies - carrier_ghz * system.total_number)).astype(complex)
        if amplitude:
            raising = system.raising(weights)
            hamiltonian += 1j * amplitude * (raising - raising.conj().T)
        identity = np.eye(system.dim)
        coherent = -1j * (np.kron(hamiltonian, identity) - np.kron(identity, hamiltonian.T))
        return coherent + self._dissipator

    def get(self, carrier_ghz: float, amplitude: float, duration_ns: float, weights: Sequence[float]) -> np.ndarray:
        key = (round(carrier_ghz, 12), round(amplitude, 15), round(duration_ns, 12), tuple(np.round(weights, 12)))
        propagator = self._cache.get(key)
        if propagator is not None:
            self.hits += 1
            self._cache.move_to_end(key)
            return propagator
        self.misses += 1
        propagator = expm(self.liouvillian(carrier_ghz, amplitude, weights) * duration_ns)
        self._cache[key] = propagator
        if len(self._cache) > self.maxsize:
            self._cache.popitem(last=False)
        return propagator
