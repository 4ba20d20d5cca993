"""Diagonal multimon spectrum: energies, conditional and leakage transitions."""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from multimon.errors import DomainError
from multimon.kerr.extraction import KerrTensor
from multimon.labels import qubit_letters, transition_label

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LevelDiagram:
    """
    Energies (GHz) keyed by occupation tuples in qubit-letter order, the
    computational 0->1 transitions and the 1->2 leakage lines, each labelled
    target-first, e.g. ``AB0C1``.
    """

    letters: Tuple[str, ...]
    energies: Dict[Tuple[int, ...], float]
    transitions: Dict[str, float]
    leakage_transitions: Dict[str, float]
    max_occupation: int

    def energy(self, state: Sequence[int]) -> float:
        return self.energies[tuple(state)]

    def transition(self, label: str) -> float:
        return self.transitions[label]


def diagram_energy(
    state: Sequence[int],
    linear: np.ndarray,
    self_kerr: np.ndarray,
    cross: np.ndarray,
    triple: Optional[np.ndarray] = None,
) -> float:
    n = np.asarray(state, dtype=float)
    energy = float(linear @ n - self_kerr @ (n * n))
    for a, b in itertools.combinations(range(len(n)), 2):
        energy -= 2.0 * cross[a, b] * n[a] * n[b]
    if triple is not None:
        for a, b, c in itertools.combinations(range(len(n)), 3):
            energy += triple[a, b, c] * n[a] * n[b] * n[c]
    return energy


def build_level_diagram(
    kerr: KerrTensor,
    frequencies: Optional[np.ndarray] = None,
    max_occupation: int = 2,
    include_three_body: bool = True,
) -> LevelDiagram:
    """
    Evaluate the diagonal Hamiltonian at integer occupations.

    E(n) = sum (omega - beta + delta) n - J n^2 - sum_pairs 2 J_mn n_m n_n
           + sum_triples J_mnz n_m n_n n_z

    Args:
        kerr: extracted coefficients
        frequencies: linear mode frequencies in GHz (defaults to ``kerr.frequencies``)
        max_occupation: highest occupation per mode; 2 or more adds leakage lines
        include_three_body: keep the J_mnz term
    """
    if max_occupation < 1:
        raise DomainError(f"max_occupation must be at least 1, got {max_occupation}")
    frequencies = kerr.frequencies if frequencies is None else np.asarray(frequencies)

    order = sorted(range(kerr.count), key=lambda k: kerr.labels[k])
    letters = tuple(kerr.labels[k] for k in order)
    linear = (frequencies - kerr.beta + kerr.frequency_shift)[order]
    self_kerr = kerr.self_kerr[order]
    cross = kerr.cross_kerr[np.ix_(order, order)]
    triple = kerr.three_body[np.ix_(order, order, order)] if include_three_body else None

    count = len(order)
    energies = {
        state: diagram_energy(state, linear, self_kerr, cross, triple)
        for state in itertools.product(range(max_occupation + 1), repeat=count)
    }

    transitions = {}
    leakage = {}
    for state in itertools.product((0, 1), repeat=count):
        for target in range(count):
            if state[target]:
                continue
            label = transition_label(target, state)
            upper = list(state)
            upper[target] = 1
            transitions[label] = energies[tuple(upper)] - energies[state]
            if max_occupation >= 2:
                second = list(upper)
                second[target] = 2
                leakage[label] = energies[tuple(second)] - energies[tuple(upper)]

    if list(letters) != qubit_letters(count):
        logger.warning(f"Mode labels {letters} are not consecutive letters")
    return LevelDiagram(
        letters=letters,
        energies=energies,
        transitions=transitions,
        leakage_transitions=leakage,
        max_occupation=max_occupation,
    )
