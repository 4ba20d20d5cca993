"""
Quantization of the expanded potential and extraction of Kerr coefficients.

Each mode flux becomes x_mu = zpf_mu (a_mu + a_mu^dagger). The number-conserving
part of x^p is the diagonal moment <n|(a + a^dagger)^p|n>, a polynomial in n
derived symbolically once per power.
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from typing import Dict, List, Tuple

import numpy as np
import sympy

from multimon.circuit.modes import ModeSolution
from multimon.config.settings import solver_settings
from multimon.kerr.expansion import Exponent, PotentialExpansion

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class KerrTensor:
    """
    Parameters of the diagonal multimon Hamiltonian, all in GHz.

    ``frequencies`` are the linear mode frequencies omega/2pi. ``frequency_shift``
    holds the corrections to the single-excitation energies beyond omega - beta
    (higher self powers folded on occupations 0/1, optional second order).
    ``three_wave`` maps sorted mode-index triples to cubic coefficients scaled by
    the zero-point fluxes.
    """

    labels: Tuple[str, ...]
    frequencies: np.ndarray
    self_kerr: np.ndarray
    cross_kerr: np.ndarray
    three_body: np.ndarray
    three_wave: Dict[Tuple[int, int, int], float]
    beta: np.ndarray
    frequency_shift: np.ndarray
    order: int = 4
    second_order: bool = False
    warnings: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def count(self) -> int:
        return len(self.labels)

    @property
    def anharmonicities(self) -> np.ndarray:
        return -2.0 * self.self_kerr

    def qubit_frequencies(self) -> np.ndarray:
        """Mode frequencies dressed by their own zero-point Kerr shift, omega/2pi - J."""
        return self.frequencies - self.self_kerr

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def cross(self, first: str, second: str) -> float:
        return float(self.cross_kerr[self.index(first), self.index(second)])

    @property
    def xi_abc(self) -> float:
        """Three-wave coefficient of the first three labelled modes."""
        order = sorted(range(self.count), key=lambda k: self.labels[k])[:3]
        if len(order) < 3:
            return 0.0
        return self.three_wave.get(tuple(sorted(order)), 0.0)


@lru_cache(maxsize=None)
def ladder_moment(power: int) -> Tuple[int, ...]:
    """
    Integer coefficients (constant first) of <n|(a + a^dagger)^power|n> as a
    polynomial in n. Every closed walk of +-1 steps contributes the product of
    (n + h + 1) over its up-steps from height h.
    """
    n = sympy.Symbol("n")
    if power % 2:
        return (0,)
    total = sympy.Integer(0)
    for steps in itertools.product((1, -1), repeat=power):
        if sum(steps):
            continue
        height, term = 0, sympy.Integer(1)
        for step in steps:
            if step > 0:
                term *= n + height + 1
                height += 1
            else:
                height -= 1
        total += term
    poly = sympy.Poly(sympy.expand(total), n)
    return tuple(int(c) for c in reversed(poly.all_coeffs()))


def number_polynomial(expansion: PotentialExpansion) -> Dict[Exponent, float]:
    """Normal-ordered, number-conserving part of the anharmonic terms (angular GHz)."""
    zpf = expansion.zero_point_fluxes
    polynomial: Dict[Exponent, float] = {}
    for exponent, coefficient in expansion.coefficients.items():
        if sum(exponent) < 3 or any(p % 2 for p in exponent):
            continue
        scale = coefficient * np.prod(np.power(zpf, exponent))
        per_mode = [ladder_moment(p) for p in exponent]
        for powers in itertools.product(*(range(len(m)) for m in per_mode)):
            value = scale * np.prod([per_mode[k][q] for k, q in enumerate(powers)])
            if value != 0.0:
                polynomial[powers] = polynomial.get(powers, 0.0) + value
    return polynomial


def _subset_energies(values: Dict[Tuple[int, ...], float], count: int) -> Dict[Tuple[int, ...], float]:
    """Moebius inversion of a function on {0,1}^count into multilinear coefficients."""
    result = {}
    for subset in itertools.product((0, 1), repeat=count):
        support = [k for k in range(count) if subset[k]]
        total = 0.0
        for r in range(len(support) + 1):
            for inner in itertools.combinations(support, r):
                state = tuple(1 if k in inner else 0 for k in range(count))
                total += (-1) ** (len(support) - r) * values[state]
        result[subset] = total
    return result


def second_order_shifts(expansion: PotentialExpansion, levels: int = 0) -> Dict[Tuple[int, ...], float]:
    """
    Second-order energy shifts (angular GHz) of every state in {0,1}^M from the
    off-diagonal anharmonic terms, using harmonic energies as denominators.
    """
    omegas = expansion.omegas
    zpf = expansion.zero_point_fluxes
    count = len(omegas)
    dim = levels or expansion.order + 2

    ladder = np.diag(np.sqrt(np.arange(1, dim)), 1)
    x = ladder + ladder.T
    powers = [np.eye(dim)]
    for _ in range(expansion.order):
        powers.append(powers[-1] @ x)

    terms = [(e, c) for e, c in expansion.coefficients.items() if sum(e) >= 3]
    harmonic = reduce(np.add.outer, [w * np.arange(dim) for w in omegas]).ravel()

    shifts = {}
    for state in itertools.product((0, 1), repeat=count):
        vector = np.zeros(dim ** count)
        for exponent, coefficient in terms:
            columns = [
                zpf[k] ** p * powers[p][:, state[k]] for k, p in enumerate(exponent)
            ]
            vector += coefficient * reduce(np.multiply.outer, columns).ravel()
        flat = np.ravel_multi_index(state, (dim,) * count)
        gaps = harmonic[flat] - harmonic
        mask = np.abs(gaps) > 1e-6 * omegas.max()
        mask[flat] = False
        resonant = (~mask) & (np.abs(vector) > 1e-9 * omegas.max())
        resonant[flat] = False
        if np.any(resonant):
            logger.warning(f"Skipping {int(resonant.sum())} resonant couplings of state {state}")
        shifts[state] = float(np.sum(vector[mask] ** 2 / gaps[mask]))
    return shifts


def extract_kerr(
    expansion: PotentialExpansion,
    modes: ModeSolution,
    second_order: bool = False,
) -> KerrTensor:
    """
    Quantize, keep energy-conserving terms and read off the Kerr coefficients.

    Higher powers of a single occupation number are folded into the linear
    coefficient, and mixed powers into the pair or triple couplings, so that the
    result is exact on occupations 0 and 1.

    Args:
        expansion: potential expansion of order >= 4
        modes: the modes the expansion was built on
        second_order: add second-order shifts of the off-diagonal terms
    """
    count = modes.count
    polynomial = number_polynomial(expansion)

    linear = np.zeros(count)
    self_kerr = np.zeros(count)
    cross = np.zeros((count, count))
    triple = np.zeros((count, count, count))
    for powers, value in polynomial.items():
        support = tuple(k for k in range(count) if powers[k])
        if not support:
            continue
        if len(support) == 1:
            (k,) = support
            if powers[k] == 2:
                self_kerr[k] -= value
            else:
                linear[k] += value
        elif len(support) == 2:
            a, b = support
            cross[a, b] -= value / 2.0
        elif len(support) == 3:
            a, b, c = support
            triple[a, b, c] += value
        elif abs(value) > 1e-9:
            logger.debug(f"Dropping {len(support)}-body term {powers}: {value:.3e}")

    if second_order:
        shifts = _subset_energies(second_order_shifts(expansion), count)
        for subset, value in shifts.items():
            support = tuple(k for k in range(count) if subset[k])
            if len(support) == 1:
                linear[support[0]] += value
            elif len(support) == 2:
                cross[support] -= value / 2.0
            elif len(support) == 3:
                triple[support] += value

    cross = cross + cross.T
    for a, b, c in itertools.combinations(range(count), 3):
        value = triple[a, b, c]
        for perm in itertools.permutations((a, b, c)):
            triple[perm] = value

    self_kerr = self_kerr / TWO_PI
    cross = cross / TWO_PI
    beta = self_kerr + cross.sum(axis=1)
    shift = linear / TWO_PI + beta

    zpf = expansion.zero_point_fluxes
    three_wave = {}
    for exponent, coefficient in expansion.terms(3).items():
        indices = tuple(sorted(k for k in range(count) for _ in range(exponent[k])))
        three_wave[indices] = coefficient * np.prod(np.power(zpf, exponent)) / TWO_PI

    frequencies = modes.frequencies
    warnings: List[str] = []
    for k in range(count):
        ratio = self_kerr[k] / frequencies[k]
        if ratio > solver_settings.kerr_ratio_warn:
            message = (
                f"Self-Kerr of mode {modes.labels[k]} is {100 * ratio:.1f}% of its frequency; "
                f"weak-anharmonicity expansion is unreliable"
            )
            logger.warning(message)
            warnings.append(message)

    tensor = KerrTensor(
        labels=modes.labels,
        frequencies=frequencies,
        self_kerr=self_kerr,
        cross_kerr=cross,
        three_body=triple / TWO_PI,
        three_wave=three_wave,
        beta=beta,
        frequency_shift=shift,
        order=expansion.order,
        second_order=second_order,
        warnings=tuple(warnings),
    )
    logger.info(
        "Kerr: " + ", ".join(
            f"J_{l}={1e3 * j:.2f} MHz" for l, j in zip(tensor.labels, tensor.self_kerr)
        )
    )
    return tensor
