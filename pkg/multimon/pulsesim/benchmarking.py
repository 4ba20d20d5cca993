"""Randomized benchmarking of one conditional transition."""

import logging
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import curve_fit

from multimon.compiler.gates import ccr_matrix
from multimon.errors import DomainError, FitError
from multimon.labels import parse_transition, transition_states
from multimon.pulsesim.evolve import (
    DensityMatrix,
    PulseSchedule,
    Segment,
    SimulationConfig,
    Tone,
    evolve,
    pi_amplitude,
)
from multimon.pulsesim.system import PropagatorCache, TrimonSystem

logger = logging.getLogger(__name__)

# (theta, phi) of the native pulses; a negative rotation is the positive one shifted by pi in phase.
GENERATORS: Dict[str, Tuple[float, float]] = {
    "X/2": (np.pi / 2, -np.pi / 2),
    "-X/2": (np.pi / 2, np.pi / 2),
    "Y/2": (np.pi / 2, 0.0),
    "-Y/2": (np.pi / 2, np.pi),
    "X": (np.pi, -np.pi / 2),
    "Y": (np.pi, 0.0),
}

Word = Tuple[str, ...]


def _phase_key(matrix: np.ndarray) -> Tuple[float, ...]:
    flat = matrix.ravel()
    pivot = flat[np.argmax(np.abs(flat) > 1e-6)]
    normalized = flat * abs(pivot) / pivot
    return tuple(np.round(np.concatenate([normalized.real, normalized.imag]), 6) + 0.0)


def word_unitary(word: Word) -> np.ndarray:
    unitary = np.eye(2, dtype=complex)
    for name in word:
        theta, phi = GENERATORS[name]
        unitary = ccr_matrix(phi, theta) @ unitary
    return unitary


def clifford_words() -> List[Word]:
    """Shortest native word for each of the 24 single-qubit Cliffords, found breadth first."""
    found: Dict[Tuple[float, ...], Word] = {_phase_key(np.eye(2)): ()}
    queue = deque([()])
    while queue and len(found) < 24:
        word = queue.popleft()
        for name in GENERATORS:
            extended = word + (name,)
            key = _phase_key(word_unitary(extended))
            if key not in found:
                found[key] = extended
                queue.append(extended)
    if len(found) != 24:
        raise RuntimeError(f"Clifford search found {len(found)} elements")
    return sorted(found.values(), key=lambda w: (len(w), w))


CLIFFORDS: List[Word] = clifford_words()
_CLIFFORD_INDEX = {_phase_key(word_unitary(w)): k for k, w in enumerate(CLIFFORDS)}


def inverse_word(words: Sequence[Word]) -> Word:
    """The Clifford that undoes a sequence of Cliffords."""
    total = np.eye(2, dtype=complex)
    for word in words:
        total = word_unitary(word) @ total
    return CLIFFORDS[_CLIFFORD_INDEX[_phase_key(total.conj().T)]]


def random_sequence(length: int, rng: np.random.Generator) -> List[Word]:
    words = [CLIFFORDS[k] for k in rng.integers(0, len(CLIFFORDS), size=length)]
    return words + [inverse_word(words)]


@dataclass(frozen=True, eq=False)
class BenchmarkResult:
    transition: str
    lengths: np.ndarray
    survival: np.ndarray
    survival_std: np.ndarray
    decay: float
    decay_sigma: float
    amplitude: float
    offset: float

    @property
    def error_per_clifford(self) -> float:
        return (1.0 - self.decay) / 2.0

    @property
    def fidelity(self) -> float:
        return 1.0 - self.error_per_clifford

    @property
    def fidelity_sigma(self) -> float:
        return self.decay_sigma / 2.0

    def to_document(self) -> dict:
        return {
            "transition": self.transition,
            "lengths": self.lengths.tolist(),
            "survival": self.survival.tolist(),
            "survival_std": self.survival_std.tolist(),
            "decay": self.decay,
            "decay_sigma": self.decay_sigma,
            "fidelity": self.fidelity,
            "fidelity_sigma": self.fidelity_sigma,
        }


def decay_model(m, amplitude, decay, offset):
    return amplitude * decay ** m + offset


def fit_decay(lengths: np.ndarray, survival: np.ndarray) -> Tuple[float, float, float, float]:
    """
    Fit A p^m + B. Returns (A, p, B, sigma_p).

    Raises:
        FitError: the fit does not converge or the data do not decay
    """
    diagnostics = {"lengths": lengths.tolist(), "survival": survival.tolist()}
    if np.all(survival > 1.0 - 1e-9):
        return 0.0, 1.0, 1.0, 0.0
    try:
        params, covariance = curve_fit(
            decay_model,
            lengths,
            survival,
            p0=(0.5, 0.99, 0.5),
            bounds=([-1.0, 0.0, -1.0], [2.0, 1.0, 2.0]),
            maxfev=20000,
        )
    except (RuntimeError, ValueError) as e:
        raise FitError(f"Benchmark fit failed: {e}", diagnostics=diagnostics)
    amplitude, decay, offset = (float(v) for v in params)
    sigma = float(np.sqrt(abs(covariance[1, 1]))) if np.all(np.isfinite(covariance)) else float("inf")
    if amplitude <= 0 or not 0.0 < decay <= 1.0 or not np.isfinite(sigma):
        diagnostics.update(amplitude=amplitude, decay=decay, offset=offset)
        raise FitError("Survival data do not show a decay", diagnostics=diagnostics)
    return amplitude, decay, offset, sigma


def _schedule(word_list: Sequence[Word], carrier: float, amplitude: float, pi_length_ns: float, weights) -> PulseSchedule:
    segments = []
    for word in word_list:
        for name in word:
            theta, phi = GENERATORS[name]
            tone = Tone(carrier_ghz=carrier, amplitude=amplitude, phase=phi, weights=tuple(weights))
            segments.append(Segment(duration_ns=pi_length_ns * theta / np.pi, tones=(tone,), label=name))
    return PulseSchedule(tuple(segments))


def randomized_benchmark(
    system: TrimonSystem,
    transition: str,
    lengths: Sequence[int],
    trials: int,
    config: SimulationConfig,
    pi_length_ns: float = 200.0,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> BenchmarkResult:
    """
    Clifford benchmarking on the two eigenstates joined by ``transition``.

    Every sequence starts in the lower state; survival is its population after
    m random Cliffords and the recovery Clifford.

    Raises:
        DomainError: fewer than two lengths, a non-positive length or no trials
        FitError: non-decaying or unfittable survival data
    """
    lengths = sorted({int(m) for m in lengths})
    if len(lengths) < 2 or lengths[0] < 1 or trials < 1:
        raise DomainError("Benchmarking needs at least two positive sequence lengths and one trial")

    target, _ = parse_transition(transition, system.count)
    lower, _ = transition_states(transition, system.count)
    weights = config.weights_for(target, system.count)
    carrier = system.transition_frequency(transition)
    amplitude = pi_amplitude(pi_length_ns, weights[target])

    cache = PropagatorCache(system, config.gammas(system.count))
    for theta, _ in set(GENERATORS.values()):
        cache.get(carrier, amplitude, pi_length_ns * theta / np.pi, weights)

    rng = np.random.default_rng(seed if seed is not None else config.seed)
    sequences = [[random_sequence(m, rng) for _ in range(trials)] for m in lengths]
    initial = DensityMatrix.basis(lower, system.levels)
    survivor = system.index(lower)

    def survive(word_list: List[Word]) -> float:
        schedule = _schedule(word_list, carrier, amplitude, pi_length_ns, weights)
        final = evolve(initial, schedule, system, config, cache)
        return float(final.populations()[survivor])

    def run_length(batch: List[List[Word]]) -> List[float]:
        return [survive(word_list) for word_list in batch]

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_length, sequences))
    else:
        results = [run_length(batch) for batch in sequences]

    survival = np.array([np.mean(r) for r in results])
    spread = np.array([np.std(r) for r in results])
    amplitude_fit, decay, offset, sigma = fit_decay(np.array(lengths, dtype=float), survival)
    result = BenchmarkResult(
        transition=transition,
        lengths=np.array(lengths),
        survival=survival,
        survival_std=spread,
        decay=decay,
        decay_sigma=sigma,
        amplitude=amplitude_fit,
        offset=offset,
    )
    logger.info(
        f"Benchmark {transition}: p = {decay:.5f} +/- {sigma:.1e}, "
        f"F = {result.fidelity:.5f} +/- {result.fidelity_sigma:.1e}"
    )
    return result
