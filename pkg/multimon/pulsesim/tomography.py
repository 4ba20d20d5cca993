"""
Three-qubit state tomography with joint 000/111 readout.

Each of the 27 settings applies I, X/2 or Y/2 to every qubit. Because the
joint readout only resolves 000 and 111, every setting is measured in four
rounds; rounds two to four add conditional swaps that bring another pair of
basis states onto 000 and 111.
"""

import itertools
import logging
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np

from multimon.compiler.frames import FrameTracker
from multimon.compiler.standard import GateSequence, ccnot, rotation, sequence_unitary
from multimon.cqed.readout import sample_extreme_populations
from multimon.errors import ConfigurationError, DomainError
from multimon.labels import basis_label, parse_transition
from multimon.pulsesim.evolve import DensityMatrix, SimulationConfig, evolve, schedule_from_sequence
from multimon.pulsesim.mle import ProjectionSet
from multimon.pulsesim.system import PropagatorCache, TrimonSystem

logger = logging.getLogger(__name__)

PRE_ROTATIONS = {"I": None, "X": (np.pi / 2, -np.pi / 2), "Y": (np.pi / 2, 0.0)}
READOUT_ROUNDS = ((), ("CA0B0", "CA1B1"), ("BC0A0", "BC1A1"), ("AB0C0", "AB1C1"))
READOUT_STATES = ("000", "111")


def tomography_settings(count: int = 3) -> List[str]:
    return ["".join(choice) for choice in itertools.product("IXY", repeat=count)]


def setting_sequence(setting: str, count: int = 3) -> GateSequence:
    """Pre-rotations of one setting, qubit A first."""
    sequence = GateSequence(count=count)
    for qubit, choice in enumerate(setting):
        if choice not in PRE_ROTATIONS:
            raise DomainError(f"Unknown pre-rotation {choice!r} in setting {setting}")
        if PRE_ROTATIONS[choice] is not None:
            theta, phi = PRE_ROTATIONS[choice]
            sequence = sequence.then(rotation(qubit, theta, phi, count))
    return sequence


def round_sequence(round_index: int, count: int = 3) -> GateSequence:
    """Swaps added by one readout round, played one after the other."""
    sequence = GateSequence(count=count)
    for label in READOUT_ROUNDS[round_index]:
        target, controls = parse_transition(label, count)
        sequence = sequence.then(ccnot(target, controls, count))
    return sequence


def measurement_sequence(setting: str, round_index: int, count: int = 3) -> GateSequence:
    sequence = setting_sequence(setting, count)
    for index in range(1, round_index + 1):
        sequence = sequence.then(round_sequence(index, count))
    return sequence


@lru_cache(maxsize=4)
def _measurement_unitaries(count: int) -> Tuple[Tuple[str, int, np.ndarray], ...]:
    return tuple(
        (setting, round_index, sequence_unitary(measurement_sequence(setting, round_index, count)))
        for setting in tomography_settings(count)
        for round_index in range(len(READOUT_ROUNDS))
    )


def _require_three(count: int) -> None:
    if count != 3:
        raise DomainError(f"Joint-readout tomography is defined for three qubits, got {count}")


def projection_set(count: int = 3) -> ProjectionSet:
    """All 216 projectors U^dagger |b><b| U with zero measured values."""
    _require_three(count)
    dim = 2 ** count
    operators, keys = [], []
    for setting, round_index, unitary in _measurement_unitaries(count):
        for outcome in READOUT_STATES:
            row = unitary[int(outcome, 2)]
            operators.append(np.outer(row.conj(), row))
            keys.append(f"{setting}/{round_index + 1}/{outcome}")
    return ProjectionSet(
        operators=np.array(operators).reshape(-1, dim, dim),
        values=np.zeros(len(operators)),
        settings_count=len(tomography_settings(count)),
        keys=tuple(keys),
    )


def logical_state(state: DensityMatrix, frame: FrameTracker, normalize: bool = True) -> np.ndarray:
    """Qubit block of a simulated state with the tracked frame phases applied."""
    block = state.computational_block()
    diagonal = frame.diagonal()
    rho = diagonal @ block @ diagonal.conj().T
    if normalize:
        trace = np.trace(rho).real
        if trace <= 0:
            raise ConfigurationError("No population left in the qubit subspace")
        rho = rho / trace
    return rho


def ideal_projections(rho: np.ndarray, count: int = 3) -> ProjectionSet:
    """Exact projection values of a logical state."""
    projections = projection_set(count)
    values = np.real(np.einsum("kij,ji->k", projections.operators, rho))
    return projections.with_values(values)


def _outcome_values(
    populations: Dict[str, float],
    config: SimulationConfig,
    rng: Optional[np.random.Generator],
) -> Tuple[float, float]:
    if config.readout_noise is None:
        return populations.get(READOUT_STATES[0], 0.0), populations.get(READOUT_STATES[1], 0.0)
    if not config.readout_chi_mhz:
        raise ConfigurationError("Sampled readout needs readout_chi_mhz for every excited basis state")
    return sample_extreme_populations(
        populations,
        config.readout_chi_mhz,
        config.readout_detuning_mhz,
        config.readout_noise,
        config.readout_shots,
        rng if rng is not None else np.random.default_rng(config.seed),
    )


def _logical_populations(rho: np.ndarray, unitary: np.ndarray) -> Dict[str, float]:
    diagonal = np.real(np.diag(unitary @ rho @ unitary.conj().T))
    return {format(k, "03b"): float(p) for k, p in enumerate(diagonal)}


def _physical_populations(state: DensityMatrix) -> Dict[str, float]:
    populations = state.populations()
    result = {}
    for index in state.computational_indices():
        occupation = np.unravel_index(index, (state.levels,) * state.count)
        result[basis_label(occupation)] = float(populations[index])
    return result


def collect_projections(
    prepared: DensityMatrix,
    frame: FrameTracker,
    system: TrimonSystem,
    config: SimulationConfig,
    pi_length_ns: float,
    simulate: bool = True,
    cache: Optional[PropagatorCache] = None,
    rng: Optional[np.random.Generator] = None,
) -> ProjectionSet:
    """
    Measured projection values of a prepared state.

    With ``simulate`` off the measurement is ideal and acts on the logical
    state. Otherwise every setting and round is played as pulses under
    ``config``, continuing the frame of the preparation; pre-rotation prefixes
    shared between settings are evolved once.
    """
    _require_three(prepared.count)
    projections = projection_set(prepared.count)
    if rng is None and config.readout_noise is not None:
        rng = np.random.default_rng(config.seed)

    values = []
    if not simulate:
        rho = logical_state(prepared, frame)
        for _, _, unitary in _measurement_unitaries(prepared.count):
            values.extend(_outcome_values(_logical_populations(rho, unitary), config, rng))
        return projections.with_values(values)

    cache = cache or PropagatorCache(system, config.gammas(system.count))
    prefixes: Dict[str, Tuple[DensityMatrix, FrameTracker]] = {"": (prepared, frame)}

    def advance(state, current, sequence):
        placed = GateSequence(count=sequence.count, items=sequence.items, initial_frame=current)
        schedule = schedule_from_sequence(placed, system, pi_length_ns, config)
        return evolve(state, schedule, system, config, cache), placed.final_frame()

    for setting in tomography_settings(prepared.count):
        for depth in range(1, len(setting) + 1):
            prefix = setting[:depth]
            if prefix not in prefixes:
                state, current = prefixes[setting[:depth - 1]]
                step = setting_sequence("I" * (depth - 1) + prefix[-1] + "I" * (len(setting) - depth), prepared.count)
                prefixes[prefix] = advance(state, current, step)
        state, current = prefixes[setting]
        for round_index in range(len(READOUT_ROUNDS)):
            if round_index:
                state, current = advance(state, current, round_sequence(round_index, prepared.count))
            values.extend(_outcome_values(_physical_populations(state), config, rng))
        logger.debug(f"Setting {setting} measured, cache hits {cache.hits} misses {cache.misses}")
    return projections.with_values(values)
