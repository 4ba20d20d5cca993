"""
Lindblad evolution of the driven multimon under square pulses.

States are kept in the interaction frame of the undriven Hamiltonian. A
single-tone segment is propagated exactly in the frame of its carrier; segments
with several simultaneous tones, or every segment with ``integrator="rk4"``,
use fixed-step Runge-Kutta in the interaction frame.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from multimon.compiler.standard import GateSequence
from multimon.config.settings import solver_settings
from multimon.errors import ConfigurationError
from multimon.pulsesim.system import TWO_PI, PropagatorCache, TrimonSystem

logger = logging.getLogger(__name__)


class SimulationConfig(BaseModel):
    """Truncation, relaxation and drive model of a simulation run."""

    model_config = ConfigDict(frozen=True)

    levels_per_mode: int = Field(3, description="Fock levels kept per mode; 3 or more captures leakage")
    t1_us: Optional[List[Optional[float]]] = Field(
        None, description="Relaxation time per mode in microseconds; null means no decay"
    )
    ideal_drive: bool = Field(True, description="Drive only the addressed mode")
    drive_weights: Optional[List[float]] = Field(
        None, description="Relative drive amplitude per mode when ideal_drive is off"
    )
    integrator: str = Field("expm", description="expm (exact per segment) or rk4")
    step_ns: float = Field(default_factory=lambda: solver_settings.integrator_step_ns, gt=0.0)
    seed: Optional[int] = Field(None, description="Random seed for sampled readout and benchmarking")
    readout_noise: Optional[float] = Field(None, gt=0.0, description="Gaussian readout noise; exact projections when null")
    readout_shots: int = Field(2000, gt=0)
    readout_chi_mhz: Optional[Dict[str, float]] = Field(None, description="Dispersive shift per basis state")
    readout_detuning_mhz: float = Field(0.0, description="Readout drive detuning from the bare cavity")

    @field_validator("levels_per_mode")
    @classmethod
    def _check_levels(cls, value: int) -> int:
        if value < 2:
            raise ValueError("levels_per_mode must be at least 2")
        if value == 2:
            logger.warning("Two levels per mode cannot represent leakage out of the qubit subspace")
        return value

    @field_validator("integrator")
    @classmethod
    def _check_integrator(cls, value: str) -> str:
        if value not in ("expm", "rk4"):
            raise ValueError(f"integrator must be expm or rk4, got {value}")
        return value

    def gammas(self, count: int) -> List[float]:
        """Decay rates per mode in 1/ns."""
        if not self.t1_us:
            return [0.0] * count
        if len(self.t1_us) != count:
            raise ConfigurationError(f"t1_us has {len(self.t1_us)} entries, expected {count}")
        return [1.0 / (t1 * 1e3) if t1 else 0.0 for t1 in self.t1_us]

    def weights_for(self, target: int, count: int) -> np.ndarray:
        if self.ideal_drive:
            weights = np.zeros(count)
            weights[target] = 1.0
            return weights
        if not self.drive_weights or len(self.drive_weights) != count:
            raise ConfigurationError("drive_weights with one entry per mode are required when ideal_drive is off")
        return np.asarray(self.drive_weights, dtype=float)

    def without_decay(self) -> "SimulationConfig":
        return self.model_copy(update={"t1_us": None})


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    State over ``levels ** count`` occupation states in the interaction frame,
    at absolute time ``time_ns``.
    """

    matrix: np.ndarray
    levels: int
    count: int
    time_ns: float = 0.0

    @classmethod
    def basis(cls, state: Sequence[int], levels: int = 3) -> "DensityMatrix":
        count = len(state)
        dim = levels ** count
        matrix = np.zeros((dim, dim), dtype=complex)
        index = int(np.ravel_multi_index(tuple(state), (levels,) * count))
        matrix[index, index] = 1.0
        return cls(matrix=matrix, levels=levels, count=count)

    @classmethod
    def from_ket(cls, ket: np.ndarray, levels: int = 2, count: int = 3) -> "DensityMatrix":
        ket = np.asarray(ket, dtype=complex)
        ket = ket / np.linalg.norm(ket)
        return cls(matrix=np.outer(ket, ket.conj()), levels=levels, count=count)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def computational_indices(self) -> List[int]:
        grid = np.indices((2,) * self.count).reshape(self.count, -1).T
        return [int(np.ravel_multi_index(tuple(state), (self.levels,) * self.count)) for state in grid]

    def computational_block(self) -> np.ndarray:
        """Qubit-subspace block (2^N x 2^N), not renormalized."""
        indices = self.computational_indices()
        return self.matrix[np.ix_(indices, indices)]

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.matrix))

    def leakage(self) -> float:
        return float(1.0 - np.sum(self.populations()[self.computational_indices()]))

    def check(self) -> List[str]:
        """Invariant violations: Hermiticity, unit trace, positivity."""
        problems = []
        if np.max(np.abs(self.matrix - self.matrix.conj().T)) > 1e-10:
            problems.append("not Hermitian")
        if abs(np.trace(self.matrix) - 1.0) > 1e-8:
            problems.append(f"trace {np.trace(self.matrix).real:.10f}")
        if np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T)).min() < -1e-8:
            problems.append("negative eigenvalue")
        return problems


@dataclass(frozen=True)
class Tone:
    """One carrier of a square pulse; amplitude is the Rabi rate scale in rad/ns."""

    carrier_ghz: float
    amplitude: float
    phase: float = 0.0
    weights: Tuple[float, ...] = ()


@dataclass(frozen=True)
class Segment:
    duration_ns: float
    tones: Tuple[Tone, ...] = ()
    label: str = ""


@dataclass(frozen=True)
class PulseSchedule:
    segments: Tuple[Segment, ...] = field(default_factory=tuple)

    def __post_init__(self):
        for segment in self.segments:
            if not segment.duration_ns > 0:
                raise ConfigurationError(f"Segment {segment.label or '?'} has non-positive duration")
            for tone in segment.tones:
                if not np.isfinite(tone.amplitude) or not np.isfinite(tone.carrier_ghz):
                    raise ConfigurationError(f"Segment {segment.label or '?'} has a non-finite tone")

    @property
    def duration_ns(self) -> float:
        return float(sum(s.duration_ns for s in self.segments))

    def then(self, other: "PulseSchedule") -> "PulseSchedule":
        return PulseSchedule(self.segments + other.segments)


def pi_amplitude(pi_length_ns: float, weight: float = 1.0) -> float:
    """Square-pulse amplitude giving a pi rotation in ``pi_length_ns`` on a 0-1 line."""
    return np.pi / (2.0 * weight * pi_length_ns)


def schedule_from_sequence(
    sequence: GateSequence,
    system: TrimonSystem,
    pi_length_ns: float,
    config: SimulationConfig,
) -> PulseSchedule:
    """
    Square pulses for a compiled sequence: every pulse at its transition
    frequency and effective frame phase, lasting pi_length * theta / pi. Gates of
    one parallel group become one multi-tone segment.
    """
    segments = []
    played = sequence.played()
    steps = sorted({step for step, _, _ in played})
    for step in steps:
        members = [(gate, phi) for s, gate, phi in played if s == step]
        tones = []
        for gate, phi in members:
            weights = config.weights_for(gate.target, system.count)
            amplitude = pi_amplitude(pi_length_ns, weights[gate.target])
            tones.append(Tone(
                carrier_ghz=system.transition_frequency(gate.label),
                amplitude=amplitude,
                phase=phi,
                weights=tuple(weights),
            ))
        durations = {round(pi_length_ns * gate.theta / np.pi, 9) for gate, _ in members}
        label = "+".join(gate.label for gate, _ in members)
        if len(durations) == 1:
            segments.append(Segment(duration_ns=durations.pop(), tones=tuple(tones), label=label))
        else:
            for (gate, _), tone in zip(members, tones):
                segments.append(Segment(pi_length_ns * gate.theta / np.pi, (tone,), gate.label))
    return PulseSchedule(tuple(segments))


def _check_step(schedule: PulseSchedule, levels: int, step_ns: float) -> None:
    rates = [
        2.0 * abs(tone.amplitude) * max(np.abs(tone.weights), default=1.0) * np.sqrt(levels - 1)
        for segment in schedule.segments
        for tone in segment.tones
    ]
    rates = [r for r in rates if r > 0]
    if rates:
        period = TWO_PI / max(rates)
        if step_ns > period / 2:
            raise ConfigurationError(
                f"Integrator step {step_ns} ns exceeds half the shortest Rabi period ({period / 2:.3g} ns)"
            )


def _propagate_exact(
    rho: np.ndarray,
    segment: Segment,
    start_ns: float,
    system: TrimonSystem,
    cache: PropagatorCache,
) -> np.ndarray:
    tone = segment.tones[0] if segment.tones else Tone(carrier_ghz=0.0, amplitude=0.0)
    weights = tone.weights or (0.0,) * system.count
    to_carrier = system.frame_phases(tone.carrier_ghz, start_ns)
    from_carrier = system.frame_phases(tone.carrier_ghz, start_ns + segment.duration_ns).conj()
    rotation = system.number_phases(tone.phase)

    state = rho * to_carrier * rotation
    propagator = cache.get(tone.carrier_ghz, tone.amplitude, segment.duration_ns, weights)
    state = (propagator @ state.ravel()).reshape(rho.shape)
    return state * rotation.conj() * from_carrier


def _lindblad_rhs(
    rho: np.ndarray,
    t: float,
    system: TrimonSystem,
    drives: Sequence[Tuple[complex, float, np.ndarray]],
    jumps: Sequence[Tuple[float, np.ndarray, np.ndarray]],
) -> np.ndarray:
    angular = TWO_PI * system.energies
    phase = np.exp(1j * angular * t)
    frame = np.outer(phase, phase.conj())
    hamiltonian = np.zeros_like(rho)
    for epsilon, omega, raising in drives:
        term = epsilon * np.exp(-1j * omega * t) * raising
        hamiltonian += term + term.conj().T
    hamiltonian = hamiltonian * frame
    result = -1j * (hamiltonian @ rho - rho @ hamiltonian)
    for gamma, lowering, number in jumps:
        jump = lowering * frame
        result += gamma * (jump @ rho @ jump.conj().T - 0.5 * (number @ rho + rho @ number))
    return result


def _propagate_rk4(
    rho: np.ndarray,
    segment: Segment,
    start_ns: float,
    system: TrimonSystem,
    gammas: Sequence[float],
    step_ns: float,
) -> np.ndarray:
    drives = []
    for tone in segment.tones:
        weights = tone.weights or (0.0,) * system.count
        epsilon = 1j * tone.amplitude * np.exp(1j * tone.phase)
        drives.append((epsilon, TWO_PI * tone.carrier_ghz, system.raising(weights)))
    jumps = [(g, a, a.conj().T @ a) for g, a in zip(gammas, system.lowering) if g]

    steps = max(1, int(np.ceil(segment.duration_ns / step_ns - 1e-9)))
    h = segment.duration_ns / steps
    t = start_ns
    for _ in range(steps):
        k1 = _lindblad_rhs(rho, t, system, drives, jumps)
        k2 = _lindblad_rhs(rho + 0.5 * h * k1, t + 0.5 * h, system, drives, jumps)
        k3 = _lindblad_rhs(rho + 0.5 * h * k2, t + 0.5 * h, system, drives, jumps)
        k4 = _lindblad_rhs(rho + h * k3, t + h, system, drives, jumps)
        rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        rho = 0.5 * (rho + rho.conj().T)
        rho = rho / np.trace(rho).real
        t += h
    return rho


def evolve(
    initial: DensityMatrix,
    schedule: PulseSchedule,
    system: TrimonSystem,
    config: SimulationConfig,
    cache: Optional[PropagatorCache] = None,
) -> DensityMatrix:
    """
    Evolve a state through every segment of a schedule.

    Raises:
        ConfigurationError: truncation mismatch, or the rk4 step exceeds half the shortest Rabi period
    """
    if initial.levels != system.levels or initial.count != system.count:
        raise ConfigurationError(
            f"State has {initial.levels} levels over {initial.count} modes, system {system.levels} over {system.count}"
        )
    _check_step(schedule, system.levels, config.step_ns)
    gammas = config.gammas(system.count)
    if cache is None or cache.gammas != tuple(gammas):
        cache = PropagatorCache(system, gammas)

    rho = initial.matrix.astype(complex)
    time = initial.time_ns
    for segment in schedule.segments:
        if config.integrator == "expm" and len(segment.tones) <= 1:
            rho = _propagate_exact(rho, segment, time, system, cache)
        else:
            rho = _propagate_rk4(rho, segment, time, system, gammas, config.step_ns)
        time += segment.duration_ns
        logger.debug(f"Segment {segment.label or 'idle'} done at {time:.1f} ns")

    result = replace(initial, matrix=rho, time_ns=time)
    problems = result.check()
    if problems:
        logger.warning(f"State after {time:.1f} ns: {', '.join(problems)}")
    return result
