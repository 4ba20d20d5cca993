"""Virtual phase frames of the conditional transitions."""

from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from multimon.compiler.gates import TWO_PI, NativeGate, index_state, state_index
from multimon.labels import all_transitions, transition_states


@dataclass(frozen=True)
class FrameTracker:
    """
    Accumulated logical phases of the basis states that were never played.

    A transition's drive phase offset is the phase of its lower state minus that
    of its upper state, modulo 2 pi; all offsets start at zero.
    """

    state_phases: Tuple[float, ...]

    @classmethod
    def zero(cls, count: int = 3) -> "FrameTracker":
        return cls(state_phases=(0.0,) * 2 ** count)

    @property
    def count(self) -> int:
        return len(self.state_phases).bit_length() - 1

    def with_state_phase(self, state: Sequence[int], theta: float) -> "FrameTracker":
        phases = list(self.state_phases)
        index = state_index(state)
        phases[index] = (phases[index] + theta) % TWO_PI
        return FrameTracker(state_phases=tuple(phases))

    def offset(self, label: str) -> float:
        lower, upper = transition_states(label, self.count)
        return (self.state_phases[state_index(lower)] - self.state_phases[state_index(upper)]) % TWO_PI

    def gate_offset(self, gate: NativeGate) -> float:
        low, high = gate.levels()
        return (self.state_phases[low] - self.state_phases[high]) % TWO_PI

    @property
    def phase_offsets(self) -> Dict[str, float]:
        return {label: self.offset(label) for label in all_transitions(self.count)}

    def diagonal(self) -> np.ndarray:
        return np.diag(np.exp(1j * np.asarray(self.state_phases)))

    def nonzero_offsets(self, tolerance: float = 1e-12) -> Dict[str, float]:
        """Offsets away from zero, mapped into (-pi, pi]."""
        result = {}
        for label, value in self.phase_offsets.items():
            wrapped = value - TWO_PI if value > np.pi else value
            if abs(wrapped) > tolerance:
                result[label] = wrapped
        return result

    def describe(self) -> Dict[str, float]:
        return {
            "".join(str(b) for b in index_state(k, self.count)): phase
            for k, phase in enumerate(self.state_phases)
            if phase
        }
