"""
Native conditional rotations.

Basis states are bit tuples in qubit-letter order; the matrix index of a state
reads the bits as a binary number with qubit A most significant.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from multimon.errors import DomainError
from multimon.labels import parse_transition, transition_label, transition_states

TWO_PI = 2.0 * np.pi


def state_index(state: Sequence[int]) -> int:
    index = 0
    for bit in state:
        index = 2 * index + int(bit)
    return index


def index_state(index: int, count: int) -> Tuple[int, ...]:
    return tuple((index >> (count - 1 - k)) & 1 for k in range(count))


def ccr_matrix(phi: float, theta: float) -> np.ndarray:
    """Rotation by theta about the equatorial axis at angle phi, on (lower, upper)."""
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([
        [c, -np.exp(-1j * phi) * s],
        [np.exp(1j * phi) * s, c],
    ])


@dataclass(frozen=True)
class NativeGate:
    """
    Rotation on the target's 0->1 transition with every other qubit fixed.

    ``state`` is the lower basis state of the addressed transition (target bit 0).
    """

    target: int
    state: Tuple[int, ...]
    theta: float
    phi: float = 0.0
    duration_hint: Optional[float] = None

    def __post_init__(self):
        count = len(self.state)
        if not 0 <= self.target < count:
            raise DomainError(f"Target {self.target} outside 0..{count - 1}")
        if self.state[self.target] != 0:
            raise DomainError("Lower state of a native gate must have the target bit at 0")
        object.__setattr__(self, "state", tuple(int(b) for b in self.state))
        object.__setattr__(self, "theta", float(self.theta) % TWO_PI)

    @classmethod
    def from_label(cls, label: str, theta: float, phi: float = 0.0, count: int = 3, duration_hint=None) -> "NativeGate":
        target, _ = parse_transition(label, count)
        lower, _ = transition_states(label, count)
        return cls(target=target, state=lower, theta=theta, phi=phi, duration_hint=duration_hint)

    @property
    def count(self) -> int:
        return len(self.state)

    @property
    def label(self) -> str:
        return transition_label(self.target, self.state)

    @property
    def lower(self) -> Tuple[int, ...]:
        return self.state

    @property
    def upper(self) -> Tuple[int, ...]:
        upper = list(self.state)
        upper[self.target] = 1
        return tuple(upper)

    def levels(self) -> Tuple[int, int]:
        return state_index(self.lower), state_index(self.upper)

    def unitary(self, phi_offset: float = 0.0) -> np.ndarray:
        """Full 2^N matrix with the effective phase phi + phi_offset."""
        matrix = np.eye(2 ** self.count, dtype=complex)
        low, high = self.levels()
        block = ccr_matrix(self.phi + phi_offset, self.theta)
        matrix[np.ix_([low, high], [low, high])] = block
        return matrix


@dataclass(frozen=True)
class FrameUpdate:
    """Logical phase theta on one basis state, applied to the frame only."""

    state: Tuple[int, ...]
    theta: float


@dataclass(frozen=True)
class ParallelGroup:
    """
    Native gates played simultaneously. Members must not share an energy level.
    """

    gates: Tuple[NativeGate, ...]

    def __post_init__(self):
        seen = set()
        for gate in self.gates:
            levels = set(gate.levels())
            if seen & levels:
                raise DomainError(
                    f"Parallel pulses share an energy level at {gate.label}; they cannot be played together"
                )
            seen |= levels
