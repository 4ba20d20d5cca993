"""Standard gates compiled into conditional rotations and frame updates."""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from multimon.compiler.frames import FrameTracker
from multimon.compiler.gates import FrameUpdate, NativeGate, ParallelGroup, index_state, state_index
from multimon.errors import DomainError
from multimon.labels import qubit_letters

logger = logging.getLogger(__name__)

Item = Union[NativeGate, FrameUpdate, ParallelGroup]

STANDARD_GATES = ("X", "Y", "Z", "R", "CNOT", "CZ", "SWAP", "FREDKIN", "CCNOT", "CCZ")


@dataclass(frozen=True)
class GateSequence:
    """Ordered pulses and frame updates, starting from ``initial_frame``."""

    count: int
    items: Tuple[Item, ...] = ()
    initial_frame: Optional[FrameTracker] = None
    source: Tuple[str, ...] = ()

    @property
    def frame(self) -> FrameTracker:
        return self.initial_frame or FrameTracker.zero(self.count)

    def then(self, other: "GateSequence") -> "GateSequence":
        if other.count != self.count:
            raise DomainError("Cannot join sequences over different qubit counts")
        return GateSequence(
            count=self.count,
            items=self.items + other.items,
            initial_frame=self.initial_frame,
            source=self.source + other.source,
        )

    def pulses(self) -> List[NativeGate]:
        result = []
        for item in self.items:
            if isinstance(item, NativeGate):
                result.append(item)
            elif isinstance(item, ParallelGroup):
                result.extend(item.gates)
        return result

    def final_frame(self) -> FrameTracker:
        frame = self.frame
        for item in self.items:
            if isinstance(item, FrameUpdate):
                frame = frame.with_state_phase(item.state, item.theta)
        return frame

    def played(self) -> List[Tuple[int, NativeGate, float]]:
        """Every pulse with its parallel-group index and effective drive phase."""
        frame = self.frame
        result = []
        for step, item in enumerate(self.items):
            if isinstance(item, FrameUpdate):
                frame = frame.with_state_phase(item.state, item.theta)
                continue
            members = item.gates if isinstance(item, ParallelGroup) else (item,)
            for gate in members:
                result.append((step, gate, gate.phi + frame.gate_offset(gate)))
        return result

    def to_document(self) -> dict:
        return {
            "source": list(self.source),
            "pulses": [
                {"step": step, "transition": gate.label, "theta": gate.theta, "phi": float(phi % (2 * np.pi))}
                for step, gate, phi in self.played()
            ],
            "frame_table": self.final_frame().nonzero_offsets(),
        }


def parallel(gates: Sequence[NativeGate], count: int = 3, source: str = "") -> GateSequence:
    return GateSequence(count=count, items=(ParallelGroup(tuple(gates)),), source=(source,) if source else ())


def _check_qubits(count: int, *qubits: int) -> None:
    for q in qubits:
        if not 0 <= q < count:
            raise DomainError(f"Qubit index {q} outside 0..{count - 1}")
    if len(set(qubits)) != len(qubits):
        raise DomainError(f"Qubit arguments must be distinct, got {qubits}")


def ccnot(target: int, controls: Dict[int, int], count: int = 3) -> GateSequence:
    """
    Flip ``target`` when the other qubits are in ``controls`` (index -> bit).

    One pi pulse at phase -pi/2 gives -i X on the addressed pair; the +pi/2
    phase on both of its states, kept in the frame, removes the -i. Seen from
    the other transitions this is +90 degrees where the flip was conditioned on
    their 0 state and -90 degrees on their 1 state.
    """
    _check_qubits(count, target)
    if set(controls) != set(range(count)) - {target}:
        raise DomainError(f"CCNOT on qubit {target} needs a bit for each of the other {count - 1} qubits")
    state = tuple(0 if k == target else int(controls[k]) for k in range(count))
    gate = NativeGate(target=target, state=state, theta=np.pi, phi=-np.pi / 2)
    upper = gate.upper
    return GateSequence(
        count=count,
        items=(gate, FrameUpdate(state, np.pi / 2), FrameUpdate(upper, np.pi / 2)),
        source=(f"CCNOT {gate.label}",),
    )


def cctheta(state: Sequence[int], theta: float) -> GateSequence:
    """Phase theta on one basis state; frame only, no pulses."""
    state = tuple(int(b) for b in state)
    items = (FrameUpdate(state, float(theta)),) if theta % (2 * np.pi) else ()
    return GateSequence(count=len(state), items=items, source=(f"CCTHETA {state} {theta:.6g}",))


def rotation(qubit: int, theta: float, phi: float, count: int = 3) -> GateSequence:
    """Single-qubit rotation as one pulse per control configuration, played together."""
    _check_qubits(count, qubit)
    others = [k for k in range(count) if k != qubit]
    gates = []
    for bits in itertools.product((0, 1), repeat=count - 1):
        state = [0] * count
        for k, bit in zip(others, bits):
            state[k] = bit
        gates.append(NativeGate(target=qubit, state=tuple(state), theta=theta, phi=phi))
    return parallel(gates, count, source=f"R {qubit_letters(count)[qubit]} {theta:.6g} {phi:.6g}")


def _phase_where(count: int, bits: Dict[int, int], theta: float) -> GateSequence:
    sequence = GateSequence(count=count)
    for index in range(2 ** count):
        state = index_state(index, count)
        if all(state[k] == b for k, b in bits.items()):
            sequence = sequence.then(cctheta(state, theta))
    return sequence


def compile_standard(name: str, args: Sequence, count: int = 3) -> GateSequence:
    """
    Compile a standard gate.

    ``args`` are qubit indices, except R (qubit, theta, phi) and CCZ (basis bits).

    Raises:
        DomainError: unknown gate or invalid arguments
    """
    name = name.upper()
    if name == "X":
        sequence = rotation(args[0], np.pi, -np.pi / 2, count)
    elif name == "Y":
        sequence = rotation(args[0], np.pi, 0.0, count)
    elif name == "R":
        sequence = rotation(args[0], float(args[1]), float(args[2]), count)
    elif name == "Z":
        _check_qubits(count, args[0])
        sequence = _phase_where(count, {args[0]: 1}, np.pi)
    elif name == "CZ":
        _check_qubits(count, args[0], args[1])
        sequence = _phase_where(count, {args[0]: 1, args[1]: 1}, np.pi)
    elif name == "CCZ":
        bits = tuple(int(b) for b in args[0])
        if len(bits) != count:
            raise DomainError(f"CCZ needs a {count}-bit basis state")
        sequence = cctheta(bits, np.pi)
    elif name == "CNOT":
        control, target = args[0], args[1]
        _check_qubits(count, control, target)
        sequence = GateSequence(count=count)
        spectators = [k for k in range(count) if k not in (control, target)]
        for bits in itertools.product((0, 1), repeat=len(spectators)):
            controls = {control: 1, **dict(zip(spectators, bits))}
            sequence = sequence.then(ccnot(target, controls, count))
    elif name == "SWAP":
        a, b = args[0], args[1]
        sequence = (
            compile_standard("CNOT", (a, b), count)
            .then(compile_standard("CNOT", (b, a), count))
            .then(compile_standard("CNOT", (a, b), count))
        )
    elif name == "CCNOT":
        first, second, target = args[0], args[1], args[2]
        _check_qubits(count, first, second, target)
        if count != 3:
            raise DomainError("CCNOT with two named controls is defined for three qubits")
        sequence = ccnot(target, {first: 1, second: 1}, count)
    elif name == "FREDKIN":
        control, a, b = args[0], args[1], args[2]
        _check_qubits(count, control, a, b)
        if count != 3:
            raise DomainError("FREDKIN is defined for three qubits")
        sequence = (
            ccnot(b, {control: 1, a: 1}, count)
            .then(ccnot(a, {control: 1, b: 1}, count))
            .then(ccnot(b, {control: 1, a: 1}, count))
        )
    else:
        raise DomainError(f"Unsupported gate {name}; supported: {', '.join(STANDARD_GATES)}")

    label = " ".join([name] + [str(a) for a in args])
    return GateSequence(count=count, items=sequence.items, source=(label,))


def sequence_unitary(sequence: GateSequence) -> np.ndarray:
    """
    Replay a sequence: each pulse with phase phi plus its current frame offset,
    then the accumulated logical phases. Returns the 2^N logical unitary.
    """
    frame = sequence.frame
    start = frame.diagonal()
    unitary = np.eye(2 ** sequence.count, dtype=complex)
    for item in sequence.items:
        if isinstance(item, FrameUpdate):
            frame = frame.with_state_phase(item.state, item.theta)
            continue
        members = item.gates if isinstance(item, ParallelGroup) else (item,)
        for gate in members:
            unitary = gate.unitary(frame.gate_offset(gate)) @ unitary
    return frame.diagonal() @ unitary @ start.conj().T


def ideal_unitary(name: str, args: Sequence, count: int = 3) -> np.ndarray:
    """Textbook matrix of a standard gate in the same basis ordering."""
    name = name.upper()
    dim = 2 ** count
    if name in ("X", "Y", "R"):
        theta, phi = {"X": (np.pi, -np.pi / 2), "Y": (np.pi, 0.0)}.get(name, (None, None))
        if name == "R":
            theta, phi = float(args[1]), float(args[2])
        c, s = np.cos(theta / 2), np.sin(theta / 2)
        single = np.array([[c, -np.exp(-1j * phi) * s], [np.exp(1j * phi) * s, c]])
        factors = [single if k == args[0] else np.eye(2) for k in range(count)]
        matrix = factors[0]
        for factor in factors[1:]:
            matrix = np.kron(matrix, factor)
        return matrix

    matrix = np.zeros((dim, dim), dtype=complex)
    for index in range(dim):
        state = list(index_state(index, count))
        phase = 1.0
        if name == "Z":
            phase = -1.0 if state[args[0]] else 1.0
        elif name == "CZ":
            phase = -1.0 if state[args[0]] and state[args[1]] else 1.0
        elif name == "CCZ":
            phase = -1.0 if tuple(state) == tuple(int(b) for b in args[0]) else 1.0
        elif name == "CNOT":
            if state[args[0]]:
                state[args[1]] ^= 1
        elif name == "SWAP":
            state[args[0]], state[args[1]] = state[args[1]], state[args[0]]
        elif name == "CCNOT":
            if state[args[0]] and state[args[1]]:
                state[args[2]] ^= 1
        elif name == "FREDKIN":
            if state[args[0]]:
                state[args[1]], state[args[2]] = state[args[2]], state[args[1]]
        else:
            raise DomainError(f"Unsupported gate {name}")
        matrix[state_index(state), index] = phase
    return matrix


def global_phase_distance(actual: np.ndarray, expected: np.ndarray) -> float:
    """Max entrywise error after the best global-phase alignment."""
    overlap = np.trace(expected.conj().T @ actual)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-15 else 1.0
    return float(np.max(np.abs(actual - phase * expected)))
