"""Naming of qubits, basis states and conditional transitions."""

import re
import string
from typing import Dict, List, Sequence, Tuple

from multimon.errors import DomainError

_TRANSITION = re.compile(r"^([A-Z])((?:[A-Z][01])*)$")


def qubit_letters(count: int) -> List[str]:
    return list(string.ascii_uppercase[:count])


def control_order(target: int, count: int) -> List[int]:
    """Other qubits in cyclic order after the target."""
    return [(target + k) % count for k in range(1, count)]


def transition_label(target: int, state: Sequence[int]) -> str:
    """
    Label of the target's 0->1 transition with the other qubits in ``state``,
    e.g. target 0 with state (0, 1, 0) -> 'AB1C0'.
    """
    letters = qubit_letters(len(state))
    parts = [letters[target]]
    for other in control_order(target, len(state)):
        parts.append(f"{letters[other]}{state[other]}")
    return "".join(parts)


def parse_transition(label: str, count: int = 3) -> Tuple[int, Dict[int, int]]:
    """
    Split a transition label into the target index and the control bits.

    Raises:
        DomainError: malformed label or wrong qubit count
    """
    match = _TRANSITION.match(label)
    if not match:
        raise DomainError(f"Malformed transition label: {label}")
    letters = qubit_letters(count)
    target = match.group(1)
    controls = {}
    for letter, bit in re.findall(r"([A-Z])([01])", match.group(2)):
        if letter not in letters or letter == target:
            raise DomainError(f"Invalid control {letter} in {label}")
        controls[letters.index(letter)] = int(bit)
    if target not in letters or len(controls) != count - 1:
        raise DomainError(f"Transition {label} does not address {count} qubits")
    return letters.index(target), controls


def transition_states(label: str, count: int = 3) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Lower and upper basis states joined by a transition."""
    target, controls = parse_transition(label, count)
    lower = [0] * count
    for index, bit in controls.items():
        lower[index] = bit
    upper = list(lower)
    upper[target] = 1
    return tuple(lower), tuple(upper)


def all_transitions(count: int) -> List[str]:
    labels = []
    for target in range(count):
        others = control_order(target, count)
        for bits in _bit_strings(count - 1):
            state = [0] * count
            for other, bit in zip(others, bits):
                state[other] = bit
            labels.append(transition_label(target, state))
    return labels


def basis_label(state: Sequence[int]) -> str:
    return "".join(str(bit) for bit in state)


def parse_basis(label: str, count: int = 3) -> Tuple[int, ...]:
    if len(label) != count or set(label) - {"0", "1"}:
        raise DomainError(f"Basis state must be {count} bits, got {label!r}")
    return tuple(int(bit) for bit in label)


def _bit_strings(length: int) -> List[Tuple[int, ...]]:
    return [tuple((value >> (length - 1 - k)) & 1 for k in range(length)) for value in range(2 ** length)]
