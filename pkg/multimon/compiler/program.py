"""
Gate program text: one gate per line, e.g. ``CNOT A B``, ``X C``, ``CCZ 111``,
``R A 1.5708 0.0`` (theta then phi). ``#`` starts a comment.
"""

import logging
from pathlib import Path
from typing import List, Optional, Tuple, Union

from multimon.compiler.standard import GateSequence, compile_standard
from multimon.errors import DomainError, ProgramParseError
from multimon.labels import parse_basis, qubit_letters

logger = logging.getLogger(__name__)

ARITY = {"X": 1, "Y": 1, "Z": 1, "CNOT": 2, "CZ": 2, "SWAP": 2, "CCNOT": 3, "FREDKIN": 3}

Instruction = Tuple[str, tuple, int]


def parse_program(text: str, count: int = 3, source: Optional[str] = None) -> List[Instruction]:
    """
    Parse program text into (gate, args, line number) triples.

    Raises:
        ProgramParseError: unknown gate, bad qubit letter, wrong argument count
    """
    letters = qubit_letters(count)
    instructions = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, *words = line.split()
        name = name.upper()
        try:
            if name == "R":
                if len(words) != 3:
                    raise DomainError("R takes a qubit, theta and phi")
                args = (_qubit(words[0], letters), float(words[1]), float(words[2]))
            elif name == "CCZ":
                if len(words) != 1:
                    raise DomainError("CCZ takes one basis state")
                args = (parse_basis(words[0], count),)
            elif name in ARITY:
                if len(words) != ARITY[name]:
                    raise DomainError(f"{name} takes {ARITY[name]} qubit(s), got {len(words)}")
                args = tuple(_qubit(word, letters) for word in words)
            else:
                raise DomainError(f"Unsupported gate {name}")
        except (DomainError, ValueError) as e:
            raise ProgramParseError(str(e), path=source or "<program>", line=number)
        instructions.append((name, args, number))
    return instructions


def _qubit(word: str, letters: List[str]) -> int:
    if word.upper() not in letters:
        raise DomainError(f"Unknown qubit {word}; expected one of {', '.join(letters)}")
    return letters.index(word.upper())


def compile_program(text: str, count: int = 3, source: Optional[str] = None) -> GateSequence:
    """Compile every line and join the results into one sequence."""
    sequence = GateSequence(count=count)
    for name, args, number in parse_program(text, count, source):
        try:
            sequence = sequence.then(compile_standard(name, args, count))
        except DomainError as e:
            raise ProgramParseError(str(e), path=source or "<program>", line=number)
    logger.info(f"Compiled {len(sequence.source)} gate(s) into {len(sequence.pulses())} pulse(s)")
    return sequence


def load_program(path: Union[str, Path], count: int = 3) -> GateSequence:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ProgramParseError(f"cannot read program: {e}", path=str(path))
    return compile_program(text, count, source=str(path))
