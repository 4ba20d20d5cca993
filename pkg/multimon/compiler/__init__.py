from multimon.compiler.frames import FrameTracker
from multimon.compiler.gates import FrameUpdate, NativeGate, ParallelGroup, ccr_matrix
from multimon.compiler.program import compile_program, load_program, parse_program
from multimon.compiler.standard import (
    GateSequence,
    ccnot,
    cctheta,
    compile_standard,
    global_phase_distance,
    ideal_unitary,
    parallel,
    rotation,
    sequence_unitary,
)

__all__ = [
    "FrameTracker",
    "FrameUpdate",
    "NativeGate",
    "ParallelGroup",
    "ccr_matrix",
    "compile_program",
    "load_program",
    "parse_program",
    "GateSequence",
    "ccnot",
    "cctheta",
    "compile_standard",
    "global_phase_distance",
    "ideal_unitary",
    "parallel",
    "rotation",
    "sequence_unitary",
]
