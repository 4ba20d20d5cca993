from multimon.pulsesim.system import PropagatorCache, TrimonSystem
from multimon.pulsesim.evolve import (
    DensityMatrix,
    PulseSchedule,
    Segment,
    SimulationConfig,
    Tone,
    evolve,
    schedule_from_sequence,
)
from multimon.pulsesim.mle import ProjectionSet, fidelity, maximum_likelihood
from multimon.pulsesim.tomography import collect_projections, ideal_projections, projection_set
from multimon.pulsesim.experiments import (
    DecoherenceMode,
    ExperimentSpec,
    ExperimentResult,
    run_experiment,
    run_length_sweep,
)
from multimon.pulsesim.benchmarking import BenchmarkResult, randomized_benchmark

__all__ = [
    "PropagatorCache",
    "TrimonSystem",
    "DensityMatrix",
    "PulseSchedule",
    "Segment",
    "SimulationConfig",
    "Tone",
    "evolve",
    "schedule_from_sequence",
    "ProjectionSet",
    "fidelity",
    "maximum_likelihood",
    "collect_projections",
    "ideal_projections",
    "projection_set",
    "DecoherenceMode",
    "ExperimentSpec",
    "ExperimentResult",
    "run_experiment",
    "run_length_sweep",
    "BenchmarkResult",
    "randomized_benchmark",
]
