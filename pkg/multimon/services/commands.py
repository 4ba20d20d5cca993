"""
Pipelines behind the CLI subcommands and the job service.

Every command takes a validated request model and returns a ``CommandOutput``
holding a JSON-ready document, plus CSV text where the command has a table.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple, Type

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from multimon.circuit import get_preset, list_presets, parse_netlist
from multimon.circuit.netlist import Netlist
from multimon.compiler.program import compile_program
from multimon.compiler.standard import sequence_unitary
from multimon.cqed.dispersive import build_cavity_model
from multimon.design.asymmetry import AsymmetrySpec
from multimon.design.optimizer import KNOBS, optimize_design
from multimon.design.spacing import DesignTarget, validate_spacing
from multimon.errors import ConfigurationError
from multimon.kerr.levels import build_level_diagram
from multimon.kerr.sweep import analyze_kerr, flux_grid, flux_sweep, sweep_rows, write_sweep_csv
from multimon.pulsesim.benchmarking import randomized_benchmark
from multimon.pulsesim.evolve import SimulationConfig
from multimon.pulsesim.experiments import ExperimentSpec, build_device, length_sweep_csv, run_experiment, run_length_sweep

logger = logging.getLogger(__name__)


@dataclass
class CommandOutput:
    document: dict
    csv_text: Optional[str] = None
    ok: bool = True


class AnalyzeRequest(BaseModel):
    netlist: Netlist = Field(..., description="Circuit to analyze")
    omega_r: float = Field(7.3, gt=0.0, description="Cavity frequency in GHz")
    g_ref_mhz: float = Field(70.0, description="Coupling of the reference mode in MHz")
    reference_mode: str = Field("A", description="Mode whose shape defines the cavity field direction")
    detuning_reference: str = Field("qubit_frequency", description="qubit_frequency or appendix")
    order: int = Field(4, description="Expansion order: 4, 6 or 8")
    second_order: bool = Field(False, description="Add second-order level shifts")
    frequency_window: Tuple[float, float] = Field((3.0, 8.0))
    min_separation_mhz: float = Field(30.0)


class SweepRequest(BaseModel):
    netlist: Netlist
    flux_start: float = 0.0
    flux_stop: float = 0.25
    flux_step: float = 0.05
    order: int = 4
    second_order: bool = False
    workers: Optional[int] = Field(None, description="Thread-pool size for independent flux points")


class OptimizeRequest(BaseModel):
    target: DesignTarget
    seed: AsymmetrySpec
    knobs: List[str] = Field(default_factory=lambda: list(KNOBS))
    budget: Optional[int] = Field(None, gt=0)


class CompileRequest(BaseModel):
    program: str = Field(..., description="Gate program text")
    count: int = Field(3, ge=2)
    source: Optional[str] = None


class BenchmarkRequest(BaseModel):
    transition: str
    lengths: List[int] = Field(default_factory=lambda: [1, 5, 10, 20, 40, 80])
    trials: int = Field(10, gt=0)


class SimulateRequest(BaseModel):
    experiment: ExperimentSpec
    lengths: Optional[List[float]] = Field(None, description="Pi lengths for a fidelity sweep")
    benchmark: Optional[BenchmarkRequest] = None


def _pair_table(labels, matrix) -> Dict[str, float]:
    order = sorted(range(len(labels)), key=lambda k: labels[k])
    table = {}
    for position, a in enumerate(order):
        for b in order[position + 1:]:
            table[f"{labels[a]}{labels[b]}"] = float(1e3 * matrix[a, b])
    return table


def analyze(request: AnalyzeRequest) -> CommandOutput:
    """Modes, Kerr coefficients, level diagram, spacing and cavity couplings of one circuit."""
    netlist = request.netlist
    modes, kerr = analyze_kerr(netlist, order=request.order, second_order=request.second_order)
    order = modes.qubit_order()
    letters = [modes.labels[k] for k in order]
    diagram = build_level_diagram(kerr)
    junctions = [b.ej_ghz for b in netlist.junctions]
    target = DesignTarget(frequency_window=request.frequency_window, min_separation_mhz=request.min_separation_mhz)
    report = validate_spacing(diagram, target, ej_min_ghz=min(junctions) if junctions else None)

    warnings = list(modes.warnings) + list(kerr.warnings)
    document = {
        "nodes": netlist.nodes,
        "flux_phi0": netlist.flux_phi0,
        "modes": letters,
        "linear_frequencies_ghz": dict(zip(letters, kerr.frequencies[order].tolist())),
        "qubit_frequencies_ghz": dict(zip(letters, kerr.qubit_frequencies()[order].tolist())),
        "anharmonicities_ghz": dict(zip(letters, kerr.anharmonicities[order].tolist())),
        "cross_kerr_mhz": _pair_table(kerr.labels, kerr.cross_kerr),
        "xi_abc_mhz": 1e3 * kerr.xi_abc,
        "transitions_ghz": diagram.transitions,
        "leakage_transitions_ghz": diagram.leakage_transitions,
        "spacing": report.to_document(),
    }
    if modes.count >= 2 and request.g_ref_mhz:
        cavity = build_cavity_model(
            modes,
            kerr,
            request.omega_r,
            request.g_ref_mhz,
            reference_mode=request.reference_mode,
            detuning_reference=request.detuning_reference,
            ring_order=netlist.ring_order(),
        )
        warnings.extend(cavity.warnings)
        document["cavity"] = {
            "omega_r_ghz": cavity.omega_r,
            "g_direct_mhz": dict(zip(cavity.letters, cavity.g_direct.tolist())),
            "detunings_ghz": dict(zip(cavity.letters, cavity.detunings.tolist())),
            "chi_mhz": cavity.chi,
        }
    document["warnings"] = warnings
    return CommandOutput(document=document, ok=True)


def sweep(request: SweepRequest) -> CommandOutput:
    grid = flux_grid(request.flux_start, request.flux_stop, request.flux_step)
    points = flux_sweep(request.netlist, grid, request.order, request.second_order, request.workers)
    header, rows = sweep_rows(points)
    return CommandOutput(
        document={"columns": header, "rows": rows},
        csv_text=write_sweep_csv(points),
    )


def optimize(request: OptimizeRequest) -> CommandOutput:
    result = optimize_design(request.target, request.seed, request.knobs, request.budget)
    if not result.feasible:
        logger.warning(f"No feasible design within {result.evaluations} evaluations")
    return CommandOutput(document=result.to_document(), ok=result.feasible)


def compile_(request: CompileRequest) -> CommandOutput:
    sequence = compile_program(request.program, request.count, source=request.source)
    unitary = sequence_unitary(sequence)
    document = sequence.to_document()
    document["unitary_real"] = np.real(unitary).round(12).tolist()
    document["unitary_imag"] = np.imag(unitary).round(12).tolist()
    rows = ["step,transition,theta,phi"] + [
        f"{p['step']},{p['transition']},{p['theta']:.12g},{p['phi']:.12g}" for p in document["pulses"]
    ]
    return CommandOutput(document=document, csv_text="\n".join(rows) + "\n")


def simulate(request: SimulateRequest) -> CommandOutput:
    spec = request.experiment
    if request.benchmark is not None:
        device = build_device(spec.device, spec.levels_per_mode)
        weights = None if spec.ideal_drive else device.coupling_weights()
        config = spec.simulation_config(weights)
        result = randomized_benchmark(
            device.system,
            request.benchmark.transition,
            request.benchmark.lengths,
            request.benchmark.trials,
            config,
            pi_length_ns=spec.pi_length_ns,
            seed=spec.seed,
        )
        return CommandOutput(document=result.to_document())
    if request.lengths:
        rows = run_length_sweep(spec, request.lengths)
        return CommandOutput(
            document={"state": spec.name, "rows": [{"pi_length_ns": l, "fidelity": f} for l, f in rows]},
            csv_text=length_sweep_csv(rows),
        )
    return CommandOutput(document=run_experiment(spec).to_document())


def presets() -> CommandOutput:
    return CommandOutput(document={"presets": list_presets()})


COMMANDS: Dict[str, Tuple[Type[BaseModel], Callable[[BaseModel], CommandOutput]]] = {
    "analyze": (AnalyzeRequest, analyze),
    "sweep": (SweepRequest, sweep),
    "optimize": (OptimizeRequest, optimize),
    "compile": (CompileRequest, compile_),
    "simulate": (SimulateRequest, simulate),
}


def validate_request(name: str, payload: dict) -> BaseModel:
    """
    Validate a payload for ``name`` without running it.

    ``netlist`` may be given inline, as JSON text or through a ``preset`` key.

    Raises:
        ConfigurationError: unknown command or invalid payload
    """
    if name not in COMMANDS:
        raise ConfigurationError(f"Unknown command {name}; supported: {', '.join(COMMANDS)}")
    model, _ = COMMANDS[name]
    if name in ("analyze", "sweep"):
        if isinstance(payload.get("netlist"), str):
            payload = {**payload, "netlist": parse_netlist(payload["netlist"])}
        elif "netlist" not in payload and "preset" in payload:
            payload = {**{k: v for k, v in payload.items() if k != "preset"}, "netlist": get_preset(payload["preset"])}
    try:
        return model.model_validate(payload)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first.get("loc", ()))
        raise ConfigurationError(f"Invalid {name} payload at {location}: {first.get('msg')}")


def run_command(name: str, payload: dict) -> CommandOutput:
    """Validate a payload for ``name`` and run it."""
    request = validate_request(name, payload)
    logger.info(f"Running {name}")
    return COMMANDS[name][1](request)
