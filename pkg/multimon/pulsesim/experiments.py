"""
State-preparation experiments: compile, evolve, tomograph, reconstruct, score.

Experiment documents are JSON objects with the fields of ``ExperimentSpec``.
"""

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator

from multimon.circuit import get_preset
from multimon.circuit.modes import ModeSolution
from multimon.compiler.gates import NativeGate
from multimon.compiler.program import compile_program
from multimon.compiler.standard import GateSequence, ccnot, rotation, sequence_unitary
from multimon.cqed.couplings import direct_couplings
from multimon.errors import ConfigurationError, DocumentParseError
from multimon.kerr.extraction import KerrTensor
from multimon.kerr.sweep import analyze_kerr
from multimon.labels import parse_transition
from multimon.pulsesim.evolve import DensityMatrix, SimulationConfig, evolve, schedule_from_sequence
from multimon.pulsesim.mle import fidelity, maximum_likelihood
from multimon.pulsesim.system import PropagatorCache, TrimonSystem
from multimon.pulsesim.tomography import collect_projections, logical_state

logger = logging.getLogger(__name__)


class DecoherenceMode(str, Enum):
    """Which pulses relax: none, the preparation only, or preparation and tomography."""

    NONE = "none"
    PREP_ONLY = "prep_only"
    PREP_AND_TOMO = "prep_and_tomo"


def _pi(label: str) -> GateSequence:
    target, controls = parse_transition(label, 3)
    return ccnot(target, controls, 3)


def _pulse(label: str, theta: float, phi: float = 0.0) -> GateSequence:
    gate = NativeGate.from_label(label, theta, phi)
    return GateSequence(count=3, items=(gate,), source=(f"R {label} {theta:.6g} {phi:.6g}",))


def _half_y(label: str) -> GateSequence:
    return _pulse(label, np.pi / 2)


def _w_state() -> GateSequence:
    return (
        _pulse("AB0C0", 2.0 * np.arcsin(1.0 / np.sqrt(3.0)))
        .then(_half_y("BC0A0"))
        .then(_pi("CA0B0"))
    )


def _plus_state() -> GateSequence:
    sequence = GateSequence(count=3)
    for qubit in range(3):
        sequence = sequence.then(rotation(qubit, np.pi / 2, 0.0))
    return sequence


STATE_PREPARATIONS: Dict[str, Callable[[], GateSequence]] = {
    "000+110": lambda: _half_y("AB0C0").then(_pi("BC0A1")),
    "000+011": lambda: _half_y("BC0A0").then(_pi("CA0B1")),
    "000+101": lambda: _half_y("AB0C0").then(_pi("CA1B0")),
    "000+111": lambda: _half_y("AB0C0").then(_pi("BC0A1")).then(_pi("CA1B1")),
    "001+010+100": _w_state,
    "011+101+110": lambda: _w_state().then(_pi("BC0A1")).then(_pi("CA0B1")).then(_pi("AB0C1")),
    "+++": _plus_state,
}

STATE_ALIASES = {"bell": "000+110", "ghz": "000+111", "w": "001+010+100", "plus": "+++"}

# Simulated fidelities at 200 ns pi pulses with T1 = 50/40/30 us: (prep only, prep and tomography).
REFERENCE_FIDELITIES: Dict[str, Tuple[float, float]] = {
    "000+110": (0.9977, 0.9798),
    "000+011": (0.9962, 0.9777),
    "000+101": (0.9963, 0.9754),
    "000+111": (0.9938, 0.9695),
    "001+010+100": (0.9949, 0.9737),
    "011+101+110": (0.9839, 0.9653),
    "+++": (0.9876, 0.9699),
}


def resolve_state(name: str) -> str:
    key = STATE_ALIASES.get(name.lower(), name)
    if key not in STATE_PREPARATIONS:
        raise ConfigurationError(
            f"Unknown state {name!r}; known: {', '.join(list(STATE_PREPARATIONS) + list(STATE_ALIASES))}"
        )
    return key


class ExperimentSpec(BaseModel):
    """One simulated preparation-and-tomography run."""

    state: Optional[str] = Field(None, description="Named three-qubit state, e.g. 000+110 or ghz")
    program: Optional[str] = Field(None, description="Gate program text preparing the state from |000>")
    pi_length_ns: float = Field(200.0, gt=0.0, description="Length of every pi pulse; pi/2 pulses last half")
    t1_us: List[Optional[float]] = Field(default_factory=lambda: [50.0, 40.0, 30.0])
    decoherence_mode: DecoherenceMode = Field(DecoherenceMode.PREP_ONLY)
    levels_per_mode: int = Field(3, ge=2)
    seed: Optional[int] = None
    device: str = Field("trimon-design-table", description="Preset whose Kerr coefficients define the Hamiltonian")
    ideal_drive: bool = Field(True, description="Drive only the addressed mode; off uses g' ratios")
    drive_weights: Optional[List[float]] = None
    integrator: str = "expm"
    step_ns: Optional[float] = Field(None, gt=0.0)
    ideal_tomography: bool = Field(False, description="Skip pulse simulation of the tomography")
    readout_noise: Optional[float] = Field(None, gt=0.0)
    readout_shots: int = Field(2000, gt=0)
    readout_chi_mhz: Optional[Dict[str, float]] = None
    readout_detuning_mhz: float = 0.0

    @model_validator(mode="after")
    def _check_source(self) -> "ExperimentSpec":
        if (self.state is None) == (self.program is None):
            raise ConfigurationError("Give exactly one of state or program")
        if self.state is not None:
            resolve_state(self.state)
        return self

    @property
    def name(self) -> str:
        return resolve_state(self.state) if self.state is not None else "program"

    def preparation(self) -> GateSequence:
        if self.program is not None:
            return compile_program(self.program, 3, source="<experiment>")
        return STATE_PREPARATIONS[resolve_state(self.state)]()

    def simulation_config(self, drive_weights: Optional[Sequence[float]] = None) -> SimulationConfig:
        values = dict(
            levels_per_mode=self.levels_per_mode,
            t1_us=self.t1_us,
            ideal_drive=self.ideal_drive,
            drive_weights=self.drive_weights or (list(drive_weights) if drive_weights is not None else None),
            integrator=self.integrator,
            seed=self.seed,
            readout_noise=self.readout_noise,
            readout_shots=self.readout_shots,
            readout_chi_mhz=self.readout_chi_mhz,
            readout_detuning_mhz=self.readout_detuning_mhz,
        )
        if self.step_ns is not None:
            values["step_ns"] = self.step_ns
        return SimulationConfig(**values)


@dataclass(frozen=True)
class Device:
    modes: ModeSolution
    kerr: KerrTensor
    system: TrimonSystem

    def coupling_weights(self) -> List[float]:
        """Relative drive strength per mode, letter order, through the cavity field."""
        couplings = np.abs(direct_couplings(self.modes, 1.0))
        return [float(couplings[k]) for k in self.modes.qubit_order()]


@lru_cache(maxsize=8)
def build_device(name: str, levels: int = 3) -> Device:
    modes, kerr = analyze_kerr(get_preset(name))
    return Device(modes=modes, kerr=kerr, system=TrimonSystem.from_kerr(kerr, levels))


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    name: str
    pi_length_ns: float
    decoherence_mode: DecoherenceMode
    fidelity: float
    rho: np.ndarray
    target: np.ndarray
    leakage: float
    diagnostics: Dict[str, float] = field(default_factory=dict)

    def to_document(self) -> dict:
        populations = np.real(np.diag(self.rho))
        return {
            "state": self.name,
            "pi_length_ns": self.pi_length_ns,
            "decoherence_mode": self.decoherence_mode.value,
            "fidelity": self.fidelity,
            "leakage": self.leakage,
            "populations": {format(k, "03b"): float(p) for k, p in enumerate(populations)},
            "rho_real": np.real(self.rho).round(6).tolist(),
            "rho_imag": np.imag(self.rho).round(6).tolist(),
            "diagnostics": self.diagnostics,
        }


def run_experiment(spec: ExperimentSpec, device: Optional[Device] = None) -> ExperimentResult:
    """
    Prepare a state with square pulses, run joint-readout tomography, reconstruct
    by maximum likelihood and score against the ideal state.
    """
    device = device or build_device(spec.device, spec.levels_per_mode)
    system = device.system
    if system.count != 3:
        raise ConfigurationError(f"Device {spec.device} has {system.count} modes; experiments need a trimon")

    weights = None if spec.ideal_drive else device.coupling_weights()
    relaxing = spec.simulation_config(weights)
    lossless = relaxing.without_decay()
    prep_config = lossless if spec.decoherence_mode == DecoherenceMode.NONE else relaxing
    tomo_config = relaxing if spec.decoherence_mode == DecoherenceMode.PREP_AND_TOMO else lossless

    preparation = spec.preparation()
    target = sequence_unitary(preparation)[:, 0]

    prep_cache = PropagatorCache(system, prep_config.gammas(system.count))
    tomo_cache = prep_cache if tomo_config is prep_config else PropagatorCache(system, tomo_config.gammas(system.count))

    schedule = schedule_from_sequence(preparation, system, spec.pi_length_ns, prep_config)
    initial = DensityMatrix.basis((0,) * system.count, system.levels)
    prepared = evolve(initial, schedule, system, prep_config, prep_cache)
    logger.info(
        f"Prepared {spec.name} in {schedule.duration_ns:.0f} ns, leakage {prepared.leakage():.2e}, "
        f"direct fidelity {fidelity(logical_state(prepared, preparation.final_frame()), target):.5f}"
    )

    projections = collect_projections(
        prepared,
        preparation.final_frame(),
        system,
        tomo_config,
        spec.pi_length_ns,
        simulate=not spec.ideal_tomography,
        cache=tomo_cache,
        rng=np.random.default_rng(spec.seed),
    )
    rho = maximum_likelihood(projections)
    score = fidelity(rho, target)
    logger.info(f"{spec.name} at {spec.pi_length_ns:.0f} ns ({spec.decoherence_mode.value}): F = {score:.5f}")
    return ExperimentResult(
        name=spec.name,
        pi_length_ns=spec.pi_length_ns,
        decoherence_mode=spec.decoherence_mode,
        fidelity=score,
        rho=rho,
        target=target,
        leakage=prepared.leakage(),
        diagnostics={
            "prep_duration_ns": schedule.duration_ns,
            "direct_fidelity": fidelity(logical_state(prepared, preparation.final_frame()), target),
            "propagator_hits": tomo_cache.hits + (prep_cache.hits if tomo_cache is not prep_cache else 0),
            "propagator_misses": tomo_cache.misses + (prep_cache.misses if tomo_cache is not prep_cache else 0),
        },
    )


def run_length_sweep(spec: ExperimentSpec, lengths: Sequence[float]) -> List[Tuple[float, float]]:
    """Fidelity at each pi-pulse length, every other setting fixed."""
    if not lengths:
        raise ConfigurationError("Length sweep needs at least one pi length")
    device = build_device(spec.device, spec.levels_per_mode)
    return [
        (float(length), run_experiment(spec.model_copy(update={"pi_length_ns": float(length)}), device).fidelity)
        for length in lengths
    ]


def length_sweep_csv(rows: Sequence[Tuple[float, float]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["pi_length_ns", "fidelity"])
    for length, value in rows:
        writer.writerow([f"{length:g}", f"{value:.6f}"])
    return buffer.getvalue()


def parse_experiment(text: str, source: Optional[str] = None) -> ExperimentSpec:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentParseError(e.msg, path=source or "<experiment>", line=e.lineno)
    try:
        return ExperimentSpec.model_validate(document)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first.get("loc", ()))
        raise DocumentParseError(f"{location}: {first.get('msg')}", path=source or "<experiment>")
    except ConfigurationError as e:
        raise DocumentParseError(str(e), path=source or "<experiment>")


def load_experiment(path: Union[str, Path]) -> ExperimentSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DocumentParseError(f"cannot read experiment: {e}", path=str(path))
    return parse_experiment(text, source=str(path))
