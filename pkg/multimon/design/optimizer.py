"""Derivative-free search for trimon parameters that meet a design target."""

import logging
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from multimon.circuit.modes import ModeSolution
from multimon.circuit.netlist import Netlist
from multimon.config.settings import solver_settings
from multimon.cqed.dispersive import CavityModel, build_cavity_model
from multimon.design.asymmetry import AsymmetrySpec, apply_asymmetry
from multimon.design.spacing import DesignTarget, SpacingReport, validate_spacing
from multimon.errors import DomainError, MultimonError, NearResonanceError
from multimon.kerr.extraction import KerrTensor
from multimon.kerr.levels import build_level_diagram
from multimon.kerr.sweep import analyze_kerr

logger = logging.getLogger(__name__)

KNOBS = (
    "ej_mean",
    "eta_ab",
    "eta_bc",
    "eta_ca",
    "c_mean",
    "eta_prime_ab",
    "eta_prime_bc",
    "eta_prime_ca",
    "c13",
    "c24",
)

PENALTY = 1e6
OUTER_STEP = 0.02
MAX_RESTARTS = 3
MAX_OUTER = 5


@dataclass(frozen=True, eq=False)
class DesignResult:
    spec: AsymmetrySpec
    netlist: Netlist
    report: SpacingReport
    qubit_frequencies: np.ndarray
    objective: float
    feasible: bool
    evaluations: int

    def to_document(self) -> dict:
        return {
            "feasible": self.feasible,
            "objective": self.objective,
            "evaluations": self.evaluations,
            "qubit_frequencies_ghz": self.qubit_frequencies.tolist(),
            "spec": self.spec.model_dump(mode="json"),
            "netlist": self.netlist.to_document(),
            "report": self.report.to_document(),
        }


def _read(spec: AsymmetrySpec, knob: str) -> float:
    if knob in ("ej_mean", "c_mean"):
        return getattr(spec, knob)
    if knob in ("c13", "c24"):
        return spec.diagonal_caps[0 if knob == "c13" else 1]
    name, pair = knob.rsplit("_", 1)
    return getattr(spec, name)[("ab", "bc", "ca").index(pair)]


def _write(spec: AsymmetrySpec, values: Dict[str, float]) -> AsymmetrySpec:
    document = spec.model_dump()
    for knob, value in values.items():
        if knob in ("ej_mean", "c_mean"):
            document[knob] = value
        elif knob in ("c13", "c24"):
            caps = list(document["diagonal_caps"])
            caps[0 if knob == "c13" else 1] = value
            document["diagonal_caps"] = tuple(caps)
        else:
            name, pair = knob.rsplit("_", 1)
            triple = list(document[name])
            triple[("ab", "bc", "ca").index(pair)] = value
            document[name] = tuple(triple)
    return AsymmetrySpec.model_validate(document)


def _steps(knobs: Sequence[str], start: np.ndarray) -> np.ndarray:
    return np.array([0.02 if knob.startswith("eta") else 0.05 * abs(x) or 0.05 for knob, x in zip(knobs, start)])


class _Evaluator:
    """Objective with an evaluation budget; remembers the best point seen."""

    def __init__(self, target: DesignTarget, base: AsymmetrySpec, knobs: Sequence[str], budget: int):
        self.target = target
        self.base = base
        self.knobs = list(knobs)
        self.budget = budget
        self.count = 0
        self.best_value = np.inf
        self.best_spec: Optional[AsymmetrySpec] = None
        self.weight = solver_settings.separation_weight

    def spec_at(self, x: np.ndarray) -> AsymmetrySpec:
        return _write(self.base, dict(zip(self.knobs, x)))

    def __call__(self, x: np.ndarray) -> float:
        if self.count >= self.budget:
            return PENALTY
        self.count += 1
        try:
            spec = self.spec_at(x)
            value = design_objective(spec, self.target, self.weight)
        except (MultimonError, ValueError):
            return PENALTY
        if value < self.best_value:
            self.best_value = value
            self.best_spec = spec
        return value


def _cavity_for(
    netlist: Netlist, modes: ModeSolution, kerr: KerrTensor, target: DesignTarget
) -> Tuple[Optional[CavityModel], List[Dict]]:
    """Readout model of a candidate when the target names a cavity."""
    if target.omega_r is None or modes.count < 2:
        return None, []
    try:
        cavity = build_cavity_model(
            modes, kerr, target.omega_r, target.g_ref_mhz, ring_order=netlist.ring_order()
        )
    except NearResonanceError as e:
        return None, [{"kind": "resonance", "message": str(e)}]
    return cavity, []


def evaluate_spec(spec: AsymmetrySpec, target: DesignTarget):
    netlist = apply_asymmetry(spec)
    modes, kerr = analyze_kerr(netlist)
    diagram = build_level_diagram(kerr)
    cavity, resonances = _cavity_for(netlist, modes, kerr, target)
    report = validate_spacing(diagram, target, ej_min_ghz=float(spec.junction_energies().min()), cavity=cavity)
    if resonances:
        report = replace(report, violations=report.violations + resonances)
    order = sorted(range(kerr.count), key=lambda k: kerr.labels[k])
    frequencies = kerr.qubit_frequencies()[order]
    return netlist, diagram, report, frequencies


def design_objective(spec: AsymmetrySpec, target: DesignTarget, weight: float) -> float:
    """
    Squared deviation from the targets (GHz^2) plus ``weight`` times squared
    hinge penalties of every spacing and readout violation.
    """
    _, diagram, report, frequencies = evaluate_spec(spec, target)
    deviation = 0.0
    if target.target_frequencies:
        deviation += float(np.sum((frequencies - np.asarray(target.target_frequencies)) ** 2))
    if target.target_transitions:
        deviation += sum((diagram.transitions[k] - v) ** 2 for k, v in target.target_transitions.items())

    hinge = 0.0
    for violation in report.violations:
        if violation["kind"] == "separation":
            hinge += ((target.min_separation_mhz - violation["gap_mhz"]) / 1e3) ** 2
        elif violation["kind"] == "window":
            low, high = target.frequency_window
            f = violation["frequency_ghz"]
            hinge += (low - f) ** 2 if f < low else (f - high) ** 2
        elif violation["kind"] == "stability":
            hinge += (violation["required"] * violation["energy_top_ghz"] / 4.0 - spec.junction_energies().min()) ** 2
        elif violation["kind"] == "dispersive":
            hinge += (1.0 - violation["ratio"] / violation["required"]) ** 2
        elif violation["kind"] == "readout":
            hinge += ((target.min_chi_separation_mhz - violation["gap_mhz"]) / 1e3) ** 2
        elif violation["kind"] == "resonance":
            hinge += 1.0
    return deviation + weight * hinge


def is_feasible(report: SpacingReport, frequencies: np.ndarray, target: DesignTarget, diagram=None) -> bool:
    if not report.passed:
        return False
    tolerance = target.frequency_tolerance_mhz / 1e3
    if target.target_frequencies and np.max(np.abs(frequencies - np.asarray(target.target_frequencies))) > tolerance:
        return False
    if target.target_transitions and diagram is not None:
        if any(abs(diagram.transitions[k] - v) > tolerance for k, v in target.target_transitions.items()):
            return False
    return True


def optimize_design(
    target: DesignTarget,
    seed: AsymmetrySpec,
    knobs: Sequence[str],
    budget: Optional[int] = None,
) -> DesignResult:
    """
    Minimize ``design_objective`` over the chosen knobs with restarted Nelder-Mead.

    An outer loop nudges the mean junction energy by 2% toward the target
    frequencies when a run ends infeasible. Runs are deterministic for a given
    seed and configuration.

    Raises:
        DomainError: empty or unknown knobs
    """
    knobs = list(knobs)
    if not knobs:
        raise DomainError("optimize_design needs at least one knob")
    unknown = [k for k in knobs if k not in KNOBS]
    if unknown:
        raise DomainError(f"Unknown design knobs {unknown}; choose from {', '.join(KNOBS)}")

    budget = budget or solver_settings.optimizer_budget
    evaluator = _Evaluator(target, seed, knobs, budget)
    current = seed

    for outer in range(MAX_OUTER):
        evaluator.base = current
        start = np.array([_read(current, k) for k in knobs])
        for restart in range(MAX_RESTARTS):
            if evaluator.count >= budget:
                break
            simplex = np.vstack([start, start + np.diag(_steps(knobs, start))])
            result = minimize(
                evaluator,
                start,
                method="Nelder-Mead",
                options={
                    "initial_simplex": simplex,
                    "maxfev": budget - evaluator.count,
                    "xatol": 1e-7,
                    "fatol": 1e-14,
                },
            )
            logger.info(
                f"Design run {outer}.{restart}: objective {result.fun:.3e} after {evaluator.count} evaluations"
            )
            if np.allclose(result.x, start, rtol=0, atol=1e-9):
                break
            start = result.x

        best = evaluator.best_spec or current
        netlist, diagram, report, frequencies = evaluate_spec(best, target)
        if is_feasible(report, frequencies, target, diagram) or evaluator.count >= budget:
            break
        if not target.target_frequencies:
            break
        # frequencies grow with the mean junction energy
        direction = -np.sign(np.mean(frequencies - np.asarray(target.target_frequencies)))
        current = _write(best, {"ej_mean": best.ej_mean * (1.0 + OUTER_STEP * direction)})
        logger.info(f"Adjusting mean E_J to {current.ej_mean:.4f} GHz")

    best = evaluator.best_spec or seed
    netlist, diagram, report, frequencies = evaluate_spec(best, target)
    feasible = is_feasible(report, frequencies, target, diagram)
    if not feasible:
        logger.warning(f"No feasible design within {budget} evaluations; returning best effort")
    return DesignResult(
        spec=best,
        netlist=netlist,
        report=report,
        qubit_frequencies=frequencies,
        objective=float(evaluator.best_value),
        feasible=feasible,
        evaluations=evaluator.count,
    )
