"""Level-spacing, frequency-window and stability checks of a multimon spectrum."""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from multimon.config.settings import solver_settings
from multimon.cqed.dispersive import CavityModel
from multimon.errors import ConfigurationError
from multimon.kerr.levels import LevelDiagram

logger = logging.getLogger(__name__)


class DesignTarget(BaseModel):
    """What a device has to achieve."""

    model_config = ConfigDict(frozen=True)

    frequency_window: Tuple[float, float] = Field((3.0, 8.0), description="Allowed transition band [f_min, f_max] in GHz")
    min_separation_mhz: float = Field(30.0, description="Smallest allowed gap between any two lines in MHz")
    target_frequencies: Optional[List[float]] = Field(
        None, description="Desired qubit frequencies f_A, f_B, ... in GHz"
    )
    target_transitions: Optional[Dict[str, float]] = Field(
        None, description="Desired conditional transitions, label -> GHz"
    )
    frequency_tolerance_mhz: float = Field(10.0, gt=0.0, description="Allowed deviation from the targets in MHz")
    omega_r: Optional[float] = Field(None, gt=0.0, description="Cavity frequency in GHz; enables the readout checks")
    g_ref_mhz: Optional[float] = Field(None, description="Reference cavity coupling g_A in MHz")
    min_chi_separation_mhz: float = Field(
        0.1, ge=0.0, description="Smallest allowed gap between the cavity shifts of two basis states in MHz"
    )
    stability_margin: float = Field(
        default_factory=lambda: solver_settings.stability_margin,
        description="Required ratio 4 E_J,min / E(|1...1>)",
    )

    @model_validator(mode="after")
    def _check_target(self) -> "DesignTarget":
        low, high = self.frequency_window
        if not low < high:
            raise ConfigurationError(f"Frequency window must satisfy f_min < f_max, got {self.frequency_window}")
        if self.min_separation_mhz <= 0:
            raise ConfigurationError(f"min_separation_mhz must be positive, got {self.min_separation_mhz}")
        if (self.omega_r is None) != (self.g_ref_mhz is None):
            raise ConfigurationError("omega_r and g_ref_mhz must be given together")
        return self


@dataclass(frozen=True)
class SpacingReport:
    """Outcome of a spacing check; ``violations`` is empty when the device passes."""

    gaps: List[Tuple[str, str, float]]
    min_gap_mhz: float
    closest_pair: Tuple[str, str]
    energy_top: float
    stability_ratio: Optional[float]
    violations: List[Dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_document(self) -> dict:
        return {
            "passed": self.passed,
            "min_gap_mhz": self.min_gap_mhz,
            "closest_pair": list(self.closest_pair),
            "energy_top_ghz": self.energy_top,
            "stability_ratio": self.stability_ratio,
            "gaps": [{"between": [a, b], "gap_mhz": gap} for a, b, gap in self.gaps],
            "violations": self.violations,
        }


def leak_label(label: str) -> str:
    return f"{label}:12"


def readout_violations(cavity: CavityModel, target: DesignTarget) -> List[Dict]:
    """Dispersive-regime and shift-separation problems of a cavity model."""
    violations = []
    required = solver_settings.dispersive_ratio_warn
    for letter, g, delta in zip(cavity.letters, cavity.g_direct, cavity.detunings):
        if g == 0.0:
            continue
        ratio = abs(delta * 1e3 / g)
        if ratio < required:
            violations.append({"kind": "dispersive", "mode": letter, "ratio": ratio, "required": required})

    shifts = {"0" * len(cavity.letters): 0.0, **cavity.chi}
    for a, b in itertools.combinations(sorted(shifts), 2):
        gap = abs(shifts[a] - shifts[b])
        if gap < target.min_chi_separation_mhz:
            violations.append({"kind": "readout", "between": [a, b], "gap_mhz": gap})
    return violations


def validate_spacing(
    diagram: LevelDiagram,
    target: DesignTarget,
    ej_min_ghz: Optional[float] = None,
    cavity: Optional[CavityModel] = None,
) -> SpacingReport:
    """
    Check every gap between computational lines and between leakage and
    computational lines, the frequency window and the stability margin.

    The stability check needs the smallest junction energy and is skipped when
    ``ej_min_ghz`` is not given. With a ``cavity`` the dispersive ratios and the
    separation of the basis-state shifts are checked as well.
    """
    lines = dict(diagram.transitions)
    leak = {leak_label(k): v for k, v in diagram.leakage_transitions.items()}

    gaps = []
    for a, b in itertools.combinations(sorted(lines), 2):
        gaps.append((a, b, 1e3 * abs(lines[a] - lines[b])))
    for a, b in itertools.product(sorted(leak), sorted(lines)):
        gaps.append((a, b, 1e3 * abs(leak[a] - lines[b])))

    violations = []
    for a, b, gap in gaps:
        if gap < target.min_separation_mhz:
            violations.append({"kind": "separation", "between": [a, b], "gap_mhz": gap})

    low, high = target.frequency_window
    for label, frequency in sorted(lines.items()):
        if not low <= frequency <= high:
            violations.append({"kind": "window", "transition": label, "frequency_ghz": frequency})

    top = diagram.energy((1,) * len(diagram.letters))
    ratio = None
    if ej_min_ghz is not None:
        ratio = 4.0 * ej_min_ghz / top if top > 0 else float("inf")
        if ratio < target.stability_margin:
            violations.append({
                "kind": "stability",
                "ratio": ratio,
                "required": target.stability_margin,
                "energy_top_ghz": top,
            })

    if cavity is not None:
        violations.extend(readout_violations(cavity, target))

    closest = min(gaps, key=lambda g: g[2]) if gaps else ("", "", float("inf"))
    report = SpacingReport(
        gaps=gaps,
        min_gap_mhz=closest[2],
        closest_pair=(closest[0], closest[1]),
        energy_top=top,
        stability_ratio=ratio,
        violations=violations,
    )
    if report.passed:
        logger.info(f"Spacing passes: closest lines {closest[0]}/{closest[1]} at {closest[2]:.1f} MHz")
    else:
        logger.info(f"Spacing fails with {len(violations)} violation(s); closest gap {closest[2]:.1f} MHz")
    return report
