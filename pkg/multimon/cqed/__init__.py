from multimon.cqed.couplings import direct_couplings, ideal_reference
from multimon.cqed.dispersive import (
    CavityModel,
    build_cavity_model,
    dispersive_shifts,
    mode_detunings,
    state_dispersive_shifts,
    trimon_dispersive_shifts,
)
from multimon.cqed.readout import ReadoutResult, default_demarcations, readout_histograms

__all__ = [
    "direct_couplings",
    "ideal_reference",
    "CavityModel",
    "build_cavity_model",
    "dispersive_shifts",
    "mode_detunings",
    "state_dispersive_shifts",
    "trimon_dispersive_shifts",
    "ReadoutResult",
    "default_demarcations",
    "readout_histograms",
]
