from multimon.design.asymmetry import AsymmetrySpec, apply_asymmetry, recover_asymmetry
from multimon.design.optimizer import DesignResult, optimize_design
from multimon.design.spacing import DesignTarget, SpacingReport, validate_spacing

__all__ = [
    "AsymmetrySpec",
    "apply_asymmetry",
    "recover_asymmetry",
    "DesignResult",
    "optimize_design",
    "DesignTarget",
    "SpacingReport",
    "validate_spacing",
]
