"""Design, analysis and pulse-level simulation of multimon superconducting circuits."""

__version__ = "1.0.0"
