from multimon.kerr.expansion import PotentialExpansion, expand_potential
from multimon.kerr.extraction import KerrTensor, extract_kerr
from multimon.kerr.levels import LevelDiagram, build_level_diagram
from multimon.kerr.sweep import SweepPoint, analyze_kerr, flux_grid, flux_sweep, write_sweep_csv

__all__ = [
    "PotentialExpansion",
    "expand_potential",
    "KerrTensor",
    "extract_kerr",
    "LevelDiagram",
    "build_level_diagram",
    "SweepPoint",
    "analyze_kerr",
    "flux_grid",
    "flux_sweep",
    "write_sweep_csv",
]
