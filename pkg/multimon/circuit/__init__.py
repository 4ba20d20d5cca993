from multimon.circuit.netlist import Branch, Netlist, load_netlist, parse_netlist
from multimon.circuit.matrices import LinearizedMatrices, build_matrices
from multimon.circuit.dc_phases import solve_dc_phases
from multimon.circuit.modes import ModeSolution, normal_modes, symmetric_ring_modes
from multimon.circuit.presets import get_preset, list_presets


def linearize(netlist: Netlist) -> LinearizedMatrices:
    """DC phases, then matrices linearized around them."""
    return build_matrices(netlist, solve_dc_phases(netlist))


def solve_netlist(netlist: Netlist) -> ModeSolution:
    return normal_modes(linearize(netlist))


__all__ = [
    "Branch",
    "Netlist",
    "load_netlist",
    "parse_netlist",
    "LinearizedMatrices",
    "build_matrices",
    "solve_dc_phases",
    "ModeSolution",
    "normal_modes",
    "symmetric_ring_modes",
    "get_preset",
    "list_presets",
    "linearize",
    "solve_netlist",
]
