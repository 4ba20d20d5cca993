"""Static junction phases induced by the external flux through a single loop."""

import logging
from typing import List, Tuple

import networkx as nx
import numpy as np
from scipy.optimize import brentq

from multimon.circuit.matrices import PHI0_SQ_OVER_NH_GHZ
from multimon.circuit.netlist import Netlist
from multimon.errors import FluxTooLargeError, TopologyError

logger = logging.getLogger(__name__)


def _loop_branches(netlist: Netlist) -> List[Tuple[int, int]]:
    """
    Indices (into ``inductive_branches``) and orientation signs of the branches
    on the flux-threaded loop, in traversal order.
    """
    graph = netlist.inductive_graph()
    cycles = nx.cycle_basis(graph)
    if len(cycles) != 1:
        raise TopologyError(
            f"External flux requires exactly one inductive loop, found {len(cycles)}"
        )
    # Canonical traversal: lowest node first, then toward its lower-numbered neighbour.
    cycle = cycles[0]
    start = cycle.index(min(cycle))
    cycle = cycle[start:] + cycle[:start]
    if len(cycle) > 2 and cycle[1] > cycle[-1]:
        cycle = [cycle[0]] + cycle[:0:-1]
    branches = netlist.inductive_branches
    loop = []
    for position, node in enumerate(cycle):
        following = cycle[(position + 1) % len(cycle)]
        index = graph.edges[node, following]["index"]
        sign = 1 if (branches[index].i, branches[index].j) == (node, following) else -1
        loop.append((index, sign))
    return loop


def _phase_for_current(current: float, ej: float, el: float) -> float:
    """Invert E_J sin(phi) + E_L phi = I on (-pi/2, pi/2)."""
    if el == 0.0:
        return float(np.arcsin(np.clip(current / ej, -1.0, 1.0)))
    return brentq(lambda phi: ej * np.sin(phi) + el * phi - current, -np.pi / 2, np.pi / 2, xtol=1e-15)


def solve_dc_phases(netlist: Netlist) -> np.ndarray:
    """
    Solve the current-matching conditions around the ring.

    Every branch on the loop carries the same current ``I = E_J sin(phi) + E_L phi``
    and the oriented drops add up to ``2 pi Phi_ext``. The shared current is
    bracketed and found with Brent's method, then polished with Newton steps.

    Returns:
        Phase drop (node i minus node j) for each inductive branch, in the order
        of ``netlist.inductive_branches``.

    Raises:
        TopologyError: flux on a circuit without exactly one inductive loop
        FluxTooLargeError: the flux cannot be accommodated with |phi| < pi/2
    """
    branches = netlist.inductive_branches
    phases = np.zeros(len(branches))
    if netlist.flux_phi0 == 0.0:
        return phases

    loop = _loop_branches(netlist)
    ej = np.array([branches[k].ej_ghz for k, _ in loop])
    el = np.array([
        PHI0_SQ_OVER_NH_GHZ / branches[k].l_nh if branches[k].l_nh else 0.0 for k, _ in loop
    ])
    target = 2.0 * np.pi * netlist.flux_phi0

    current_max = float(np.min(ej + el * np.pi / 2))

    def drops(current: float) -> np.ndarray:
        return np.array([_phase_for_current(current, a, b) for a, b in zip(ej, el)])

    def mismatch(current: float) -> float:
        return float(np.sum(drops(current)) - target)

    # drops() is odd in the current, so one bound covers both flux signs
    if abs(target) >= np.sum(drops(current_max)):
        raise FluxTooLargeError(
            f"Flux {netlist.flux_phi0:+.4f} Phi0 has no solution with all |phi| < pi/2"
        )

    current = brentq(mismatch, -current_max, current_max, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    for _ in range(3):
        psi = drops(current)
        slope = np.sum(1.0 / (ej * np.cos(psi) + el))
        current -= (np.sum(psi) - target) / slope

    psi = drops(current)
    residual = max(
        abs(np.sum(psi) - target),
        float(np.max(np.abs(ej * np.sin(psi) + el * psi - current))),
    )
    if residual > 1e-12:
        logger.warning(f"DC phase residual {residual:.2e} above 1e-12")

    for (k, sign), value in zip(loop, psi):
        phases[k] = sign * value
    logger.info(f"DC phases at {netlist.flux_phi0:+.4f} Phi0: {np.round(phases, 6).tolist()}")
    return phases
