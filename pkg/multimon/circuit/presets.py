"""Shipped device netlists."""

import logging
from typing import Callable, Dict, List, Sequence

from multimon.circuit.netlist import Branch, Netlist
from multimon.errors import DomainError

logger = logging.getLogger(__name__)

ALTERNATING_GROUND_FF = (0.01, 0.02)


def alternating_ground(n: int) -> List[float]:
    return [ALTERNATING_GROUND_FF[k % 2] for k in range(n)]


def four_node_ring(
    ej_ghz: Sequence[float],
    nn_caps_ff: Sequence[float],
    c13_ff: float,
    c24_ff: float,
    ground_caps_ff: Sequence[float] = None,
    flux_phi0: float = 0.0,
) -> Netlist:
    """Trimon ring: junctions and capacitors on bonds 12, 23, 34, 41 plus the two diagonals."""
    bonds = [(0, 1), (1, 2), (2, 3), (3, 0)]
    branches = [
        Branch(i=i, j=j, ej_ghz=ej, c_ff=c) for (i, j), ej, c in zip(bonds, ej_ghz, nn_caps_ff)
    ]
    branches.append(Branch(i=0, j=2, c_ff=c13_ff))
    branches.append(Branch(i=1, j=3, c_ff=c24_ff))
    return Netlist(
        nodes=4,
        branches=branches,
        ground_caps_ff=list(ground_caps_ff or alternating_ground(4)),
        flux_phi0=flux_phi0,
    )


def symmetric_ring(
    n: int,
    ej_ghz: float = 9.0,
    nn_cap_ff: float = 36.0,
    ground_cap_ff: float = 0.01,
) -> Netlist:
    """n-fold symmetric ring; capacitance between nodes d bonds apart is nn_cap/d."""
    branches = []
    for i in range(n):
        for j in range(i + 1, n):
            distance = min(j - i, n - (j - i))
            branches.append(Branch(
                i=i,
                j=j,
                ej_ghz=ej_ghz if distance == 1 else 0.0,
                c_ff=nn_cap_ff / distance,
            ))
    return Netlist(nodes=n, branches=branches, ground_caps_ff=[ground_cap_ff] * n)


def trimon_symmetric() -> Netlist:
    return four_node_ring([9.0] * 4, [36.0] * 4, 12.0, 24.0)


def trimon_design_table() -> Netlist:
    return four_node_ring([8.794, 8.712, 8.042, 7.143], [34.0] * 4, 11.2, 19.1)


def open_ring() -> Netlist:
    """Trimon ring with node 0's pad split in two; the halves couple through a gap capacitor."""
    bonds = [(0, 1), (1, 2), (2, 3), (3, 4)]
    branches = [Branch(i=i, j=j, ej_ghz=9.0, c_ff=36.0) for i, j in bonds]
    branches += [
        Branch(i=0, j=4, c_ff=50.0),
        Branch(i=0, j=2, c_ff=6.0),
        Branch(i=2, j=4, c_ff=6.0),
        Branch(i=1, j=3, c_ff=24.0),
    ]
    return Netlist(nodes=5, branches=branches, ground_caps_ff=alternating_ground(5))


def linear_chain() -> Netlist:
    """The split ring unwrapped into a chain of five pads."""
    branches = [Branch(i=k, j=k + 1, ej_ghz=9.0, c_ff=36.0) for k in range(4)]
    return Netlist(nodes=5, branches=branches, ground_caps_ff=alternating_ground(5))


PRESETS: Dict[str, Callable[[], Netlist]] = {
    "trimon-symmetric": trimon_symmetric,
    "trimon-design-table": trimon_design_table,
    "ring5": lambda: symmetric_ring(5),
    "ring6": lambda: symmetric_ring(6),
    "open-ring": open_ring,
    "linear-chain": linear_chain,
}


def list_presets() -> List[str]:
    return sorted(PRESETS)


def get_preset(name: str) -> Netlist:
    """
    Build a preset netlist by name.

    Raises:
        DomainError: unknown preset name
    """
    factory = PRESETS.get(name)
    if factory is None:
        raise DomainError(f"Unknown preset: {name}. Available: {', '.join(list_presets())}")
    return factory()
