"""Full Kerr analysis of a netlist and its dependence on the loop flux."""

import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from multimon.circuit import linearize, normal_modes
from multimon.circuit.modes import ModeSolution
from multimon.circuit.netlist import Netlist
from multimon.errors import DomainError
from multimon.kerr.expansion import expand_potential
from multimon.kerr.extraction import KerrTensor, extract_kerr

logger = logging.getLogger(__name__)


def analyze_kerr(
    netlist: Netlist,
    order: int = 4,
    second_order: bool = False,
) -> Tuple[ModeSolution, KerrTensor]:
    """DC phases, linear modes, potential expansion and Kerr extraction in one call."""
    matrices = linearize(netlist)
    modes = normal_modes(matrices)
    expansion = expand_potential(netlist, modes, order=order, matrices=matrices)
    return modes, extract_kerr(expansion, modes, second_order=second_order)


@dataclass(frozen=True, eq=False)
class SweepPoint:
    flux_phi0: float
    modes: ModeSolution
    kerr: KerrTensor


def flux_sweep(
    netlist: Netlist,
    flux_grid: Sequence[float],
    order: int = 4,
    second_order: bool = False,
    workers: Optional[int] = None,
) -> List[SweepPoint]:
    """
    Re-solve the device at every flux value.

    Points are independent; with ``workers`` > 1 they run in a thread pool and
    are returned in grid order.

    Raises:
        DomainError: empty grid
        FluxTooLargeError, TopologyError: from the DC-phase solve
    """
    grid = [float(value) for value in flux_grid]
    if not grid:
        raise DomainError("Flux grid is empty")

    def solve(flux: float) -> SweepPoint:
        modes, kerr = analyze_kerr(netlist.with_flux(flux), order=order, second_order=second_order)
        logger.info(
            f"Flux {flux:+.4f} Phi0: "
            + ", ".join(f"f_{l}={f:.4f}" for l, f in zip(kerr.labels, kerr.qubit_frequencies()))
        )
        return SweepPoint(flux_phi0=flux, modes=modes, kerr=kerr)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(solve, grid))
    return [solve(flux) for flux in grid]


def _pairs(count: int) -> List[Tuple[int, int]]:
    if count == 3:
        return [(0, 1), (1, 2), (2, 0)]
    return [(a, b) for a in range(count) for b in range(a + 1, count)]


def sweep_rows(points: Sequence[SweepPoint]) -> Tuple[List[str], List[List[float]]]:
    """Header and rows in the flux-sweep CSV layout, columns ordered by mode letter."""
    first = points[0].kerr
    order = sorted(range(first.count), key=lambda k: first.labels[k])
    letters = [first.labels[k] for k in order]
    pairs = _pairs(len(order))

    header = ["flux_phi0"]
    header += [f"f_{l}" for l in letters]
    header += [f"alpha_{l}" for l in letters]
    header += [f"J_{letters[a]}{letters[b]}" for a, b in pairs]
    if len(order) >= 3:
        header.append("xi_" + "".join(letters[:3]))

    rows = []
    for point in points:
        kerr = point.kerr
        idx = [kerr.labels.index(l) for l in letters]
        row = [point.flux_phi0]
        row += [float(kerr.qubit_frequencies()[k]) for k in idx]
        row += [float(kerr.anharmonicities[k]) for k in idx]
        row += [float(kerr.cross_kerr[idx[a], idx[b]]) for a, b in pairs]
        if len(order) >= 3:
            row.append(kerr.xi_abc)
        rows.append(row)
    return header, rows


def write_sweep_csv(points: Sequence[SweepPoint], path: Union[str, Path, None] = None) -> str:
    """Render the sweep as CSV (GHz); also written to ``path`` when given."""
    header, rows = sweep_rows(points)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([f"{row[0]:.6g}"] + [f"{value:.9g}" for value in row[1:]])
    text = buffer.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def flux_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive grid start, start + step, ..., stop."""
    if step <= 0 or stop < start:
        raise DomainError(f"Empty flux range {start}:{stop}:{step}")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)
