"""Joint dispersive readout: per-state signal histograms and 000/111 assignment."""

import csv
import io
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from multimon.config.settings import solver_settings
from multimon.errors import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ReadoutResult:
    """
    Sampled readout of every basis state.

    ``assignment[i, j]`` is the probability that a kept shot prepared in the
    i-th of (000, 111) is classified as the j-th; ``discard_fraction`` counts
    shots falling between the demarcations.
    """

    means: Dict[str, float]
    sigma: float
    counts: Dict[str, Tuple[int, int, int]]
    histograms: Dict[str, np.ndarray]
    bin_edges: np.ndarray
    demarcations: Tuple[float, float]
    assignment: np.ndarray
    discard_fraction: Dict[str, float]

    @property
    def assignment_error(self) -> float:
        return float(0.5 * (self.assignment[0, 1] + self.assignment[1, 0]))

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["state", "label_mean", "sigma", "count_below", "count_between", "count_above"])
        for state, mean in self.means.items():
            writer.writerow([state, f"{mean:.9g}", f"{self.sigma:.6g}", *self.counts[state]])
        return buffer.getvalue()


def response_mean(chi_mhz: float, drive_detuning_mhz: float, kappa_mhz: Optional[float] = None) -> float:
    """Measurement-axis signal Re[kappa / (kappa + 2i (Delta_read - 2 chi))]."""
    kappa = solver_settings.cavity_linewidth_mhz if kappa_mhz is None else kappa_mhz
    return float(np.real(kappa / (kappa + 2j * (drive_detuning_mhz - 2.0 * chi_mhz))))


def state_means(
    chi_map: Dict[str, float],
    drive_detuning_mhz: float,
    kappa_mhz: Optional[float] = None,
) -> Dict[str, float]:
    """Signal means of all basis states; the ground state has zero shift."""
    count = len(next(iter(chi_map)))
    shifts = {"0" * count: 0.0, **chi_map}
    return {state: response_mean(chi, drive_detuning_mhz, kappa_mhz) for state, chi in sorted(shifts.items())}


def default_demarcations(means: Dict[str, float]) -> Tuple[float, float]:
    """Thresholds halfway between the 000/111 signals and the nearest intermediate state."""
    count = len(next(iter(means)))
    low_state, high_state = "0" * count, "1" * count
    ordered = sorted((means[low_state], means[high_state]))
    inner = [m for s, m in means.items() if s not in (low_state, high_state)]
    if not inner:
        midpoint = 0.5 * sum(ordered)
        return midpoint, midpoint
    lower = 0.5 * (ordered[0] + min(inner))
    upper = 0.5 * (ordered[1] + max(inner))
    return (lower, upper) if lower <= upper else (upper, lower)


def readout_histograms(
    chi_map: Dict[str, float],
    drive_detuning_mhz: float,
    noise_sigma: float,
    shots: int,
    demarcations: Sequence[float],
    kappa_mhz: Optional[float] = None,
    rng: Optional[np.random.Generator] = None,
    bins: int = 100,
) -> ReadoutResult:
    """
    Sample Gaussian readout signals for every basis state.

    The state whose mean lies on the lower side of the other is classified
    'below' the lower demarcation, the other 'above' the upper one.

    Raises:
        DomainError: non-positive shots or noise, or lower demarcation above the upper
    """
    if shots <= 0:
        raise DomainError(f"shots must be positive, got {shots}")
    if noise_sigma <= 0:
        raise DomainError(f"noise_sigma must be positive, got {noise_sigma}")
    lower, upper = (float(v) for v in demarcations)
    if lower > upper:
        raise DomainError(f"Demarcations out of order: {lower} > {upper}")
    rng = rng if rng is not None else np.random.default_rng()

    means = state_means(chi_map, drive_detuning_mhz, kappa_mhz)
    count = len(next(iter(means)))
    low_state, high_state = "0" * count, "1" * count

    span = [min(means.values()) - 5 * noise_sigma, max(means.values()) + 5 * noise_sigma]
    edges = np.linspace(span[0], span[1], bins + 1)
    samples = {state: rng.normal(mean, noise_sigma, size=shots) for state, mean in means.items()}
    counts = {}
    histograms = {}
    for state, signal in samples.items():
        below = int(np.count_nonzero(signal < lower))
        above = int(np.count_nonzero(signal > upper))
        counts[state] = (below, shots - below - above, above)
        histograms[state] = np.histogram(signal, bins=edges)[0]

    ground_is_low = means[low_state] <= means[high_state]
    assignment = np.zeros((2, 2))
    discard = {}
    for row, state in enumerate((low_state, high_state)):
        below, between, above = counts[state]
        kept = below + above
        as_ground, as_excited = (below, above) if ground_is_low else (above, below)
        if kept:
            assignment[row] = (as_ground / kept, as_excited / kept)
        discard[state] = between / shots
    for state, (_, between, _) in counts.items():
        discard.setdefault(state, between / shots)

    result = ReadoutResult(
        means=means,
        sigma=noise_sigma,
        counts=counts,
        histograms=histograms,
        bin_edges=edges,
        demarcations=(lower, upper),
        assignment=assignment,
        discard_fraction=discard,
    )
    logger.info(
        f"Readout over {shots} shots: assignment error {result.assignment_error:.4f}, "
        f"discard {discard[low_state]:.3f}/{discard[high_state]:.3f}"
    )
    return result


def sample_extreme_populations(
    populations: Dict[str, float],
    chi_map: Dict[str, float],
    drive_detuning_mhz: float,
    noise_sigma: float,
    shots: int,
    rng: np.random.Generator,
    demarcations: Optional[Sequence[float]] = None,
    kappa_mhz: Optional[float] = None,
) -> Tuple[float, float]:
    """
    Estimate P(0...0) and P(1...1) from sampled single-shot signals of a
    mixture of basis states, using the demarcation classifier.
    """
    means = state_means(chi_map, drive_detuning_mhz, kappa_mhz)
    lower, upper = demarcations if demarcations is not None else default_demarcations(means)
    count = len(next(iter(means)))
    low_state, high_state = "0" * count, "1" * count

    states = sorted(means)
    weights = np.clip([populations.get(s, 0.0) for s in states], 0.0, None)
    weights = weights / weights.sum()
    drawn = rng.choice(len(states), size=shots, p=weights)
    signal = rng.normal(np.array([means[s] for s in states])[drawn], noise_sigma)

    below = np.count_nonzero(signal < lower) / shots
    above = np.count_nonzero(signal > upper) / shots
    if means[low_state] <= means[high_state]:
        return below, above
    return above, below
