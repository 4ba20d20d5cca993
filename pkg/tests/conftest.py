import numpy as np
import pytest

from multimon.circuit import linearize, normal_modes
from multimon.circuit.presets import trimon_design_table, trimon_symmetric
from multimon.kerr import analyze_kerr, build_level_diagram
from multimon.pulsesim.system import TrimonSystem


@pytest.fixture
def symmetric_netlist():
    return trimon_symmetric()


@pytest.fixture
def design_netlist():
    return trimon_design_table()


@pytest.fixture(scope="session")
def symmetric_analysis():
    """(modes, kerr) of the symmetric trimon at zero flux."""
    return analyze_kerr(trimon_symmetric())


@pytest.fixture(scope="session")
def design_analysis():
    """(modes, kerr) of the design-table trimon at zero flux."""
    return analyze_kerr(trimon_design_table())


@pytest.fixture(scope="session")
def design_matrices():
    return linearize(trimon_design_table())


@pytest.fixture(scope="session")
def design_diagram(design_analysis):
    _, kerr = design_analysis
    return build_level_diagram(kerr)


@pytest.fixture(scope="session")
def design_system(design_analysis):
    _, kerr = design_analysis
    return TrimonSystem.from_kerr(kerr, levels=3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def by_letter(modes, values):
    """Reorder a per-mode array into qubit-letter order."""
    return np.asarray(values)[modes.qubit_order()]


def centered_shape(modes, label):
    shape = modes.shape(modes.index(label))
    shape = shape - shape.mean()
    return shape / np.linalg.norm(shape)


def modes_of(netlist):
    return normal_modes(linearize(netlist))
