import numpy as np
import pytest

from multimon.circuit import Branch, Netlist, linearize, normal_modes
from multimon.circuit.presets import four_node_ring, symmetric_ring
from multimon.errors import DomainError
from multimon.kerr import (
    KerrTensor,
    analyze_kerr,
    build_level_diagram,
    expand_potential,
    extract_kerr,
    flux_grid,
    flux_sweep,
    write_sweep_csv,
)
from multimon.kerr.oracle import brute_force_spectrum, quartic_coefficient
from multimon.kerr.sweep import sweep_rows
from tests.conftest import by_letter


def single_transmon() -> Netlist:
    return Netlist(
        nodes=2,
        branches=[Branch(i=0, j=1, ej_ghz=20.0, c_ff=80.0)],
        ground_caps_ff=[0.01, 0.02],
    )


def oracle_tolerance(kerr: KerrTensor) -> np.ndarray:
    return np.maximum(0.002, 0.01 * np.abs(kerr.anharmonicities))


class TestPotentialExpansion:
    def test_quadratic_part_is_linear_spectrum(self, design_netlist, design_matrices):
        modes = normal_modes(design_matrices)
        expansion = expand_potential(design_netlist, modes, order=4, matrices=design_matrices)
        for k in range(modes.count):
            exponent = tuple(2 * int(m == k) for m in range(modes.count))
            assert expansion.coefficient(exponent) == pytest.approx(modes.omegas[k] ** 2 / 2, rel=1e-8)
        mixed = expansion.coefficient((1, 1, 0))
        assert abs(mixed) < 1e-8 * modes.omegas.max() ** 2

    @pytest.mark.parametrize("flux", [0.0, 0.15])
    def test_quartic_matches_finite_difference(self, design_netlist, flux):
        netlist = design_netlist.with_flux(flux)
        matrices = linearize(netlist)
        modes = normal_modes(matrices)
        expansion = expand_potential(netlist, modes, order=4, matrices=matrices)
        for k in range(modes.count):
            exponent = tuple(4 * int(m == k) for m in range(modes.count))
            expected = quartic_coefficient(netlist, modes, k, step=0.02, matrices=matrices)
            assert expansion.coefficient(exponent) == pytest.approx(expected, rel=2e-3)

    def test_no_cubic_terms_at_zero_flux(self, symmetric_netlist):
        matrices = linearize(symmetric_netlist)
        modes = normal_modes(matrices)
        expansion = expand_potential(symmetric_netlist, modes, order=6, matrices=matrices)
        assert expansion.terms(3) == {}
        assert expansion.terms(5) == {}
        assert expansion.terms(6)

    def test_rejects_odd_order(self, symmetric_netlist):
        modes = normal_modes(linearize(symmetric_netlist))
        with pytest.raises(DomainError):
            expand_potential(symmetric_netlist, modes, order=5)


class TestKerrExtraction:
    def test_design_table_frequencies(self, design_analysis):
        modes, kerr = design_analysis
        np.testing.assert_allclose(
            by_letter(modes, kerr.qubit_frequencies()), [5.244, 4.773, 6.059], rtol=0.02
        )

    def test_design_table_anharmonicities(self, design_analysis):
        modes, kerr = design_analysis
        np.testing.assert_allclose(
            by_letter(modes, kerr.anharmonicities), [-0.120, -0.114, -0.151], rtol=0.10
        )

    def test_design_table_cross_kerr(self, design_analysis):
        _, kerr = design_analysis
        assert kerr.cross("A", "B") == pytest.approx(0.081, rel=0.10)
        assert kerr.cross("B", "C") == pytest.approx(0.099, rel=0.10)
        assert kerr.cross("C", "A") == pytest.approx(0.117, rel=0.10)
        np.testing.assert_allclose(kerr.cross_kerr, kerr.cross_kerr.T)

    def test_symmetric_trimon_frequencies(self, symmetric_analysis):
        modes, kerr = symmetric_analysis
        np.testing.assert_allclose(
            by_letter(modes, kerr.qubit_frequencies()), [5.338, 4.778, 6.156], rtol=0.01
        )

    def test_no_three_wave_term_at_zero_flux(self, symmetric_analysis):
        _, kerr = symmetric_analysis
        assert kerr.xi_abc == 0.0

    def test_three_wave_term_with_flux(self, symmetric_netlist):
        _, kerr = analyze_kerr(symmetric_netlist.with_flux(0.1))
        assert kerr.xi_abc != 0.0

    def test_kerr_even_in_flux(self, design_netlist):
        _, positive = analyze_kerr(design_netlist.with_flux(0.12))
        _, negative = analyze_kerr(design_netlist.with_flux(-0.12))
        np.testing.assert_allclose(negative.qubit_frequencies(), positive.qubit_frequencies(), rtol=1e-10)
        np.testing.assert_allclose(negative.self_kerr, positive.self_kerr, rtol=1e-10)
        np.testing.assert_allclose(negative.cross_kerr, positive.cross_kerr, rtol=1e-10, atol=1e-14)
        assert abs(negative.xi_abc) == pytest.approx(abs(positive.xi_abc), rel=1e-8)

    def test_bc_asymmetry_leaves_mode_a(self, symmetric_analysis):
        modes, kerr = symmetric_analysis
        eta = 0.05
        skewed = four_node_ring(
            [9.0 * (1 + eta), 9.0 * (1 - eta), 9.0 * (1 + eta), 9.0 * (1 - eta)],
            [36.0] * 4, 12.0, 24.0,
        )
        skewed_modes, skewed_kerr = analyze_kerr(skewed)
        a, skewed_a = modes.index("A"), skewed_modes.index("A")
        assert skewed_kerr.qubit_frequencies()[skewed_a] == pytest.approx(
            kerr.qubit_frequencies()[a], rel=1e-8
        )
        assert skewed_kerr.anharmonicities[skewed_a] == pytest.approx(kerr.anharmonicities[a], rel=1e-8)

    def test_sixth_order_close_to_fourth(self, design_netlist, design_analysis):
        _, quartic = design_analysis
        _, sextic = analyze_kerr(design_netlist, order=6)
        np.testing.assert_allclose(sextic.self_kerr, quartic.self_kerr, rtol=0.15)


class TestOracle:
    """Normal-ordered extraction against exact diagonalization of the full cosine."""

    def test_single_transmon(self):
        netlist = single_transmon()
        matrices = linearize(netlist)
        modes = normal_modes(matrices)
        assert modes.labels == ("A",)
        kerr = extract_kerr(expand_potential(netlist, modes, order=6, matrices=matrices), modes, second_order=True)
        diagram = build_level_diagram(kerr)
        exact = brute_force_spectrum(netlist, modes, matrices, levels=10, padding=30).single_excitations()
        assert abs(diagram.transition("A") - exact[0]) <= oracle_tolerance(kerr)[0]

    def test_design_table_trimon(self, design_netlist, design_matrices):
        modes = normal_modes(design_matrices)
        expansion = expand_potential(design_netlist, modes, order=6, matrices=design_matrices)
        kerr = extract_kerr(expansion, modes, second_order=True)
        diagram = build_level_diagram(kerr)
        exact = brute_force_spectrum(design_netlist, modes, design_matrices, levels=10, padding=30)
        tolerance = oracle_tolerance(kerr)
        zero_labels = {"A": "AB0C0", "B": "BC0A0", "C": "CA0B0"}
        for k, label in enumerate(modes.labels):
            line = diagram.transition(zero_labels[label])
            assert abs(line - exact.single_excitations()[k]) <= tolerance[k]

    @pytest.mark.slow
    def test_randomized_rings(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            netlist = four_node_ring(
                rng.uniform(7.0, 10.0, 4),
                rng.uniform(30.0, 40.0, 4),
                rng.uniform(5.0, 25.0),
                rng.uniform(5.0, 25.0),
            )
            matrices = linearize(netlist)
            modes = normal_modes(matrices)
            expansion = expand_potential(netlist, modes, order=6, matrices=matrices)
            kerr = extract_kerr(expansion, modes, second_order=True)
            exact = brute_force_spectrum(netlist, modes, matrices, levels=10, padding=30)
            diagram = build_level_diagram(kerr)
            zero_labels = {"A": "AB0C0", "B": "BC0A0", "C": "CA0B0"}
            tolerance = oracle_tolerance(kerr)
            for k, label in enumerate(modes.labels):
                line = diagram.transition(zero_labels[label])
                assert abs(line - exact.single_excitations()[k]) <= tolerance[k]


class TestLevelDiagram:
    def test_conditional_shift_is_cross_kerr(self, design_analysis, design_diagram):
        _, kerr = design_analysis
        shift = design_diagram.transition("AB1C0") - design_diagram.transition("AB0C0")
        assert shift == pytest.approx(-2.0 * kerr.cross("A", "B"), rel=1e-9)
        assert shift == pytest.approx(-0.162, rel=0.10)

    def test_twelve_computational_lines(self, design_diagram):
        assert len(design_diagram.transitions) == 12
        assert set(design_diagram.transitions) >= {"AB0C0", "BC1A0", "CA1B1"}
        assert design_diagram.leakage_transitions

    def test_pairwise_energy(self, design_analysis):
        _, kerr = design_analysis
        diagram = build_level_diagram(kerr, include_three_body=False)
        singles = sum(diagram.energy(s) for s in [(1, 0, 0), (0, 1, 0), (0, 0, 1)])
        pairs = kerr.cross("A", "B") + kerr.cross("B", "C") + kerr.cross("C", "A")
        assert diagram.energy((1, 1, 1)) == pytest.approx(singles - 2.0 * pairs, rel=1e-12)

    def test_uncoupled_modes_have_bare_lines(self):
        kerr = KerrTensor(
            labels=("A", "B", "C"),
            frequencies=np.array([5.0, 4.8, 6.0]),
            self_kerr=np.zeros(3),
            cross_kerr=np.zeros((3, 3)),
            three_body=np.zeros((3, 3, 3)),
            three_wave={},
            beta=np.zeros(3),
            frequency_shift=np.zeros(3),
        )
        diagram = build_level_diagram(kerr)
        for label, frequency in diagram.transitions.items():
            assert frequency == pytest.approx({"A": 5.0, "B": 4.8, "C": 6.0}[label[0]], abs=1e-12)

    def test_rejects_zero_occupation(self, design_analysis):
        _, kerr = design_analysis
        with pytest.raises(DomainError):
            build_level_diagram(kerr, max_occupation=0)


class TestFluxSweep:
    def test_grid_is_inclusive(self):
        grid = flux_grid(0.0, 0.25, 0.05)
        assert len(grid) == 6
        assert grid[-1] == pytest.approx(0.25)

    @pytest.mark.parametrize("start,stop,step", [(0.1, 0.0, 0.05), (0.0, 0.2, 0.0)])
    def test_empty_grid(self, start, stop, step):
        with pytest.raises(DomainError):
            flux_grid(start, stop, step)

    def test_sweep_rejects_empty_grid(self, symmetric_netlist):
        with pytest.raises(DomainError):
            flux_sweep(symmetric_netlist, [])

    def test_symmetric_trimon_sweep(self, symmetric_netlist):
        points = flux_sweep(symmetric_netlist, flux_grid(0.0, 0.25, 0.05), workers=2)
        assert [p.flux_phi0 for p in points] == pytest.approx(list(flux_grid(0.0, 0.25, 0.05)))

        first = points[0].kerr
        for point in points[1:]:
            np.testing.assert_allclose(point.kerr.self_kerr, first.self_kerr, rtol=0.005)
            np.testing.assert_allclose(point.kerr.cross_kerr, first.cross_kerr, rtol=0.005, atol=1e-12)

        xi = np.abs([point.kerr.xi_abc for point in points])
        assert xi[0] == pytest.approx(0.0, abs=1e-12)
        assert np.all(np.diff(xi) > 0)

        frequencies = np.array([point.kerr.qubit_frequencies() for point in points])
        assert np.all(np.diff(frequencies, axis=0) < 0)

    def test_sweep_symmetric_about_zero_flux(self, symmetric_netlist):
        points = flux_sweep(symmetric_netlist, flux_grid(-0.25, 0.25, 0.05))
        assert len(points) == 11
        for low, high in zip(points, reversed(points)):
            assert low.flux_phi0 == pytest.approx(-high.flux_phi0, abs=1e-12)
            np.testing.assert_allclose(low.kerr.qubit_frequencies(), high.kerr.qubit_frequencies(), rtol=1e-10)
            np.testing.assert_allclose(low.kerr.self_kerr, high.kerr.self_kerr, rtol=1e-10)
            assert abs(low.kerr.xi_abc) == pytest.approx(abs(high.kerr.xi_abc), rel=1e-8, abs=1e-12)

    def test_csv_layout(self, symmetric_netlist, tmp_path):
        points = flux_sweep(symmetric_netlist, [0.0, 0.1])
        header, rows = sweep_rows(points)
        assert header == [
            "flux_phi0", "f_A", "f_B", "f_C", "alpha_A", "alpha_B", "alpha_C",
            "J_AB", "J_BC", "J_CA", "xi_ABC",
        ]
        assert len(rows) == 2
        path = tmp_path / "sweep.csv"
        text = write_sweep_csv(points, path)
        assert path.read_text() == text
        assert text.splitlines()[0] == ",".join(header)

    def test_five_node_ring_has_four_modes(self):
        modes, kerr = analyze_kerr(symmetric_ring(5))
        assert modes.count == 4
        assert kerr.cross_kerr.shape == (4, 4)
