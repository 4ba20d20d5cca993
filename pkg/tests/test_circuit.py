import numpy as np
import pytest

from multimon.circuit import (
    Branch,
    Netlist,
    build_matrices,
    get_preset,
    linearize,
    list_presets,
    load_netlist,
    normal_modes,
    parse_netlist,
    solve_dc_phases,
    symmetric_ring_modes,
)
from multimon.circuit.modes import TRIMON_SHAPES
from multimon.circuit.presets import linear_chain, symmetric_ring
from multimon.errors import (
    ConfigurationError,
    DomainError,
    FluxTooLargeError,
    InstabilityError,
    NetlistParseError,
    TopologyError,
)
from tests.conftest import centered_shape, modes_of


class TestNetlist:
    """Netlist validation and the JSON document format."""

    def test_self_loop_rejected(self):
        with pytest.raises(ConfigurationError) as excinfo:
            Netlist(nodes=2, branches=[Branch(i=1, j=1, ej_ghz=9.0)], ground_caps_ff=[1.0, 1.0])
        assert excinfo.value.node == 1

    def test_node_out_of_range(self):
        with pytest.raises(ConfigurationError):
            Netlist(nodes=2, branches=[Branch(i=0, j=2, c_ff=10.0)], ground_caps_ff=[1.0, 1.0])

    def test_duplicate_pair(self):
        with pytest.raises(ConfigurationError):
            Netlist(
                nodes=2,
                branches=[Branch(i=0, j=1, c_ff=10.0), Branch(i=1, j=0, ej_ghz=9.0)],
                ground_caps_ff=[1.0, 1.0],
            )

    def test_ground_caps_length(self):
        with pytest.raises(ConfigurationError):
            Netlist(nodes=3, branches=[], ground_caps_ff=[1.0, 1.0])

    def test_negative_ground_cap(self):
        with pytest.raises(ConfigurationError) as excinfo:
            Netlist(nodes=2, branches=[], ground_caps_ff=[1.0, -1.0])
        assert excinfo.value.node == 1

    def test_json_round_trip(self, tmp_path, design_netlist):
        path = tmp_path / "device.json"
        design_netlist.to_json(path)
        assert load_netlist(path) == design_netlist

    def test_malformed_json_reports_line(self):
        with pytest.raises(NetlistParseError) as excinfo:
            parse_netlist('{\n  "nodes": 2,\n  oops\n}', source="bad.json")
        assert excinfo.value.line == 3
        assert str(excinfo.value).startswith("bad.json:3:")

    def test_invalid_field(self):
        with pytest.raises(NetlistParseError):
            parse_netlist('{"nodes": 1, "ground_caps_ff": [1.0]}')

    def test_invariant_violation_becomes_parse_error(self):
        text = '{"nodes": 2, "branches": [{"i": 0, "j": 0}], "ground_caps_ff": [1, 1]}'
        with pytest.raises(NetlistParseError):
            parse_netlist(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(NetlistParseError):
            load_netlist(tmp_path / "absent.json")

    def test_ring_order(self, symmetric_netlist):
        assert symmetric_netlist.ring_order() == [0, 1, 2, 3]
        assert linear_chain().ring_order() is None


class TestPresets:
    def test_listed_presets_build(self):
        names = list_presets()
        assert names == sorted(names)
        assert "trimon-design-table" in names
        for name in names:
            assert get_preset(name).nodes >= 4

    def test_unknown_preset(self):
        with pytest.raises(DomainError):
            get_preset("heptamon")


class TestMatrices:
    def test_inductive_matrix_of_symmetric_trimon(self, symmetric_netlist):
        el = build_matrices(symmetric_netlist).EL
        assert el[0, 0] == pytest.approx(18.0)
        assert el[0, 1] == pytest.approx(-9.0)
        assert el[0, 2] == 0.0
        assert el[1, 3] == 0.0
        np.testing.assert_allclose(el.sum(axis=1), 0.0, atol=1e-12)

    def test_capacitance_matrix_symmetric(self, design_netlist):
        cmat = build_matrices(design_netlist).Cmat
        np.testing.assert_allclose(cmat, cmat.T)
        assert cmat[0, 2] == pytest.approx(-11.2)
        assert cmat[1, 3] == pytest.approx(-19.1)

    def test_floating_node_reported(self):
        netlist = Netlist(
            nodes=3,
            branches=[Branch(i=0, j=1, ej_ghz=9.0, c_ff=10.0)],
            ground_caps_ff=[1.0, 1.0, 0.0],
        )
        with pytest.raises(ConfigurationError) as excinfo:
            build_matrices(netlist)
        assert excinfo.value.node == 2

    def test_singular_without_isolated_node(self):
        netlist = Netlist(
            nodes=2,
            branches=[Branch(i=0, j=1, ej_ghz=9.0, c_ff=10.0)],
            ground_caps_ff=[0.0, 0.0],
        )
        with pytest.raises(ConfigurationError, match="leading minor of order 2") as excinfo:
            build_matrices(netlist)
        assert excinfo.value.node is None

    def test_wrong_phase_count(self, symmetric_netlist):
        with pytest.raises(ConfigurationError):
            build_matrices(symmetric_netlist, dc_phases=[0.0, 0.0])

    def test_negative_effective_ej(self, symmetric_netlist):
        with pytest.raises(InstabilityError):
            build_matrices(symmetric_netlist, dc_phases=[2.0, 0.0, 0.0, 0.0])

    def test_effective_ej_follows_flux(self, symmetric_netlist):
        matrices = linearize(symmetric_netlist.with_flux(0.2))
        np.testing.assert_allclose(matrices.effective_ej, 9.0 * np.cos(0.1 * np.pi), rtol=1e-10)


class TestDcPhases:
    def test_zero_flux(self, design_netlist):
        np.testing.assert_array_equal(solve_dc_phases(design_netlist), np.zeros(4))

    def test_equal_junctions_split_evenly(self, symmetric_netlist):
        phases = solve_dc_phases(symmetric_netlist.with_flux(0.25))
        np.testing.assert_allclose(phases, np.pi / 8, atol=1e-12)

    def test_current_matching(self, design_netlist):
        phases = solve_dc_phases(design_netlist.with_flux(0.1))
        ej = np.array([b.ej_ghz for b in design_netlist.inductive_branches])
        currents = ej * np.sin(phases)
        np.testing.assert_allclose(currents, currents[0], atol=1e-12)
        assert phases.sum() == pytest.approx(0.2 * np.pi, abs=1e-12)

    def test_open_chain_rejects_flux(self):
        with pytest.raises(TopologyError):
            solve_dc_phases(linear_chain().with_flux(0.1))

    def test_flux_beyond_critical(self, symmetric_netlist):
        with pytest.raises(FluxTooLargeError):
            solve_dc_phases(symmetric_netlist.with_flux(1.2))

    @pytest.mark.parametrize("flux", [0.05, 0.1, 0.25])
    def test_negative_flux_mirrors_positive(self, design_netlist, flux):
        positive = solve_dc_phases(design_netlist.with_flux(flux))
        negative = solve_dc_phases(design_netlist.with_flux(-flux))
        np.testing.assert_allclose(negative, -positive, atol=1e-12)
        assert negative.sum() == pytest.approx(-2 * np.pi * flux, abs=1e-12)

    def test_negative_flux_beyond_critical(self, symmetric_netlist):
        with pytest.raises(FluxTooLargeError):
            solve_dc_phases(symmetric_netlist.with_flux(-1.2))


class TestNormalModes:
    """Linear mode solution of the ring circuits."""

    def test_single_zero_mode(self, design_netlist):
        modes = modes_of(design_netlist)
        assert modes.count == 3
        assert modes.zero_mode_vectors.shape == (4, 1)
        np.testing.assert_allclose(modes.zero_mode_vectors[:, 0], 0.5, atol=1e-6)

    def test_mass_orthonormal(self, design_netlist):
        modes = modes_of(design_netlist)
        gram = modes.mode_matrix.T @ modes.mass @ modes.mode_matrix
        np.testing.assert_allclose(gram, np.eye(3), atol=1e-9)

    def test_diagonalizes_stiffness(self, design_netlist):
        modes = modes_of(design_netlist)
        projected = modes.mode_matrix.T @ modes.stiffness @ modes.mode_matrix
        np.testing.assert_allclose(projected, np.diag(modes.omegas ** 2), atol=1e-8)

    def test_symmetric_trimon_shapes(self, symmetric_netlist):
        modes = modes_of(symmetric_netlist)
        assert sorted(modes.labels) == ["A", "B", "C"]
        for label, ideal in TRIMON_SHAPES.items():
            overlap = abs(centered_shape(modes, label) @ ideal) / np.linalg.norm(ideal)
            assert overlap == pytest.approx(1.0, abs=1e-10)

    def test_symmetric_trimon_frequencies(self, symmetric_netlist):
        modes = modes_of(symmetric_netlist)
        frequencies = {label: modes.frequencies[modes.index(label)] for label in "ABC"}
        assert frequencies["A"] == pytest.approx(5.39, rel=0.01)
        assert frequencies["B"] == pytest.approx(4.82, rel=0.01)
        assert frequencies["C"] == pytest.approx(6.22, rel=0.01)

    def test_permuted_nodes_same_frequencies(self, design_netlist):
        permutation = [2, 0, 3, 1]
        branches = [
            Branch(i=permutation[b.i], j=permutation[b.j], ej_ghz=b.ej_ghz, c_ff=b.c_ff)
            for b in design_netlist.branches
        ]
        grounds = [0.0] * 4
        for node, cap in enumerate(design_netlist.ground_caps_ff):
            grounds[permutation[node]] = cap
        permuted = Netlist(nodes=4, branches=branches, ground_caps_ff=grounds)
        np.testing.assert_allclose(
            np.sort(modes_of(permuted).frequencies),
            np.sort(modes_of(design_netlist).frequencies),
            rtol=1e-10,
        )

    @pytest.mark.parametrize("n", [4, 5, 6])
    def test_symmetric_ring_standing_waves(self, n):
        modes = normal_modes(linearize(symmetric_ring(n, ground_cap_ff=0.01)))
        references = symmetric_ring_modes(n)
        by_wave = {}
        for mu, vector in enumerate(references, start=1):
            by_wave.setdefault(int(np.ceil(mu / 2)), []).append(vector)
        projectors = [
            sum(np.outer(v, v) for v in vectors) for vectors in by_wave.values()
        ]
        for k in range(modes.count):
            shape = modes.shape(k)
            best = max(np.linalg.norm(projector @ shape) for projector in projectors)
            assert best == pytest.approx(1.0, abs=1e-8)

    def test_degenerate_pair_reported(self):
        modes = normal_modes(linearize(symmetric_ring(4)))
        assert modes.degenerate_groups
        assert modes.warnings

    def test_ring_mode_vectors(self):
        vectors = symmetric_ring_modes(4)
        np.testing.assert_allclose(vectors[0], np.array([1, 0, -1, 0]) / np.sqrt(2), atol=1e-12)
        np.testing.assert_allclose(vectors[1], np.array([0, 1, 0, -1]) / np.sqrt(2), atol=1e-12)
        np.testing.assert_allclose(vectors[2], np.array([1, -1, 1, -1]) / 2, atol=1e-12)
        for vector in symmetric_ring_modes(7):
            assert vector.sum() == pytest.approx(0.0, abs=1e-12)

    def test_ring_needs_three_nodes(self):
        with pytest.raises(DomainError):
            symmetric_ring_modes(2)
