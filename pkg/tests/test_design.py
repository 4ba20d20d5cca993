import numpy as np
import pytest
from pydantic import ValidationError

from multimon.circuit.presets import four_node_ring, symmetric_ring, trimon_design_table, trimon_symmetric
from multimon.cqed import build_cavity_model
from multimon.design import (
    AsymmetrySpec,
    DesignTarget,
    apply_asymmetry,
    optimize_design,
    recover_asymmetry,
    validate_spacing,
)
from multimon.errors import ConfigurationError, DomainError
from multimon.kerr import analyze_kerr, build_level_diagram


def spacing_report(netlist, target=None):
    _, kerr = analyze_kerr(netlist)
    ej_min = min(b.ej_ghz for b in netlist.junctions)
    return validate_spacing(build_level_diagram(kerr), target or DesignTarget(), ej_min_ghz=ej_min)


class TestAsymmetry:
    def test_symmetric_spec_builds_symmetric_trimon(self):
        spec = AsymmetrySpec(ej_mean=9.0, c_mean=36.0, diagonal_caps=(12.0, 24.0))
        assert apply_asymmetry(spec) == trimon_symmetric()

    def test_recover_design_table(self):
        spec = recover_asymmetry(trimon_design_table())
        assert spec.ej_mean == pytest.approx(8.17275, rel=1e-9)
        assert spec.c_mean == pytest.approx(34.0)
        assert spec.diagonal_caps == pytest.approx((11.2, 19.1))
        rebuilt = apply_asymmetry(spec)
        np.testing.assert_allclose(
            [b.ej_ghz for b in rebuilt.junctions], [8.794, 8.712, 8.042, 7.143], rtol=1e-12
        )

    def test_bond_signs(self):
        spec = AsymmetrySpec(ej_mean=8.0, eta=(0.1, 0.0, 0.0), c_mean=34.0, diagonal_caps=(11.2, 19.1))
        np.testing.assert_allclose(spec.junction_energies(), [8.8, 7.2, 8.8, 7.2])

    def test_coefficient_range(self):
        with pytest.raises(ValidationError):
            AsymmetrySpec(ej_mean=9.0, eta=(1.2, 0.0, 0.0), c_mean=36.0, diagonal_caps=(12.0, 24.0))

    def test_negative_junction_rejected(self):
        spec = AsymmetrySpec(ej_mean=9.0, eta=(0.9, 0.9, -0.9), c_mean=36.0, diagonal_caps=(12.0, 24.0))
        with pytest.raises(DomainError):
            apply_asymmetry(spec)

    def test_negative_diagonal_rejected(self):
        with pytest.raises(ConfigurationError):
            AsymmetrySpec(ej_mean=9.0, c_mean=36.0, diagonal_caps=(-1.0, 24.0))

    def test_recover_needs_four_node_ring(self):
        with pytest.raises(DomainError):
            recover_asymmetry(symmetric_ring(5))


class TestSpacing:
    def test_target_validation(self):
        with pytest.raises(ConfigurationError):
            DesignTarget(frequency_window=(6.0, 4.0))
        with pytest.raises(ConfigurationError):
            DesignTarget(min_separation_mhz=0.0)

    def test_design_table_passes(self):
        report = spacing_report(trimon_design_table(), DesignTarget(min_separation_mhz=35.0))
        assert report.passed
        assert report.min_gap_mhz >= 35.0
        assert report.stability_ratio > 1.5
        document = report.to_document()
        assert document["passed"] is True
        assert document["violations"] == []

    def test_degenerate_ring_fails_separation(self):
        report = spacing_report(symmetric_ring(4))
        assert not report.passed
        assert report.min_gap_mhz < 1.0
        assert any(v["kind"] == "separation" for v in report.violations)

    def test_weak_junctions_fail_stability(self):
        netlist = four_node_ring([0.2 * e for e in (8.794, 8.712, 8.042, 7.143)], [34.0] * 4, 11.2, 19.1)
        report = spacing_report(netlist)
        assert any(v["kind"] == "stability" for v in report.violations)

    def test_window_violation(self):
        report = spacing_report(trimon_design_table(), DesignTarget(frequency_window=(5.5, 8.0)))
        flagged = {v["transition"] for v in report.violations if v["kind"] == "window"}
        assert "BC0A0" in flagged
        assert "CA0B0" not in flagged

    def test_stability_skipped_without_junction_energy(self, design_diagram):
        report = validate_spacing(design_diagram, DesignTarget())
        assert report.stability_ratio is None

    def test_cavity_fields_go_together(self):
        with pytest.raises(ConfigurationError):
            DesignTarget(omega_r=7.3)
        with pytest.raises(ConfigurationError):
            DesignTarget(g_ref_mhz=70.0)

    def test_strong_coupling_leaves_dispersive_regime(self, design_analysis, design_diagram):
        modes, kerr = design_analysis
        cavity = build_cavity_model(modes, kerr, 7.3, 400.0, ring_order=trimon_design_table().ring_order())
        target = DesignTarget(min_separation_mhz=35.0, omega_r=7.3, g_ref_mhz=400.0)
        report = validate_spacing(design_diagram, target, cavity=cavity)
        flagged = [v for v in report.violations if v["kind"] == "dispersive"]
        assert "A" in {v["mode"] for v in flagged}
        assert all(v["ratio"] < v["required"] for v in flagged)

    def test_basis_state_shift_separation(self, design_analysis, design_diagram):
        modes, kerr = design_analysis
        cavity = build_cavity_model(modes, kerr, 7.3, 70.0, ring_order=trimon_design_table().ring_order())

        relaxed = DesignTarget(min_separation_mhz=35.0, omega_r=7.3, g_ref_mhz=70.0, min_chi_separation_mhz=0.0)
        report = validate_spacing(design_diagram, relaxed, cavity=cavity)
        assert not [v for v in report.violations if v["kind"] == "readout"]
        assert "A" not in {v.get("mode") for v in report.violations}

        strict = relaxed.model_copy(update={"min_chi_separation_mhz": 1e4})
        report = validate_spacing(design_diagram, strict, cavity=cavity)
        readout = [v for v in report.violations if v["kind"] == "readout"]
        assert len(readout) == 28
        assert ["000", "100"] in [v["between"] for v in readout]


class TestOptimizer:
    def test_rejects_empty_knobs(self):
        seed = recover_asymmetry(trimon_design_table())
        with pytest.raises(DomainError):
            optimize_design(DesignTarget(), seed, [])
        with pytest.raises(DomainError):
            optimize_design(DesignTarget(), seed, ["ej_max"])

    def test_design_point_is_a_fixed_point(self, design_analysis):
        modes, kerr = design_analysis
        frequencies = kerr.qubit_frequencies()[modes.qubit_order()].tolist()
        seed = recover_asymmetry(trimon_design_table())
        result = optimize_design(DesignTarget(target_frequencies=frequencies), seed, ["ej_mean"], budget=12)
        assert result.feasible
        assert result.objective < 1e-10
        assert result.evaluations <= 12
        np.testing.assert_allclose(result.qubit_frequencies, frequencies, atol=1e-4)

    def test_cavity_target_enters_feasibility(self, design_analysis):
        modes, kerr = design_analysis
        frequencies = kerr.qubit_frequencies()[modes.qubit_order()].tolist()
        seed = recover_asymmetry(trimon_design_table())
        target = DesignTarget(target_frequencies=frequencies, omega_r=7.3, g_ref_mhz=400.0)
        result = optimize_design(target, seed, ["ej_mean"], budget=12)
        assert not result.feasible
        assert any(v["kind"] == "dispersive" for v in result.report.violations)

    def test_unreachable_target(self):
        seed = recover_asymmetry(trimon_design_table())
        result = optimize_design(DesignTarget(target_frequencies=[5.0, 5.0, 5.0]), seed, ["ej_mean"], budget=10)
        assert not result.feasible
        assert result.evaluations <= 10
        document = result.to_document()
        assert document["feasible"] is False
        assert document["report"]["violations"]

    @pytest.mark.slow
    def test_converges_to_design_table(self):
        seed = AsymmetrySpec(ej_mean=8.5, c_mean=34.0, diagonal_caps=(11.2, 19.1))
        target = DesignTarget(target_frequencies=[5.244, 4.773, 6.059], min_separation_mhz=30.0)
        result = optimize_design(target, seed, ["ej_mean", "eta_ab", "eta_bc", "eta_ca"], budget=800)
        assert result.feasible
        np.testing.assert_allclose(result.qubit_frequencies, [5.244, 4.773, 6.059], atol=0.01)
        np.testing.assert_allclose(
            [b.ej_ghz for b in result.netlist.junctions], [8.794, 8.712, 8.042, 7.143], rtol=0.05
        )
