import numpy as np
import pytest
from pydantic import ValidationError

from multimon.compiler import compile_standard, sequence_unitary
from multimon.errors import ConfigurationError, DocumentParseError, DomainError, RankDeficiencyError
from multimon.pulsesim import (
    DecoherenceMode,
    DensityMatrix,
    ExperimentSpec,
    ProjectionSet,
    PropagatorCache,
    PulseSchedule,
    Segment,
    SimulationConfig,
    Tone,
    TrimonSystem,
    evolve,
    fidelity,
    ideal_projections,
    maximum_likelihood,
    projection_set,
    randomized_benchmark,
    run_experiment,
    run_length_sweep,
    schedule_from_sequence,
)
from multimon.pulsesim.benchmarking import CLIFFORDS, fit_decay, inverse_word, random_sequence, word_unitary
from multimon.pulsesim.evolve import pi_amplitude
from multimon.pulsesim.experiments import (
    REFERENCE_FIDELITIES,
    STATE_PREPARATIONS,
    length_sweep_csv,
    parse_experiment,
    resolve_state,
)
from multimon.pulsesim.mle import informational_rank
from multimon.pulsesim.tomography import round_sequence


def ket(*states):
    vector = np.zeros(8, dtype=complex)
    for state in states:
        vector[int(state, 2)] = 1.0
    return vector / np.linalg.norm(vector)


def pi_segment(system, label, length_ns=200.0):
    tone = Tone(
        carrier_ghz=system.transition_frequency(label),
        amplitude=pi_amplitude(length_ns),
        phase=0.0,
        weights=(1.0, 0.0, 0.0),
    )
    return Segment(length_ns, (tone,), label)


class TestSimulationConfig:
    def test_levels_lower_bound(self):
        with pytest.raises(ValidationError):
            SimulationConfig(levels_per_mode=1)

    def test_unknown_integrator(self):
        with pytest.raises(ValidationError):
            SimulationConfig(integrator="euler")

    def test_gammas(self):
        config = SimulationConfig(t1_us=[50.0, None, 25.0])
        assert config.gammas(3) == pytest.approx([1 / 50e3, 0.0, 1 / 25e3])
        with pytest.raises(ConfigurationError):
            config.gammas(2)

    def test_drive_weights_required_without_ideal_drive(self):
        with pytest.raises(ConfigurationError):
            SimulationConfig(ideal_drive=False).weights_for(0, 3)


class TestEvolution:
    def test_pi_pulse_flips_addressed_mode(self, design_system):
        schedule = PulseSchedule((pi_segment(design_system, "AB0C0"),))
        final = evolve(DensityMatrix.basis((0, 0, 0)), schedule, design_system, SimulationConfig())
        assert final.populations()[design_system.index((1, 0, 0))] >= 0.99
        assert final.check() == []
        assert final.time_ns == pytest.approx(200.0)

    def test_idle_keeps_populations(self, design_system):
        initial = DensityMatrix.basis((0, 1, 0))
        idle = PulseSchedule((Segment(150.0), Segment(50.0, (Tone(5.0, 0.0, 0.0, (1.0, 0.0, 0.0)),))))
        final = evolve(initial, idle, design_system, SimulationConfig())
        np.testing.assert_allclose(final.populations(), initial.populations(), atol=1e-12)

    def test_relaxation(self, design_system):
        config = SimulationConfig(t1_us=[1.0, None, None])
        final = evolve(DensityMatrix.basis((1, 0, 0)), PulseSchedule((Segment(1000.0),)), design_system, config)
        assert final.populations()[design_system.index((1, 0, 0))] == pytest.approx(np.exp(-1.0), abs=1e-4)
        assert final.populations()[design_system.index((0, 0, 0))] == pytest.approx(1 - np.exp(-1.0), abs=1e-4)

    def test_integrators_agree(self, design_system):
        schedule = PulseSchedule((pi_segment(design_system, "AB0C0"),))
        config = SimulationConfig(t1_us=[50.0, 40.0, 30.0])
        exact = evolve(DensityMatrix.basis((0, 0, 0)), schedule, design_system, config)
        stepped = evolve(
            DensityMatrix.basis((0, 0, 0)), schedule, design_system,
            config.model_copy(update={"integrator": "rk4"}),
        )
        np.testing.assert_allclose(stepped.populations(), exact.populations(), atol=1e-3)

    def test_step_too_coarse(self, design_system):
        schedule = PulseSchedule((pi_segment(design_system, "AB0C0", length_ns=5.0),))
        with pytest.raises(ConfigurationError):
            evolve(DensityMatrix.basis((0, 0, 0)), schedule, design_system, SimulationConfig(step_ns=10.0))

    def test_truncation_mismatch(self, design_system):
        with pytest.raises(ConfigurationError):
            evolve(DensityMatrix.basis((0, 0, 0), levels=2), PulseSchedule(), design_system, SimulationConfig())

    def test_invalid_segments(self):
        with pytest.raises(ConfigurationError):
            PulseSchedule((Segment(0.0),))
        with pytest.raises(ConfigurationError):
            PulseSchedule((Segment(10.0, (Tone(5.0, float("nan")),)),))

    def test_propagators_are_reused(self, design_system):
        cache = PropagatorCache(design_system, [0.0, 0.0, 0.0])
        segment = pi_segment(design_system, "AB0C0")
        schedule = PulseSchedule((segment, segment))
        evolve(DensityMatrix.basis((0, 0, 0)), schedule, design_system, SimulationConfig(), cache)
        assert cache.misses == 1
        assert cache.hits == 1

    def test_schedule_from_parallel_rotation(self, design_system):
        schedule = schedule_from_sequence(compile_standard("X", (0,)), design_system, 200.0, SimulationConfig())
        assert len(schedule.segments) == 1
        assert len(schedule.segments[0].tones) == 4
        assert schedule.duration_ns == pytest.approx(200.0)


class TestTomography:
    def test_projection_set(self):
        projections = projection_set()
        assert projections.operators.shape == (216, 8, 8)
        assert projections.settings_count == 27
        np.testing.assert_allclose(projections.operators.sum(axis=0), 27 * np.eye(8), atol=1e-10)
        assert informational_rank(projections.operators) == 64

    def test_ground_state_projections(self):
        values = dict(zip(projection_set().keys, ideal_projections(np.outer(ket("000"), ket("000"))).values))
        assert values["III/1/000"] == pytest.approx(1.0)
        assert values["III/1/111"] == pytest.approx(0.0)
        assert values["III/2/000"] == pytest.approx(0.0)

    def test_bell_state_populations(self):
        bell = ket("000", "110")
        values = dict(zip(projection_set().keys, ideal_projections(np.outer(bell, bell.conj())).values))
        assert values["III/1/000"] == pytest.approx(0.5)
        assert values["III/2/111"] == pytest.approx(0.5)
        assert values["III/3/000"] + values["III/3/111"] == pytest.approx(0.0, abs=1e-12)
        assert values["III/4/000"] + values["III/4/111"] == pytest.approx(0.0, abs=1e-12)

    def test_second_round_swaps(self):
        unitary = sequence_unitary(round_sequence(1))
        assert abs(unitary[1, 0]) == pytest.approx(1.0)
        assert abs(unitary[7, 6]) == pytest.approx(1.0)
        assert abs(unitary[2, 2]) == pytest.approx(1.0)


class TestMaximumLikelihood:
    @pytest.mark.parametrize("states", [("000", "110"), ("000", "111"), ("001", "010", "100"), ("101",)])
    def test_pure_states(self, states):
        target = ket(*states)
        rho = maximum_likelihood(ideal_projections(np.outer(target, target.conj())))
        assert fidelity(rho, target) > 1 - 1e-6

    def test_maximally_mixed(self):
        rho = maximum_likelihood(ideal_projections(np.eye(8) / 8))
        np.testing.assert_allclose(rho, np.eye(8) / 8, atol=1e-6)

    def test_noisy_bell(self, rng):
        bell = ket("000", "110")
        exact = ideal_projections(np.outer(bell, bell.conj()))
        for _ in range(5):
            noisy = exact.with_values(exact.values + rng.normal(0.0, 0.01, exact.values.shape))
            assert fidelity(maximum_likelihood(noisy), bell) >= 0.99

    def test_rank_deficient(self):
        projections = projection_set()
        single = ProjectionSet(projections.operators[:8], np.full(8, 0.125), 1)
        with pytest.raises(RankDeficiencyError):
            maximum_likelihood(single)


class TestFidelity:
    def test_orthogonal_states(self):
        assert fidelity(np.outer(ket("000"), ket("000")), ket("111")) == pytest.approx(0.0)

    def test_identical_mixed_state(self):
        rho = 0.7 * np.outer(ket("000"), ket("000")) + 0.3 * np.eye(8) / 8
        assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-10)

    def test_symmetric(self, rng):
        def random_state():
            a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
            rho = a @ a.conj().T
            return rho / np.trace(rho).real

        first, second = random_state(), random_state()
        assert fidelity(first, second) == pytest.approx(fidelity(second, first), abs=1e-10)

    def test_pure_target_matrix_matches_ket(self):
        target = ket("000", "111")
        rho = 0.9 * np.outer(target, target.conj()) + 0.1 * np.eye(8) / 8
        assert fidelity(rho, np.outer(target, target.conj())) == pytest.approx(fidelity(rho, target), abs=1e-9)

    def test_non_physical_target(self):
        with pytest.raises(DomainError):
            fidelity(np.eye(8) / 8, np.diag([1.5, -0.5] + [0.0] * 6))

    def test_mixed_estimate_against_pure_target(self):
        assert fidelity(np.eye(8) / 8, ket("000")) == pytest.approx(np.sqrt(0.125), abs=1e-12)

    def test_partial_overlap_is_root_of_population(self):
        rho = 0.64 * np.outer(ket("000"), ket("000")) + 0.36 * np.outer(ket("111"), ket("111"))
        assert fidelity(rho, ket("000")) == pytest.approx(0.8, abs=1e-12)
        assert fidelity(rho, np.outer(ket("000"), ket("000"))) == pytest.approx(0.8, abs=1e-9)

    @pytest.mark.parametrize("estimate", [
        np.diag([1.2, -0.2] + [0.0] * 6),
        np.eye(8) / 4,
        np.triu(np.ones((8, 8))) / 8,
    ])
    def test_non_physical_estimate(self, estimate):
        with pytest.raises(DomainError):
            fidelity(estimate, ket("000"))


class TestBenchmarking:
    def test_clifford_group(self):
        assert len(CLIFFORDS) == 24
        assert CLIFFORDS[0] == ()

    def test_recovery_clifford(self, rng):
        words = random_sequence(10, rng)
        total = np.eye(2, dtype=complex)
        for word in words:
            total = word_unitary(word) @ total
        overlap = abs(np.trace(total)) / 2
        assert overlap == pytest.approx(1.0, abs=1e-9)
        assert inverse_word([]) == ()

    def test_flat_data(self):
        assert fit_decay(np.array([1.0, 5.0, 10.0]), np.ones(3)) == (0.0, 1.0, 1.0, 0.0)

    def test_synthetic_decay(self):
        lengths = np.array([1, 5, 10, 20, 40, 80], dtype=float)
        amplitude, decay, offset, sigma = fit_decay(lengths, 0.5 * 0.98 ** lengths + 0.5)
        assert decay == pytest.approx(0.98, abs=1e-4)
        assert amplitude == pytest.approx(0.5, abs=1e-2)
        assert offset == pytest.approx(0.5, abs=1e-2)

    def test_needs_two_lengths(self, design_system):
        with pytest.raises(DomainError):
            randomized_benchmark(design_system, "AB0C0", [5], 2, SimulationConfig())

    def test_lossless_two_level_survives(self, design_analysis):
        _, kerr = design_analysis
        system = TrimonSystem.from_kerr(kerr, levels=2)
        result = randomized_benchmark(
            system, "AB0C0", [1, 4], 2, SimulationConfig(levels_per_mode=2), pi_length_ns=50.0, seed=3,
        )
        assert result.decay == 1.0
        assert result.fidelity == 1.0
        assert result.to_document()["lengths"] == [1, 4]

    @pytest.mark.slow
    def test_relaxation_lowers_fidelity(self, design_system):
        config = SimulationConfig(t1_us=[None, 2.0, None])
        result = randomized_benchmark(design_system, "AB1C0", [1, 5, 10, 20], 4, config, pi_length_ns=50.0, seed=11)
        assert 0.5 < result.decay < 1.0

    @pytest.mark.slow
    @pytest.mark.parametrize("transition,expected", [
        ("AB0C0", 0.998), ("AB1C0", 0.995), ("AB0C1", 0.996), ("AB1C1", 0.993),
    ])
    def test_qubit_a_transitions(self, design_system, transition, expected):
        config = SimulationConfig(t1_us=[50.0, 40.0, 30.0])
        result = randomized_benchmark(
            design_system, transition, [1, 5, 10, 20, 40, 80], 10, config, pi_length_ns=200.0, seed=5, workers=2,
        )
        assert result.fidelity == pytest.approx(expected, abs=0.004)


class TestExperiments:
    def test_state_source_is_exclusive(self):
        with pytest.raises(ConfigurationError):
            ExperimentSpec(state="bell", program="X A")
        with pytest.raises(ConfigurationError):
            ExperimentSpec()

    def test_aliases(self):
        assert resolve_state("bell") == "000+110"
        assert resolve_state("GHZ") == "000+111"
        with pytest.raises(ConfigurationError):
            resolve_state("cat")

    def test_reference_table_covers_preparations(self):
        assert set(REFERENCE_FIDELITIES) == set(STATE_PREPARATIONS)

    @pytest.mark.parametrize("name", sorted(STATE_PREPARATIONS))
    def test_preparations_reach_their_states(self, name):
        amplitudes = sequence_unitary(STATE_PREPARATIONS[name]())[:, 0]
        populations = np.abs(amplitudes) ** 2
        if name == "+++":
            np.testing.assert_allclose(populations, 1 / 8, atol=1e-12)
            return
        states = name.split("+")
        expected = np.zeros(8)
        for state in states:
            expected[int(state, 2)] = 1 / len(states)
        np.testing.assert_allclose(populations, expected, atol=1e-12)

    def test_parse_experiment(self):
        spec = parse_experiment('{"state": "ghz", "pi_length_ns": 100}')
        assert spec.name == "000+111"
        assert spec.decoherence_mode == DecoherenceMode.PREP_ONLY
        with pytest.raises(DocumentParseError):
            parse_experiment('{"state": "ghz", "pi_length_ns": -1}')
        with pytest.raises(DocumentParseError):
            parse_experiment('{"state": "ghz",\n}', source="exp.json")

    def test_lossless_bell_with_ideal_tomography(self):
        spec = ExperimentSpec(state="bell", decoherence_mode="none", ideal_tomography=True)
        result = run_experiment(spec)
        assert result.fidelity >= 0.99
        document = result.to_document()
        assert document["state"] == "000+110"
        assert document["populations"]["000"] == pytest.approx(0.5, abs=0.01)

    def test_program_source(self):
        spec = ExperimentSpec(program="Y A\nCNOT A B\n", decoherence_mode="none", ideal_tomography=True)
        assert run_experiment(spec).fidelity >= 0.99

    def test_length_sweep_csv(self):
        text = length_sweep_csv([(100.0, 0.99), (200.0, 0.995)])
        assert text.splitlines() == ["pi_length_ns,fidelity", "100,0.990000", "200,0.995000"]

    @pytest.mark.slow
    @pytest.mark.parametrize("name", sorted(REFERENCE_FIDELITIES))
    def test_reference_fidelities(self, name):
        expected, _ = REFERENCE_FIDELITIES[name]
        result = run_experiment(ExperimentSpec(state=name, pi_length_ns=200.0, decoherence_mode="prep_only"))
        assert result.fidelity == pytest.approx(expected, abs=0.006)

    @pytest.mark.slow
    def test_decay_during_tomography_lowers_fidelity(self):
        prep_only = run_experiment(ExperimentSpec(state="bell", decoherence_mode="prep_only"))
        both = run_experiment(ExperimentSpec(state="bell", decoherence_mode="prep_and_tomo"))
        assert both.fidelity < prep_only.fidelity
        assert both.fidelity == pytest.approx(REFERENCE_FIDELITIES["000+110"][1], abs=0.01)

    @pytest.mark.slow
    def test_bell_fidelity_against_pulse_length(self):
        lengths = [50.0, 100.0, 200.0, 400.0]
        lossless = [f for _, f in run_length_sweep(ExperimentSpec(state="bell", decoherence_mode="none"), lengths)]
        assert all(later >= earlier - 1e-4 for earlier, later in zip(lossless, lossless[1:]))
        assert abs(lossless[3] - lossless[2]) < 0.002

        lossy = dict(run_length_sweep(ExperimentSpec(state="bell", decoherence_mode="prep_and_tomo"), [200.0, 400.0]))
        assert lossy[400.0] < lossy[200.0]
