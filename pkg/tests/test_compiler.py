import numpy as np
import pytest

from multimon.compiler import (
    FrameTracker,
    FrameUpdate,
    GateSequence,
    NativeGate,
    ParallelGroup,
    ccnot,
    cctheta,
    compile_program,
    compile_standard,
    global_phase_distance,
    ideal_unitary,
    load_program,
    parse_program,
    sequence_unitary,
)
from multimon.errors import DomainError, ProgramParseError
from multimon.labels import all_transitions, parse_transition, transition_label, transition_states

LETTERS = "ABC"


def assert_compiles_exactly(name, args):
    sequence = compile_standard(name, args)
    assert global_phase_distance(sequence_unitary(sequence), ideal_unitary(name, args)) < 1e-10


class TestLabels:
    def test_target_first_cyclic_controls(self):
        assert transition_label(0, (0, 1, 0)) == "AB1C0"
        assert transition_label(1, (1, 0, 1)) == "BC1A1"
        assert transition_label(2, (0, 1, 0)) == "CA0B1"

    def test_parse_round_trip(self):
        labels = all_transitions(3)
        assert len(labels) == 12
        for label in labels:
            target, controls = parse_transition(label)
            lower, upper = transition_states(label)
            assert lower[target] == 0 and upper[target] == 1
            assert transition_label(target, lower) == label
            assert all(lower[k] == bit for k, bit in controls.items())

    @pytest.mark.parametrize("label", ["AB0", "AB0C2", "AA0C0", "ab0c0"])
    def test_malformed(self, label):
        with pytest.raises(DomainError):
            parse_transition(label)


class TestNativeGates:
    def test_single_gate_is_minus_i_ccnot(self):
        sequence = GateSequence(count=3, items=(NativeGate.from_label("CA1B1", np.pi, -np.pi / 2),))
        expected = np.eye(8, dtype=complex)
        expected[6:8, 6:8] = -1j * np.array([[0, 1], [1, 0]])
        np.testing.assert_allclose(sequence_unitary(sequence), expected, atol=1e-12)

    def test_target_bit_must_be_zero(self):
        with pytest.raises(DomainError):
            NativeGate(target=0, state=(1, 0, 0), theta=np.pi)

    def test_parallel_gates_must_not_share_levels(self):
        with pytest.raises(DomainError):
            ParallelGroup((NativeGate.from_label("AB0C0", np.pi), NativeGate.from_label("BC0A0", np.pi)))


class TestFrames:
    def test_ccnot_frame_table(self):
        frame = ccnot(0, {1: 0, 2: 0}).final_frame()
        offsets = frame.nonzero_offsets()
        assert offsets == pytest.approx({
            "BC0A0": np.pi / 2,
            "BC0A1": np.pi / 2,
            "CA0B0": np.pi / 2,
            "CA1B0": np.pi / 2,
        })
        assert frame.offset("AB0C0") == 0.0

    def test_cctheta_frame_table(self):
        theta = 0.3
        offsets = cctheta((0, 1, 0), theta).final_frame().nonzero_offsets()
        assert offsets == pytest.approx({"AB1C0": theta, "BC0A0": -theta, "CA0B1": theta})

    def test_cctheta_zero_is_empty(self):
        assert cctheta((1, 1, 0), 0.0).items == ()

    def test_ccz_offsets(self):
        frame = compile_standard("CCZ", ((1, 1, 1),)).final_frame()
        offsets = frame.nonzero_offsets()
        assert set(offsets) == {"AB1C1", "BC1A1", "CA1B1"}
        for value in offsets.values():
            assert abs(value) == pytest.approx(np.pi)

    def test_describe_lists_phased_states(self):
        frame = FrameTracker.zero().with_state_phase((1, 1, 1), np.pi)
        assert frame.describe() == {"111": pytest.approx(np.pi)}


class TestStandardGates:
    @pytest.mark.parametrize("name,args", [
        ("X", (0,)), ("X", (2,)), ("Y", (1,)), ("Z", (0,)),
        ("R", (1, 0.7, 0.4)),
        ("CZ", (0, 2)),
        ("CCZ", ((1, 1, 1),)), ("CCZ", ((0, 1, 0),)),
        ("CNOT", (1, 0)), ("CNOT", (0, 2)), ("CNOT", (2, 1)),
        ("SWAP", (0, 1)), ("SWAP", (1, 2)),
        ("CCNOT", (0, 1, 2)), ("CCNOT", (2, 1, 0)),
        ("FREDKIN", (0, 1, 2)), ("FREDKIN", (2, 0, 1)),
    ])
    def test_exact_compilation(self, name, args):
        assert_compiles_exactly(name, args)

    def test_x_on_c_is_one_parallel_step(self):
        sequence = compile_standard("X", (2,))
        assert len(sequence.items) == 1
        assert sorted(g.label for g in sequence.pulses()) == ["CA0B0", "CA0B1", "CA1B0", "CA1B1"]

    def test_z_plays_nothing(self):
        sequence = compile_standard("Z", (0,))
        assert sequence.pulses() == []
        assert len(sequence.items) == 4

    def test_cnot_pulses(self):
        labels = [g.label for g in compile_standard("CNOT", (1, 0)).pulses()]
        assert labels == ["AB1C0", "AB1C1"]

    def test_ccnot_is_an_involution(self):
        twice = ccnot(0, {1: 1, 2: 1}).then(ccnot(0, {1: 1, 2: 1}))
        assert global_phase_distance(sequence_unitary(twice), np.eye(8)) < 1e-10

    def test_frame_offsets_follow_into_next_gate(self):
        sequence = compile_standard("CCZ", ((1, 1, 1),)).then(compile_standard("X", (0,)))
        phases = {gate.label: phi for _, gate, phi in sequence.played()}
        assert phases["AB1C1"] % (2 * np.pi) == pytest.approx(np.pi / 2)
        assert phases["AB0C0"] % (2 * np.pi) == pytest.approx(3 * np.pi / 2)

    @pytest.mark.parametrize("name,args", [
        ("CNOT", (0, 0)), ("X", (3,)), ("CCNOT", (0, 0, 1)), ("CCZ", ((1, 1),)), ("TOFFOLI", (0, 1, 2)),
    ])
    def test_invalid_gates(self, name, args):
        with pytest.raises(DomainError):
            compile_standard(name, args)

    def test_document(self):
        document = compile_standard("CNOT", (1, 0)).to_document()
        assert [p["transition"] for p in document["pulses"]] == ["AB1C0", "AB1C1"]
        assert document["frame_table"]
        assert document["source"] == ["CNOT 1 0"]


class TestPrograms:
    def test_parse(self):
        text = "# prepare\nX A\nCNOT A B  # entangle\n\nCCZ 111\nR C 1.5 0.25\n"
        instructions = parse_program(text)
        assert [(name, args) for name, args, _ in instructions] == [
            ("X", (0,)), ("CNOT", (0, 1)), ("CCZ", ((1, 1, 1),)), ("R", (2, 1.5, 0.25)),
        ]
        assert [line for _, _, line in instructions] == [2, 3, 5, 6]

    @pytest.mark.parametrize("text,line", [
        ("CNOT A\n", 1),
        ("X A\nFOO B\n", 2),
        ("X A\n\nX D\n", 3),
        ("R A 1.0\n", 1),
        ("R A one 0\n", 1),
        ("CCZ 12\n", 1),
    ])
    def test_parse_errors_carry_line(self, text, line):
        with pytest.raises(ProgramParseError) as excinfo:
            parse_program(text, source="prog.txt")
        assert excinfo.value.line == line
        assert str(excinfo.value).startswith(f"prog.txt:{line}:")

    def test_compile_errors_carry_line(self):
        with pytest.raises(ProgramParseError) as excinfo:
            compile_program("X A\nCNOT B B\n")
        assert excinfo.value.line == 2

    def test_load_program(self, tmp_path):
        path = tmp_path / "bell.txt"
        path.write_text("Y A\nCNOT A B\n")
        sequence = load_program(path)
        expected = ideal_unitary("CNOT", (0, 1)) @ ideal_unitary("Y", (0,))
        assert global_phase_distance(sequence_unitary(sequence), expected) < 1e-10

    def test_random_programs_replay_exactly(self):
        rng = np.random.default_rng(2024)
        two = ["CNOT", "CZ", "SWAP"]
        three = ["CCNOT", "FREDKIN"]
        for _ in range(1000):
            lines, expected = [], np.eye(8, dtype=complex)
            for _ in range(rng.integers(1, 7)):
                kind = rng.integers(0, 5)
                qubits = [int(q) for q in rng.permutation(3)]
                if kind == 0:
                    name = str(rng.choice(["X", "Y", "Z"]))
                    args = (qubits[0],)
                elif kind == 1:
                    name = "R"
                    args = (qubits[0], float(rng.uniform(0, 2 * np.pi)), float(rng.uniform(0, 2 * np.pi)))
                elif kind == 2:
                    name = str(rng.choice(two))
                    args = tuple(qubits[:2])
                elif kind == 3:
                    name = str(rng.choice(three))
                    args = tuple(qubits)
                else:
                    name = "CCZ"
                    args = (tuple(int(b) for b in rng.integers(0, 2, 3)),)

                if name == "R":
                    lines.append(f"R {LETTERS[args[0]]} {args[1]!r} {args[2]!r}")
                elif name == "CCZ":
                    lines.append("CCZ " + "".join(str(b) for b in args[0]))
                else:
                    lines.append(" ".join([name] + [LETTERS[q] for q in args]))
                expected = ideal_unitary(name, args) @ expected

            actual = sequence_unitary(compile_program("\n".join(lines)))
            assert global_phase_distance(actual, expected) < 1e-10, lines
