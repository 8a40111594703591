import random
import warnings

import numpy as np
import pytest

from qobf.ir import Circuit, GateApp, GateKind, flatten, gate_count, same_gates
from qobf.passes import (
    AUXILIARY_SEQUENCE,
    DELAYED_SEQUENCES,
    INVERSE_PAIRS,
    METHODS,
    ObfuscationConfig,
    PassWarning,
    RESTORE_SEQUENCE,
    RulesetError,
    SubstitutionRule,
    _delayed_commit_check,
    apply_pass,
    cloaked_gates_pass,
    composite_gates_pass,
    default_verified_rules,
    delayed_gates_pass,
    effective_unitary,
    inverse_gates_pass,
    load_ruleset,
    undo,
    verify_ruleset,
)
from qobf.qasm import emit
from qobf.sim import equivalent, gate_matrix, unitary_of
from strategies import random_circuit

K = GateKind


def cfg(method: str, seed: int = 1, intensity: float = 1.0) -> ObfuscationConfig:
    return ObfuscationConfig(seed=seed, intensity=intensity, method=method)


def single_x() -> Circuit:
    return Circuit(1, 0, (GateApp(K.X, (0,)),))


class TestSequenceData:
    def test_nine_inverse_pairs_reduce_to_identity(self):
        assert len(INVERSE_PAIRS) == 9
        for pair in INVERSE_PAIRS:
            u = unitary_of(pair)
            assert np.max(np.abs(u - np.eye(len(u)))) < 1e-12, pair.name

    def test_auxiliary_then_restore_is_identity(self):
        combined = list(AUXILIARY_SEQUENCE.gates) + list(RESTORE_SEQUENCE.gates)
        u = unitary_of([GateApp(k, s) for k, s in combined])
        assert np.max(np.abs(u - np.eye(2))) < 1e-12

    def test_nine_delayed_sequences(self):
        assert len(DELAYED_SEQUENCES) == 9

    def test_effective_unitary_examples(self):
        by_name = {s.name: s for s in DELAYED_SEQUENCES}
        hh = effective_unitary(INVERSE_PAIRS[0])
        assert np.max(np.abs(hh - np.eye(2))) < 1e-12
        # T then S then Tdg: diagonal phases commute, so this is exactly S
        tst = effective_unitary(by_name["t-s-tdg"])
        assert np.max(np.abs(tst - np.diag([1, 1j]))) < 1e-12
        ysy = effective_unitary(by_name["y-s-y"])
        assert np.max(np.abs(ysy - 1j * gate_matrix(K.SDG))) < 1e-12


class TestVerifyRuleset:
    def test_default_verdicts(self):
        report = default_verified_rules()
        accepted = {r.replacement.name: r.phase_factor for r in report.accepted}
        rejected = {r.replacement.name for r in report.rejected}
        assert set(accepted) == {"h-z-h", "z-h-z-h-z", "sdg-y-s"}
        assert rejected == {"s-y-s", "h-y-h", "s-z-y-z-s"}
        assert accepted["h-z-h"] == pytest.approx(1.0, abs=1e-10)
        assert accepted["z-h-z-h-z"] == pytest.approx(-1.0, abs=1e-10)
        assert accepted["sdg-y-s"] == pytest.approx(-1.0, abs=1e-10)

    def test_rejected_carry_effective_unitary(self):
        report = default_verified_rules()
        for rej in report.rejected:
            assert rej.effective.shape == (2, 2)
            # every failing default entry is actually a Pauli-Y up to phase
            aligned = rej.effective / rej.effective[0, 1]
            assert np.max(np.abs(aligned - gate_matrix(K.Y) / gate_matrix(K.Y)[0, 1])) < 1e-9

    def test_accepted_rules_reverify_independently(self):
        for rule in default_verified_rules().accepted:
            u = effective_unitary(rule.replacement)
            target = gate_matrix(rule.target)
            assert np.max(np.abs(u - rule.phase_factor * target)) < 1e-10
            assert abs(abs(rule.phase_factor) - 1) < 1e-10

    def test_partition_covers_input(self):
        rules = load_ruleset()
        report = verify_ruleset(rules)
        assert len(report.accepted) + len(report.rejected) == len(rules)

    def test_summary_mentions_matrix(self):
        text = default_verified_rules().summary()
        assert "rejected" in text and "effective unitary" in text

    def test_ruleset_file_parse_error(self, tmp_path):
        bad = tmp_path / "bad.rules"
        bad.write_text("x: frob\n")
        with pytest.raises(RulesetError, match="unknown gate"):
            load_ruleset(bad)

    def test_multi_qubit_slots(self):
        rules = verify_ruleset(
            [
                (
                    K.SWAP,
                    # swap via three alternating CNOTs
                    type(INVERSE_PAIRS[0])(
                        "cx3",
                        ((K.CX, (0, 1)), (K.CX, (1, 0)), (K.CX, (0, 1))),
                    ),
                )
            ]
        )
        assert len(rules.accepted) == 1
        assert rules.accepted[0].phase_factor == pytest.approx(1.0)


class TestInversePass:
    def test_single_gate_gains_adjacent_pairs(self):
        out = inverse_gates_pass(single_x(), cfg("inverse", seed=4))
        inserted = [g for g in out.gates if g.origin == "inserted"]
        assert inserted and len(inserted) % 2 == 0
        # inserted gates come in adjacent pairs on identical qubits
        positions = [i for i, g in enumerate(out.gates) if g.origin == "inserted"]
        for a, b in zip(positions[::2], positions[1::2]):
            assert b == a + 1
            assert out.gates[a].qubits == out.gates[b].qubits
        assert equivalent(single_x(), out)[0]

    def test_empty_circuit_warns(self):
        empty = Circuit(1)
        with pytest.warns(PassWarning):
            out = inverse_gates_pass(empty, cfg("inverse"))
        assert out == empty

    def test_measured_qubit_not_touched_after_measure(self, bv6):
        out = inverse_gates_pass(bv6, cfg("inverse", seed=9))
        from qobf.ir import validate

        assert validate(out) == []

    def test_multiqubit_pairs_used_when_possible(self, period7):
        out = inverse_gates_pass(period7, cfg("inverse", seed=2))
        kinds = {g.kind for g in out.gates if g.origin == "inserted"}
        assert any(k in kinds for k in (K.CX, K.CZ, K.CY, K.CCX))


class TestCompositePass:
    def test_empty_circuit_single_insertion(self):
        out = composite_gates_pass(Circuit(1), cfg("composite", seed=0))
        assert len(out.gates) == 12
        assert len(set(g.box for g in out.gates)) == 2
        u = unitary_of(out)
        assert np.max(np.abs(u - np.eye(2))) < 1e-12

    def test_decoy_boxes_only_group_original_gates(self, qaoa4):
        out = composite_gates_pass(qaoa4, cfg("composite", seed=3))
        survivors = [g for g in out.gates if g.origin != "inserted"]
        assert same_gates(
            flatten(out.with_gates(survivors)), flatten(qaoa4)
        )
        decoy_boxes = {g.box for g in out.gates if g.origin == "original" and g.box is not None}
        assert decoy_boxes, "no decoy boxes created at intensity 1"

    def test_box_names_are_uniform(self, bv6):
        out = composite_gates_pass(bv6, cfg("composite", seed=5))
        assert all(name.startswith("grp") for name in out.boxes.values())


class TestCloakedPass:
    def test_x_to_hzh_under_single_rule(self):
        report = verify_ruleset(load_ruleset())
        rule = next(r for r in report.accepted if r.replacement.name == "h-z-h")
        out = cloaked_gates_pass(single_x(), cfg("cloaked"), [rule])
        assert [g.kind for g in out.gates] == [K.H, K.Z, K.H]
        assert all(g.origin == "substituted" for g in out.gates)
        assert equivalent(single_x(), out)[0]

    def test_phase_minus_one_rule_is_safe(self):
        report = verify_ruleset(load_ruleset())
        rule = next(r for r in report.accepted if r.replacement.name == "z-h-z-h-z")
        out = cloaked_gates_pass(single_x(), cfg("cloaked"), [rule])
        assert len(out.gates) == 5
        assert equivalent(single_x(), out, "statevector")[0]
        assert equivalent(single_x(), out, "unitary")[0]

    def test_intensity_one_leaves_no_original_targets(self, bv6):
        rules = default_verified_rules().accepted
        out = cloaked_gates_pass(bv6, cfg("cloaked"), rules)
        leftover = [g for g in out.gates if g.kind is K.X and g.origin == "original"]
        assert leftover == []

    def test_unverified_rule_rejected(self):
        bogus = SubstitutionRule(K.X, INVERSE_PAIRS[0], verified=False, phase_factor=1.0)
        with pytest.raises(RulesetError, match="unverified"):
            cloaked_gates_pass(single_x(), cfg("cloaked"), [bogus])

    def test_substitution_respects_qubits(self):
        rules = default_verified_rules().accepted
        c = Circuit(3, 0, (GateApp(K.X, (2,)),))
        out = cloaked_gates_pass(c, cfg("cloaked", seed=8), rules)
        assert all(g.qubits == (2,) for g in out.gates)


class TestDelayedPass:
    def test_commit_check_examples(self):
        by_name = {s.name: s for s in DELAYED_SEQUENCES}
        x_block = [GateApp(K.X, (0,))]
        z_block = [GateApp(K.Z, (0,))]
        # the worked identity: [X,H,Z,H,X] . X . [X,H,Z,H,X] = X
        assert _delayed_commit_check(by_name["x-h-z-h-x"], (0,), x_block)
        # Y,S,Y acts as S-dagger up to phase; conjugating Z by it drifts to the identity
        assert not _delayed_commit_check(by_name["y-s-y"], (0,), z_block)
        # S,Z,Sdg acts as Z; ZXZ = -X commits (global phase)
        assert _delayed_commit_check(by_name["s-z-sdg"], (0,), x_block)
        # two-qubit wrapper on a two-qubit block
        assert _delayed_commit_check(
            by_name["swap-x-swap"], (0, 1), [GateApp(K.Z, (1,))]
        )

    def test_wrapped_blocks_stay_equivalent(self, period7):
        out = delayed_gates_pass(period7, cfg("delayed", seed=6))
        assert gate_count(out).total > gate_count(period7).total
        assert equivalent(period7, out)[0]

    def test_lone_h_commits_via_anticommuting_wrapper(self):
        # H lies in span{X, Z}, so a Y-acting wrapper flips only a global sign
        lone_h = Circuit(1, 0, (GateApp(K.H, (0,)),))
        out = delayed_gates_pass(lone_h, cfg("delayed", seed=0))
        assert gate_count(out).total > 1
        assert equivalent(lone_h, out, "unitary")[0]

    def test_measure_only_circuit_warns(self):
        c = Circuit(1, 1, (GateApp(K.MEASURE, (0,), cbit=0),))
        with pytest.warns(PassWarning, match="no committable"):
            out = delayed_gates_pass(c, cfg("delayed", seed=0))
        assert out == c

    def test_empty_circuit_warns(self):
        with pytest.warns(PassWarning, match="no eligible"):
            delayed_gates_pass(Circuit(1), cfg("delayed"))


class TestPassProperties:
    @pytest.mark.parametrize("method", METHODS)
    def test_determinism_identical_bytes(self, method, qaoa4):
        config = cfg(method, seed=77, intensity=0.7)
        first = emit(apply_pass(method, qaoa4, config))
        second = emit(apply_pass(method, qaoa4, config))
        assert first == second

    @pytest.mark.parametrize("method", METHODS)
    def test_monotone_growth(self, method, fixtures):
        for c in fixtures.values():
            out = apply_pass(method, c, cfg(method, seed=3, intensity=0.5))
            assert gate_count(out).total >= gate_count(c).total

    @pytest.mark.parametrize("method", METHODS)
    def test_equivalence_small_sweep(self, method, fixtures):
        for c in fixtures.values():
            for seed in (1, 2, 3):
                out = apply_pass(method, c, cfg(method, seed=seed, intensity=0.8))
                ok, fidelity = equivalent(c, out, "statevector")
                assert ok, f"{method} seed {seed}: fidelity {fidelity}"

    @pytest.mark.parametrize("method", METHODS)
    def test_provenance_undo(self, method, fixtures):
        for c in fixtures.values():
            out = apply_pass(method, c, cfg(method, seed=11, intensity=1.0))
            restored = undo(out)
            assert same_gates(restored, c)
            assert all(g.origin == "original" for g in restored.gates)

    def test_random_circuit_equivalence(self):
        rng = random.Random(99)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PassWarning)
            for _ in range(20):
                c = random_circuit(rng, max_qubits=4, max_gates=10, measure=True)
                method = rng.choice(METHODS)
                out = apply_pass(method, c, cfg(method, seed=rng.randrange(1000)))
                assert equivalent(c, out)[0]

    def test_undo_rolls_back_stacked_passes(self, bv6):
        rules = default_verified_rules().accepted
        step1 = inverse_gates_pass(bv6, cfg("inverse", seed=1, intensity=0.6))
        step2 = cloaked_gates_pass(step1, cfg("cloaked", seed=2), rules)
        step3 = composite_gates_pass(step2, cfg("composite", seed=3, intensity=0.4))
        # the cloaked step must have rewritten at least one pass-inserted X
        assert any(
            g.origin == "inserted"
            for g in step3.subst_originals.values()
        )
        assert same_gates(undo(step3), bv6)
        assert equivalent(bv6, step3)[0]


class TestConfig:
    def test_intensity_range(self):
        with pytest.raises(ValueError):
            ObfuscationConfig(seed=0, intensity=0.0)
        with pytest.raises(ValueError):
            ObfuscationConfig(seed=0, intensity=1.5)

    def test_seed_range(self):
        with pytest.raises(ValueError):
            ObfuscationConfig(seed=-1)
        with pytest.raises(ValueError):
            ObfuscationConfig(seed=2**64)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            ObfuscationConfig(seed=0, method="mystery")
