"""Branch enumeration and helper-view privacy checks."""

import numpy as np
import pytest

from blindgate import protocols as proto
from blindgate import security as sec
from blindgate import simulator as sim
from blindgate.errors import PreconditionError

from util import partial_trace_oracle


class TestEnumerateBranches:
    def test_two_coins_give_four_equal_branches(self):
        def run(tape):
            return (tape.draw_coin(), tape.draw_coin())

        branches = sec.enumerate_branches(run)
        assert sorted(payload for payload, _ in branches) == [
            (0, 0), (0, 1), (1, 0), (1, 1)
        ]
        assert all(w == pytest.approx(0.25) for _, w in branches)

    def test_no_randomness_is_a_single_unit_branch(self):
        branches = sec.enumerate_branches(lambda tape: "done")
        assert branches == [("done", 1.0)]

    def test_outcome_weights_follow_the_probabilities(self):
        def run(tape):
            return tape.draw_outcome((0.3, 0.7))

        weights = dict(sec.enumerate_branches(run))
        assert weights[0] == pytest.approx(0.3)
        assert weights[1] == pytest.approx(0.7)

    def test_impossible_outcomes_are_pruned(self):
        def run(tape):
            return tape.draw_outcome((1.0, 0.0))

        branches = sec.enumerate_branches(run)
        assert branches == [(0, 1.0)]

    def test_mixed_draws_multiply_weights(self):
        def run(tape):
            c = tape.draw_coin()
            o = tape.draw_outcome((0.25, 0.75))
            return (c, o)

        weights = dict(sec.enumerate_branches(run))
        assert weights[(0, 1)] == pytest.approx(0.375)
        assert sum(weights.values()) == pytest.approx(1.0)

    def test_everything_dead_is_an_error(self):
        def run(tape):
            raise proto.DeadBranch

        with pytest.raises(PreconditionError):
            sec.enumerate_branches(run)

    def test_seeded_coin_tape_keeps_coins_fixed_across_branches(self):
        def run(tape):
            coins = tuple(tape.draw_coin() for _ in range(8))
            return (coins, tape.draw_outcome((0.5, 0.5)))

        factory = lambda script: proto.SeededCoinTape(11, script)
        branches = sec.enumerate_branches(run, factory)
        assert len(branches) == 2
        coin_runs = {payload[0] for payload, _ in branches}
        assert len(coin_runs) == 1  # same coin sequence on every branch
        assert sum(w for _, w in branches) == pytest.approx(1.0)


EXPECTED_LABELS = {
    "measure": ["MEASURE"],
    "hadamard": ["H"],
    "cnot": ["CNOT"],
    "t-gate": ["T", "S"],
    "broken-reuse": ["T", "S"],
}


class TestBobViews:
    @pytest.mark.parametrize("name", sorted(proto.PROTOCOLS))
    def test_round_labels(self, name):
        spec = proto.PROTOCOLS[name]
        state = sim.basis_state(spec.n_wires, 0)
        views = sec.bob_views(name, state)
        assert [label for label, _ in views] == EXPECTED_LABELS[name]

    @pytest.mark.parametrize("name", ["measure", "hadamard", "cnot", "t-gate"])
    def test_honest_views_are_maximally_mixed(self, name):
        spec = proto.PROTOCOLS[name]
        states = sec.probe_states(spec.n_wires, 8, seed=37)
        assert sec.view_independence(name, states) <= 1e-9

    @pytest.mark.parametrize("bob", ["wrong-gate", "scramble", "lie"])
    def test_views_do_not_depend_on_the_helper(self, bob):
        # Snapshots are taken at send time, so even an adversarial helper
        # sees the same averaged payloads.
        states = sec.probe_states(1, 5, seed=52)
        assert sec.view_independence("hadamard", states, bob_name=bob) <= 1e-9
        assert sec.view_independence("t-gate", states, bob_name=bob, bob_seed=3) <= 1e-9

    def test_bob_view_density_picks_one_round(self):
        state = sim.random_state(1, sim.Rng(5))
        views = sec.bob_views("t-gate", state)
        rho = sec.bob_view_density("t-gate", state, 1)
        assert np.allclose(rho, views[1][1])

    def test_wire_count_mismatch_is_rejected(self):
        with pytest.raises(PreconditionError):
            sec.bob_views("cnot", sim.basis_state(1, 0))

    def test_unknown_protocol_is_rejected(self):
        with pytest.raises(PreconditionError):
            sec.bob_views("teleport", sim.basis_state(1, 0))

    def test_entangled_spectator_still_sees_noise(self):
        # Pad twirl acts on the sent subsystem alone, so even a wire that
        # is entangled with an unsent partner averages to white noise.
        bell = sim.StateVector(2, np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2))
        bob = proto.HonestBob()

        def run(tape):
            m = proto.AliceMachine(tape, capture_views=True)
            wires = m.inject(bell)
            proto.assisted_hadamard(m, bob, wires[0])
            return m.views

        branches = sec.enumerate_branches(run)
        avg = sum(w * views[0][1] for views, w in branches)
        assert sec.mixing_defect(avg) <= 1e-10

    def test_probe_states_cover_corners_and_count(self):
        states = sec.probe_states(2, 6, seed=1)
        assert len(states) == 6
        assert all(s.n == 2 for s in states)
        assert abs(states[0].amps[0]) == pytest.approx(1.0)
        assert abs(states[1].amps[3]) == pytest.approx(1.0)


def _reuse_round2_view(amps: np.ndarray) -> np.ndarray:
    """Straight-line oracle for the second payload under key reuse.

    Walks the four first-round coin pairs by direct matrix algebra:
    undo the pad around the helper's T, route the wire past the decoy
    when the X coin is set, then re-apply the same pad.
    """
    zero = np.array([1, 0], dtype=complex)
    acc = np.zeros((2, 2), dtype=complex)
    for j in (0, 1):
        for k in (0, 1):
            xj = sim.X if j else np.eye(2)
            zk = sim.Z if k else np.eye(2)
            after_round1 = zk @ xj @ sim.T @ xj @ zk @ amps
            sent = after_round1 if j else zero
            payload = xj @ zk @ sent
            acc += 0.25 * np.outer(payload, payload.conj())
    return acc


class TestKeyReuseLeak:
    def test_round2_views_match_direct_algebra(self):
        for amps in (
            np.array([1, 0], dtype=complex),
            np.array([1, 1], dtype=complex) / np.sqrt(2),
            np.array([0.6, 0.8j], dtype=complex),
        ):
            state = sim.StateVector(1, amps)
            rho = sec.bob_view_density("broken-reuse", state, 1)
            assert np.allclose(rho, _reuse_round2_view(amps), atol=1e-12)

    def test_reuse_leaks_a_quarter_between_zero_and_plus(self):
        zero = sim.basis_state(1, 0)
        plus = sim.StateVector(1, np.array([1, 1], dtype=complex) / np.sqrt(2))
        leak = sec.view_leakage("broken-reuse", zero, plus)
        assert leak == pytest.approx(0.25, abs=1e-10)
        assert leak > 0.1

    def test_fresh_pads_do_not_leak_on_the_same_pair(self):
        zero = sim.basis_state(1, 0)
        plus = sim.StateVector(1, np.array([1, 1], dtype=complex) / np.sqrt(2))
        assert sec.view_leakage("t-gate", zero, plus) <= 1e-10

    def test_first_round_stays_mixed_even_with_reuse(self):
        plus = sim.StateVector(1, np.array([1, 1], dtype=complex) / np.sqrt(2))
        assert sec.mixing_defect(sec.bob_view_density("broken-reuse", plus, 0)) <= 1e-10

    def test_reuse_round2_is_biased_for_plus_input(self):
        plus = sim.StateVector(1, np.array([1, 1], dtype=complex) / np.sqrt(2))
        rho = sec.bob_view_density("broken-reuse", plus, 1)
        assert np.allclose(rho, np.diag([0.75, 0.25]), atol=1e-10)

def _circuit(text: str) -> proto.Circuit:
    return proto.parse_circuit(text)


class TestOutcomeDistributions:
    def test_identity_measurement_is_deterministic(self):
        dist = sec.delegated_outcome_distribution(_circuit("M 0"), input_bits=1)
        assert dist == {(1,): pytest.approx(1.0)}

    def test_hadamard_gives_a_fair_coin(self):
        dist = sec.delegated_outcome_distribution(_circuit("H 0\nM 0"))
        assert dist[(0,)] == pytest.approx(0.5, abs=1e-12)
        assert dist[(1,)] == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("coin_seed", [0, 7, 123])
    def test_bell_correlation_for_any_coin_sequence(self, coin_seed):
        circuit = _circuit("H 0\nCNOT 0 1\nM 0\nM 1")
        dist = sec.delegated_outcome_distribution(circuit, coin_seed=coin_seed)
        ideal = proto.ideal_outcome_distribution(circuit)
        assert sec.total_variation(dist, ideal) <= 1e-12
        assert set(dist) == {(0, 0), (1, 1)}

    def test_blind_mode_decodes_the_same_distribution(self):
        circuit = _circuit("H 0\nM 0")
        dist = sec.delegated_outcome_distribution(circuit, mode="blind", coin_seed=9)
        assert dist[(0,)] == pytest.approx(0.5, abs=1e-12)
        assert dist[(1,)] == pytest.approx(0.5, abs=1e-12)

    def test_total_variation_basics(self):
        p = {(0,): 0.5, (1,): 0.5}
        q = {(0,): 1.0}
        assert sec.total_variation(p, p) == 0.0
        assert sec.total_variation(p, q) == pytest.approx(0.5)


class TestTranscriptBlindness:
    def test_single_gate_programs_are_indistinguishable(self):
        report = sec.transcript_blindness(_circuit("H 0"), _circuit("T 0"))
        assert report.identical_structure
        assert report.cycles == 1
        assert report.gate_slots == 3
        assert report.max_mixing_defect <= 1e-9
        assert report.blind()

    def test_report_threshold_is_honored(self):
        report = sec.BlindnessReport(True, 1, 3, 0.2)
        assert not report.blind()
        assert report.blind(tol=0.3)
        assert not sec.BlindnessReport(False, 1, 3, 0.0).blind()
