"""NP-answer verification and black-box spot-check tests."""

import re

import pytest

from blindgate import classical as cl
from blindgate import honesty, protocols as proto, simulator as sim
from blindgate.errors import MalformedWitnessError, PreconditionError


class TestVerifyFactoring:
    def test_good_factorizations(self):
        assert honesty.verify_np_answer(15, (3, 5))
        assert honesty.verify_np_answer(15, (5, 3))
        assert honesty.verify_np_answer(16, (2, 2, 2, 2))
        assert honesty.verify_np_answer(1000003 * 7, (7, 1000003))

    def test_trivial_and_wrong_factors_are_false(self):
        assert not honesty.verify_np_answer(15, (1, 15))
        assert not honesty.verify_np_answer(15, (15,))
        assert not honesty.verify_np_answer(15, (3, 4))
        assert not honesty.verify_np_answer(15, ())
        assert not honesty.verify_np_answer(15, (-3, -5))

    def test_malformed_witnesses_raise(self):
        with pytest.raises(MalformedWitnessError):
            honesty.verify_np_answer(15, (3.0, 5.0))
        with pytest.raises(MalformedWitnessError):
            honesty.verify_np_answer(15, 35)
        with pytest.raises(MalformedWitnessError):
            honesty.verify_np_answer(15, ("3", "5"))

    def test_instance_validation(self):
        with pytest.raises(PreconditionError):
            honesty.verify_np_answer(1, (1,))
        with pytest.raises(PreconditionError):
            honesty.verify_np_answer(2.5, (5,))
        with pytest.raises(PreconditionError):
            honesty.verify_np_answer(True, (1,))


class TestVerifySat:
    def test_found_witnesses_verify(self):
        for i in range(50):
            formula, _ = cl.planted_formula(7, 18, sim.Rng(900 + i))
            witness = cl.brute_force_sat(formula)
            assert witness is not None
            assert honesty.verify_np_answer(formula, witness)

    def test_flipped_witnesses_are_mostly_rejected(self):
        rejected = 0
        total = 50
        for i in range(total):
            formula, _ = cl.planted_formula(7, 18, sim.Rng(900 + i))
            witness = cl.brute_force_sat(formula)
            flipped = (1 - witness[0],) + witness[1:]
            if not honesty.verify_np_answer(formula, flipped):
                rejected += 1
        assert rejected >= int(0.8 * total)

    def test_malformed_assignments_raise(self):
        formula = cl.CnfFormula(2, ((1, 2),))
        with pytest.raises(MalformedWitnessError):
            honesty.verify_np_answer(formula, (1,))
        with pytest.raises(MalformedWitnessError):
            honesty.verify_np_answer(formula, (1, 2))
        with pytest.raises(MalformedWitnessError):
            honesty.verify_np_answer(formula, None)


class TestProbeSchedule:
    @pytest.mark.parametrize("kind", ["MEASURE", "H", "T", "CNOT"])
    def test_all_probes_are_deterministic(self, kind):
        for probe in honesty.probe_schedule(kind):
            outcome = honesty.honest_prediction(probe)
            assert len(outcome) == probe.n_wires

    def test_hand_checked_predictions(self):
        # independent expectations: H.H = I, T keeps basis states,
        # T^4 = Z and H Z H = X, CNOT adds the control into the target
        by_label = {
            p.label: p for kind in ("MEASURE", "H", "T", "CNOT")
            for p in honesty.probe_schedule(kind)
        }
        assert honesty.honest_prediction(by_label["read|1>"]) == (1,)
        assert honesty.honest_prediction(by_label["H.H|0>"]) == (0,)
        assert honesty.honest_prediction(by_label["H.H|1>"]) == (1,)
        assert honesty.honest_prediction(by_label["T|1>"]) == (1,)
        assert honesty.honest_prediction(by_label["H.T4.H|0>"]) == (1,)
        assert honesty.honest_prediction(by_label["CNOT|c=1,t=0>"]) == (1, 1)
        assert honesty.honest_prediction(by_label["CNOT|c=0,t=1>"]) == (1, 0)
        assert honesty.honest_prediction(by_label["CNOT.CNOT|c=1,t=1>"]) == (1, 1)

    def test_unknown_kind_is_rejected(self):
        with pytest.raises(PreconditionError):
            honesty.probe_schedule("S")

    def test_nondeterministic_probe_is_rejected(self):
        with pytest.raises(PreconditionError):
            honesty.honest_prediction(honesty.Probe("bad", ("H",), 0, 1))


class TestSpotCheck:
    @pytest.mark.parametrize("kind", ["MEASURE", "H", "T", "CNOT"])
    def test_honest_helper_scores_zero(self, kind):
        report = honesty.spot_check(proto.HonestBob(), kind, trials=120, seed=5)
        assert report.deviation == 0.0
        assert not report.detected
        assert report.aborted == 0
        assert sum(p.trials for p in report.probes) == 120

    def test_wrong_gate_is_caught_by_the_doubled_probe(self):
        report = honesty.spot_check(proto.WrongGateBob(), "H", trials=400, seed=1)
        assert report.detected
        # substituting X for H garbles each pass into a random X-or-Z,
        # so the doubled chain misses about half the time
        assert report.deviation == pytest.approx(0.5, abs=0.1)

    def test_scramble_is_caught(self):
        report = honesty.spot_check(proto.ScrambleBob(seed=3), "T", trials=400, seed=2)
        assert report.detected
        assert report.deviation > 0.2

    def test_lie_is_caught_on_readout(self):
        report = honesty.spot_check(proto.LieBob(), "MEASURE", trials=50, seed=3)
        assert report.detected
        assert report.deviation == 1.0

    def test_silent_helper_counts_as_cheating(self):
        report = honesty.spot_check(proto.DropBob(after=0), "H", trials=40, seed=4)
        assert report.aborted == 40
        assert report.deviation == 1.0
        assert report.detected

    def test_threshold_is_configurable(self):
        report = honesty.spot_check(
            proto.WrongGateBob(), "H", trials=200, threshold=0.9, seed=1
        )
        assert not report.detected
        assert report.deviation > 0.1

    def test_reports_are_reproducible(self):
        a = honesty.spot_check(proto.ScrambleBob(seed=9), "H", trials=60, seed=7)
        b = honesty.spot_check(proto.ScrambleBob(seed=9), "H", trials=60, seed=7)
        assert a == b
        assert a.render() == b.render()

    def test_record_lines_are_machine_readable(self):
        report = honesty.spot_check(proto.HonestBob(), "CNOT", trials=5, seed=0)
        pattern = re.compile(
            r"^trial=\d+ probe=\S+ outcome=(abort|[01]+) expected=[01]+$"
        )
        lines = report.records()
        assert len(lines) == 5
        assert all(pattern.match(line) for line in lines)

    def test_render_mentions_the_verdict(self):
        clean = honesty.spot_check(proto.HonestBob(), "H", trials=20, seed=0)
        assert any("consistent with honest" in l for l in clean.render())
        dirty = honesty.spot_check(proto.LieBob(), "MEASURE", trials=20, seed=0)
        assert any("CHEATING SUSPECTED" in l for l in dirty.render())

    def test_trials_must_be_positive(self):
        with pytest.raises(PreconditionError):
            honesty.spot_check(proto.HonestBob(), "H", trials=0)

    def test_honest_false_positive_rate_is_zero_at_small_scale(self):
        # deterministic probes make every honest run score exactly zero
        for rep in range(20):
            report = honesty.spot_check(proto.HonestBob(), "H", trials=30, seed=rep)
            assert not report.detected


class TestMemorylessConsistency:
    def test_interleaving_data_runs_leaves_trial_outcomes_alone(self):
        # deterministic strategies answer each trial identically whether
        # or not unrelated delegated work happens in between, because
        # every trial runs on its own derived randomness
        bob = proto.WrongGateBob()
        plain = honesty.spot_check(bob, "H", trials=12, seed=21)
        probes = honesty.probe_schedule("H")
        expected = {p.label: honesty.honest_prediction(p) for p in probes}
        base = sim.Rng(21)
        interleaved = []
        for i in range(12):
            pick = base.derive(2 * i)
            probe = probes[min(int(pick.random() * len(probes)), len(probes) - 1)]
            # unrelated data work through the same black box
            data = proto.AliceMachine(proto.SampledTape(sim.Rng(1000 + i)))
            wire = data.prepare_zero()
            proto.assisted_hadamard(data, bob, wire)
            tape = proto.SampledTape(base.derive(2 * i + 1))
            outcome = honesty.run_probe(probe, bob, tape)
            interleaved.append((probe.label, outcome, expected[probe.label]))
        assert interleaved == [
            (r.probe, r.outcome, r.expected) for r in plain.trial_log
        ]

    @pytest.mark.parametrize("kind", ["MEASURE", "H", "CNOT", "T"])
    def test_probe_transcripts_match_data_transcripts(self, kind):
        # a probe trial and a real data run of the same gate leave
        # structurally identical transcripts, so the helper cannot
        # single out test trials to behave well on
        probe = honesty.probe_schedule(kind)[0]
        bob = proto.HonestBob()

        def transcript_of(state_bits):
            m = proto.AliceMachine(proto.SampledTape(sim.Rng(77)))
            wires = [m.prepare_zero() for _ in range(probe.n_wires)]
            for q in range(probe.n_wires):
                if (state_bits >> q) & 1:
                    m.x(wires[q])
            for label in probe.gates:
                if label == "H":
                    proto.assisted_hadamard(m, bob, wires[0])
                elif label == "T":
                    proto.assisted_t(m, bob, wires[0])
                elif label == "CNOT":
                    proto.assisted_cnot(m, bob, control=wires[1], target=wires[0])
            for w in wires:
                proto.assisted_measure(m, bob, w)
            return m.transcript.structure_signature()

        assert transcript_of(probe.input_bits) == transcript_of(
            (probe.input_bits + 1) % (1 << probe.n_wires)
        )
