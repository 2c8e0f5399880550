"""Catching a helper that computes wrong answers.

Two layers, matching how hard the check is.  Answers to NP-style jobs
(factoring, SAT) are verified outright: multiply the factors, evaluate
the assignment.  Gate work has no such certificate, so a memoryless
helper is spot-checked statistically: the client runs known probe
inputs through the very same delegation protocols, measures, and
compares frequencies against the honest prediction.

Every probe in the schedule has a deterministic honest outcome.  That
is deliberate: a probe whose honest answer is a coin flip needs many
trials before its frequency stabilizes, while a deterministic probe
makes any honest run score an exact zero deviation.  Basis-state
probes through a single gate cannot see every substitution (X and H
both randomize one qubit), so the schedule also includes composed
chains whose net effect is a known bit flip or identity.
"""

from dataclasses import dataclass

import numpy as np

from . import protocols
from . import simulator as sim
from .classical import CnfFormula, evaluate
from .errors import MalformedWitnessError, PreconditionError

DEFAULT_TRIALS = 400
DEFAULT_THRESHOLD = 0.05


def verify_np_answer(instance, answer) -> bool:
    """Check a claimed solution outright.

    Factoring instances are positive integers with witness = a tuple of
    at least two factors, each greater than 1, whose product is the
    instance.  SAT instances are CnfFormula objects with witness = a
    0/1 assignment.  Structurally broken witnesses raise
    MalformedWitnessError; well-formed non-solutions return False.
    """
    if isinstance(instance, CnfFormula):
        try:
            bits = tuple(int(b) for b in answer)
        except (TypeError, ValueError):
            raise MalformedWitnessError("assignment must be a bit sequence") from None
        if len(bits) != instance.n_vars or any(b not in (0, 1) for b in bits):
            raise MalformedWitnessError("assignment shape does not fit the formula")
        return evaluate(instance, bits)
    if isinstance(instance, int) and not isinstance(instance, bool):
        if instance < 2:
            raise PreconditionError("nothing to factor below 2")
        try:
            factors = tuple(answer)
        except TypeError:
            raise MalformedWitnessError("factor list is not iterable") from None
        if not all(isinstance(f, int) and not isinstance(f, bool) for f in factors):
            raise MalformedWitnessError("factors must be integers")
        if len(factors) < 2:
            return False
        if any(f <= 1 for f in factors):
            return False
        product = 1
        for f in factors:
            product *= f
        return product == instance
    raise PreconditionError(f"unrecognized instance type {type(instance).__name__}")


@dataclass(frozen=True)
class Probe:
    """One spot-check input: basis preparation, gate chain, full readout."""

    label: str
    gates: tuple[str, ...]
    input_bits: int
    n_wires: int


def honest_prediction(probe: Probe) -> tuple[int, ...]:
    """Deterministic honest outcome of a probe, by direct simulation.

    Rejects any probe whose ideal outcome distribution is not a point
    mass; the schedule is built to avoid those.
    """
    state = sim.basis_state(probe.n_wires, probe.input_bits)
    for label in probe.gates:
        if label == "H":
            state = sim.apply(state, sim.H, [0])
        elif label == "T":
            state = sim.apply(state, sim.T, [0])
        elif label == "CNOT":
            state = sim.apply(state, sim.CNOT, [0, 1])
        else:
            raise PreconditionError(f"unknown probe gate {label!r}")
    probs = sim.exact_distribution(state)
    top = int(np.argmax(probs))
    if probs[top] < 1.0 - 1e-9:
        raise PreconditionError(f"probe {probe.label} is not deterministic")
    return tuple((top >> q) & 1 for q in range(probe.n_wires))


def probe_schedule(kind: str) -> tuple[Probe, ...]:
    """Probes for one delegated gate kind.

    H uses the doubled chain (H then H is the identity) because a
    single H on a basis state gives a fair coin either way.  T gets the
    H T T T T H chain: four T make a Z, and conjugating by H turns that
    into a definite bit flip.  CNOT runs all four basis inputs plus a
    doubled chain.
    """
    if kind == "MEASURE":
        return tuple(Probe(f"read|{b}>", (), b, 1) for b in (0, 1))
    if kind == "H":
        return tuple(Probe(f"H.H|{b}>", ("H", "H"), b, 1) for b in (0, 1))
    if kind == "T":
        probes = [Probe(f"T|{b}>", ("T",), b, 1) for b in (0, 1)]
        probes.append(Probe("H.T4.H|0>", ("H", "T", "T", "T", "T", "H"), 0, 1))
        return tuple(probes)
    if kind == "CNOT":
        probes = [
            Probe(f"CNOT|c={c},t={t}>", ("CNOT",), (c << 1) | t, 2)
            for c in (0, 1)
            for t in (0, 1)
        ]
        probes.append(Probe("CNOT.CNOT|c=1,t=1>", ("CNOT", "CNOT"), 0b11, 2))
        return tuple(probes)
    raise PreconditionError(f"no probe schedule for gate kind {kind!r}")


def run_probe(probe: Probe, bob, tape) -> tuple[int, ...]:
    """One delegated execution of a probe, readout included."""
    m = protocols.AliceMachine(tape)
    wires = [m.prepare_zero() for _ in range(probe.n_wires)]
    for q in range(probe.n_wires):
        if (probe.input_bits >> q) & 1:
            m.x(wires[q])
    for label in probe.gates:
        if label == "H":
            protocols.assisted_hadamard(m, bob, wires[0])
        elif label == "T":
            protocols.assisted_t(m, bob, wires[0])
        elif label == "CNOT":
            protocols.assisted_cnot(m, bob, control=wires[1], target=wires[0])
        else:
            raise PreconditionError(f"unknown probe gate {label!r}")
    return tuple(protocols.assisted_measure(m, bob, w) for w in wires)


@dataclass(frozen=True)
class TrialRecord:
    index: int
    probe: str
    outcome: tuple[int, ...] | None  # None when the helper stopped responding
    expected: tuple[int, ...]


@dataclass(frozen=True)
class ProbeStat:
    label: str
    trials: int
    mismatches: int

    @property
    def deviation(self) -> float:
        # total variation against a point mass is just the miss rate
        return self.mismatches / self.trials if self.trials else 0.0


@dataclass(frozen=True)
class SpotCheckReport:
    gate: str
    trials: int
    threshold: float
    probes: tuple[ProbeStat, ...]
    aborted: int
    trial_log: tuple[TrialRecord, ...]

    @property
    def deviation(self) -> float:
        return max((p.deviation for p in self.probes if p.trials), default=0.0)

    @property
    def detected(self) -> bool:
        return self.deviation > self.threshold

    def records(self) -> list[str]:
        return [
            f"trial={r.index} probe={r.probe} "
            f"outcome={_bits(r.outcome)} expected={_bits(r.expected)}"
            for r in self.trial_log
        ]

    def render(self) -> list[str]:
        lines = [
            f"spot check: gate {self.gate}, {self.trials} trials, "
            f"threshold {self.threshold}"
        ]
        for p in self.probes:
            lines.append(
                f"  {p.label}: {p.trials} trials, {p.mismatches} mismatches, "
                f"deviation {p.deviation:.4f}"
            )
        if self.aborted:
            lines.append(f"  aborted trials: {self.aborted}")
        verdict = "CHEATING SUSPECTED" if self.detected else "consistent with honest"
        lines.append(f"  worst deviation {self.deviation:.4f}: {verdict}")
        return lines


def _bits(outcome) -> str:
    if outcome is None:
        return "abort"
    return "".join(str(b) for b in outcome)


def spot_check(
    bob,
    kind: str,
    trials: int = DEFAULT_TRIALS,
    threshold: float = DEFAULT_THRESHOLD,
    seed: int = 0,
) -> SpotCheckReport:
    """Estimate how far a black-box helper strays from the honest gate.

    Each trial draws a probe uniformly, runs the full delegation
    protocol on its own derived randomness, and scores the readout
    against the deterministic honest outcome.  A helper that stops
    responding counts as a mismatch, since silence on a probe is
    indistinguishable from refusal.  Trial i is reproducible from
    (seed, i) alone.
    """
    if trials < 1:
        raise PreconditionError("need at least one trial")
    probes = probe_schedule(kind)
    expected = {p.label: honest_prediction(p) for p in probes}
    base = sim.Rng(seed)
    misses = {p.label: 0 for p in probes}
    counts = {p.label: 0 for p in probes}
    aborted = 0
    log = []
    for i in range(trials):
        pick = base.derive(2 * i)
        probe = probes[min(int(pick.random() * len(probes)), len(probes) - 1)]
        tape = protocols.SampledTape(base.derive(2 * i + 1))
        counts[probe.label] += 1
        try:
            outcome = run_probe(probe, bob, tape)
        except protocols.ProtocolAbort:
            outcome = None
            aborted += 1
        if outcome != expected[probe.label]:
            misses[probe.label] += 1
        log.append(TrialRecord(i, probe.label, outcome, expected[probe.label]))
    stats = tuple(
        ProbeStat(p.label, counts[p.label], misses[p.label]) for p in probes
    )
    return SpotCheckReport(kind, trials, threshold, stats, aborted, tuple(log))
