"""Exact accounting of what the helper gets to see.

Every check here enumerates protocol branches rather than sampling
them.  A run is replayed once per coin/outcome script, each branch
carries its exact probability, and the helper's payload densities are
averaged with those weights.  Privacy then reduces to a concrete matrix
statement: the weighted average of every payload the helper receives
equals the maximally mixed state, no matter the input and no matter
what the helper does with earlier rounds.

The same enumerator doubles as an exact outcome-distribution engine for
delegated measurement circuits.
"""

from dataclasses import dataclass

import numpy as np

from . import protocols
from . import simulator as sim
from .errors import PreconditionError

WEIGHT_TOL = 1e-9


def enumerate_branches(run_fn, tape_factory=protocols.BranchTape):
    """Replay run_fn over every branch of its randomness tape.

    run_fn takes a fresh tape and must rebuild all of its own state on
    each call.  Whenever the tape runs dry the script forks on 0 and 1;
    zero-probability outcome branches are dropped.  Returns a list of
    (payload, weight) pairs whose weights sum to 1 for any run that
    consumes its randomness consistently.
    """
    results = []
    stack = [()]
    while stack:
        script = stack.pop()
        tape = tape_factory(script)
        try:
            payload = run_fn(tape)
        except protocols.TapeExhausted:
            stack.append(script + (0,))
            stack.append(script + (1,))
            continue
        except protocols.DeadBranch:
            continue
        results.append((payload, tape.weight))
    if not results:
        raise PreconditionError("every branch of the run died")
    total = sum(w for _, w in results)
    if abs(total - 1.0) > WEIGHT_TOL:
        raise PreconditionError(f"branch weights sum to {total}, not 1")
    return results


def _resolve(spec) -> protocols.ProtocolSpec:
    if isinstance(spec, str):
        try:
            return protocols.PROTOCOLS[spec]
        except KeyError:
            raise PreconditionError(f"unknown protocol {spec!r}") from None
    return spec


def bob_views(spec, input_state, bob_name="honest", bob_seed=0):
    """Average payload density per exchange round, over all branches.

    The densities are snapshots of exactly the qubits handed over, taken
    at send time, so they are what the helper holds regardless of its
    strategy.  Returns a list of (request label, density) in round order.
    """
    spec = _resolve(spec)
    if input_state.n != spec.n_wires:
        raise PreconditionError(
            f"{spec.name} drives {spec.n_wires} wires, state has {input_state.n}"
        )

    def run(tape):
        m = protocols.AliceMachine(tape, capture_views=True)
        wires = m.inject(input_state)
        spec.run(m, protocols.make_bob(bob_name, bob_seed), wires)
        return m.transcript.labels(), m.views

    branches = enumerate_branches(run)
    labels = branches[0][0][0]
    sums = [np.zeros_like(rho) for _, rho in branches[0][0][1]]
    for (branch_labels, views), weight in branches:
        if branch_labels != labels:
            raise PreconditionError("round structure varies across branches")
        for i, (_, rho) in enumerate(views):
            sums[i] = sums[i] + weight * rho
    return list(zip(labels, sums))


def bob_view_density(spec, input_state, round_index, bob_name="honest", bob_seed=0):
    """Averaged density of one exchange round's payload."""
    views = bob_views(spec, input_state, bob_name, bob_seed)
    return views[round_index][1]


def mixing_defect(rho: np.ndarray) -> float:
    """Trace distance from the maximally mixed state of the same size."""
    dim = rho.shape[0]
    return sim.distance_trace(rho, np.eye(dim) / dim)


def view_independence(spec, states, bob_name="honest", bob_seed=0) -> float:
    """Worst mixing defect over every round and every given input state.

    Zero means each payload the helper receives averages to white noise,
    so nothing about the input (or the program's progress) leaks.
    """
    worst = 0.0
    for state in states:
        for _, rho in bob_views(spec, state, bob_name, bob_seed):
            worst = max(worst, mixing_defect(rho))
    return worst


def view_leakage(spec, state_a, state_b, bob_name="honest", bob_seed=0) -> float:
    """Largest round-wise distance between two inputs' averaged views.

    A sound protocol gives zero: the helper's view cannot depend on the
    data.  Anything noticeably positive is a distinguishing attack.
    """
    views_a = bob_views(spec, state_a, bob_name, bob_seed)
    views_b = bob_views(spec, state_b, bob_name, bob_seed)
    if [l for l, _ in views_a] != [l for l, _ in views_b]:
        raise PreconditionError("round structure differs between the two inputs")
    return max(
        sim.distance_trace(ra, rb)
        for (_, ra), (_, rb) in zip(views_a, views_b)
    )


def probe_states(n: int, count: int, seed: int = 0):
    """Assorted pure test inputs: basis corners, flat superposition, randoms."""
    dim = 1 << n
    states = [
        sim.basis_state(n, 0),
        sim.basis_state(n, dim - 1),
        sim.StateVector(n, np.ones(dim, dtype=complex) / np.sqrt(dim)),
    ]
    rng = sim.Rng(seed)
    for i in range(max(0, count - len(states))):
        states.append(sim.random_state(n, rng.derive(i)))
    return states[:count]


@dataclass(frozen=True)
class BlindnessReport:
    """Outcome of comparing two programs through the helper's eyes."""

    identical_structure: bool
    cycles: int
    gate_slots: int
    max_mixing_defect: float

    def blind(self, tol: float = 1e-9) -> bool:
        return self.identical_structure and self.max_mixing_defect <= tol


def _blind_run_views(circuit, cycles, bob_name, bob_seed):
    def run(tape):
        result = protocols.run_circuit(
            circuit,
            protocols.make_bob(bob_name, bob_seed),
            mode="blind",
            tape=tape,
            capture_views=True,
            min_cycles=cycles,
        )
        return result.transcript.structure_signature(), result.views, result.gate_slots

    branches = enumerate_branches(run)
    signature = branches[0][0][0]
    gate_slots = branches[0][0][2]
    sums = [np.zeros_like(rho) for _, rho in branches[0][0][1]]
    for (branch_sig, views, slots), weight in branches:
        if branch_sig != signature or slots != gate_slots:
            raise PreconditionError("transcript structure varies across branches")
        for i, (_, rho) in enumerate(views):
            sums[i] = sums[i] + weight * rho
    return signature, sums, gate_slots


def transcript_blindness(
    circuit_a, circuit_b, bob_name="honest", bob_seed=0
) -> BlindnessReport:
    """Run two programs blind, padded to a common length, and compare.

    Checks that the request sequence, qubit counts, and reply counts
    match round for round, and that every averaged payload is maximally
    mixed for both programs.  When both hold, the helper's entire
    interaction record is one fixed distribution independent of which
    program ran.
    """
    cycles = max(
        protocols.blind_cycles(circuit_a), protocols.blind_cycles(circuit_b), 1
    )
    sig_a, views_a, slots_a = _blind_run_views(circuit_a, cycles, bob_name, bob_seed)
    sig_b, views_b, slots_b = _blind_run_views(circuit_b, cycles, bob_name, bob_seed)
    worst = max(mixing_defect(rho) for rho in views_a + views_b)
    identical = sig_a == sig_b and slots_a == slots_b
    return BlindnessReport(identical, cycles, max(slots_a, slots_b), worst)


def delegated_outcome_distribution(
    circuit,
    bob_name="honest",
    bob_seed=0,
    mode="plain",
    coin_seed=None,
    input_bits=0,
):
    """Exact joint distribution of the decoded measurement results.

    Keys are outcome tuples ordered by the circuit's measured qubits.
    With coin_seed=None every coin and outcome branch is enumerated;
    that is exponential in the coin count, so for larger circuits pass a
    coin_seed to fix one reproducible coin sequence and enumerate only
    the measurement branches (the honest distribution is the same for
    every coin sequence, which is the point of checking several seeds).
    """
    order = circuit.measured_qubits()

    def run(tape):
        result = protocols.run_circuit(
            circuit,
            protocols.make_bob(bob_name, bob_seed),
            mode=mode,
            tape=tape,
            input_bits=input_bits,
        )
        return tuple(result.measurements[q] for q in order)

    if coin_seed is None:
        factory = protocols.BranchTape
    else:
        factory = lambda script: protocols.SeededCoinTape(coin_seed, script)
    distribution: dict[tuple[int, ...], float] = {}
    for outcome, weight in enumerate_branches(run, factory):
        distribution[outcome] = distribution.get(outcome, 0.0) + weight
    return distribution


def total_variation(p: dict, q: dict) -> float:
    """Total variation distance between two outcome distributions."""
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)
