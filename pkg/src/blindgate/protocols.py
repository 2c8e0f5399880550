"""Delegated gate execution over Pauli one-time pads.

A restricted register machine (Paulis, SWAP, fresh |0> wires, coin
flips, and classical control over those) drives an untrusted helper
that owns all the hard gates.  Every wire crossing to the helper is
masked by fresh pad coins, the helper applies one advertised gate or
measures, and the pad comes off afterwards with corrections conjugated
through that gate.  Clifford requests close in one exchange; T-like
gates take a second exchange whose request comes from a fixed,
key-independent schedule, with decoy wires filling the slots the actual
correction does not need.

Randomness flows through a tape so the same code path serves sampled
runs and exhaustive branch enumeration.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import hierarchy, pauli
from . import simulator as sim
from .errors import (
    CapacityError,
    CircuitParseError,
    DimensionError,
    EntanglementError,
    NotRealizableError,
    PreconditionError,
    ProtocolAbort,
)

COLLAPSE_EPS = 1e-12


class TapeExhausted(Exception):
    """A scripted randomness tape ran out of bits."""


class DeadBranch(Exception):
    """A scripted branch forced a zero-probability measurement outcome."""


class SampledTape:
    """Draws coins and measurement outcomes from a seeded generator."""

    def __init__(self, rng: sim.Rng):
        self.rng = rng

    def draw_coin(self) -> int:
        return self.rng.bit()

    def draw_outcome(self, probs) -> int:
        return 1 if self.rng.random() < probs[1] else 0


class BranchTape:
    """Pre-scripted tape whose weight tracks the branch probability.

    Coins weigh 1/2 each and outcomes weigh their Born probability.
    Running past the script raises TapeExhausted so an enumerator can
    fork and extend it.
    """

    def __init__(self, script=()):
        self.script = tuple(int(b) for b in script)
        self.position = 0
        self.weight = 1.0

    def _next(self) -> int:
        if self.position == len(self.script):
            raise TapeExhausted
        bit = self.script[self.position]
        self.position += 1
        return bit

    def draw_coin(self) -> int:
        bit = self._next()
        self.weight *= 0.5
        return bit

    def draw_outcome(self, probs) -> int:
        bit = self._next()
        if probs[bit] <= COLLAPSE_EPS:
            raise DeadBranch
        self.weight *= probs[bit]
        return bit


class SeededCoinTape:
    """Scripted outcomes over one fixed, reproducible coin sequence.

    Coins come from a seeded generator and leave the weight alone, so
    the branch weights form a distribution conditioned on that coin
    draw. Lets an enumerator walk every measurement record of a large
    run without also forking on each coin.
    """

    def __init__(self, seed: int, script=()):
        self._rng = sim.Rng(seed)
        self.script = tuple(int(b) for b in script)
        self.position = 0
        self.weight = 1.0

    def draw_coin(self) -> int:
        return self._rng.bit()

    def draw_outcome(self, probs) -> int:
        if self.position == len(self.script):
            raise TapeExhausted
        bit = self.script[self.position]
        self.position += 1
        if probs[bit] <= COLLAPSE_EPS:
            raise DeadBranch
        self.weight *= probs[bit]
        return bit


@dataclass(frozen=True)
class GateRequest:
    """One helper instruction: apply the advertised unitary, or measure if None."""

    label: str
    unitary: np.ndarray | None


MEASURE = GateRequest("MEASURE", None)


@dataclass(frozen=True)
class TranscriptRound:
    index: int
    label: str
    sent: int
    returned: int
    bits: int


@dataclass
class ProtocolTranscript:
    """Everything the helper gets to see: requests, wire counts, reply sizes."""

    rounds: list[TranscriptRound] = field(default_factory=list)

    def labels(self) -> list[str]:
        return [r.label for r in self.rounds]

    def structure_signature(self) -> tuple:
        return tuple((r.label, r.sent, r.returned, r.bits) for r in self.rounds)

    def records(self) -> list[str]:
        lines = []
        for r in self.rounds:
            lines.append(f"round {r.index} dir=A->B request={r.label} qubits={r.sent}")
            lines.append(
                f"round {r.index} dir=B->A request={r.label} qubits={r.returned} bits={r.bits}"
            )
        return lines


class BobStrategy:
    """Helper-side behaviour; acts only on the wires sent each round."""

    name = "abstract"

    def act(self, state, positions, request, measure_fn):
        raise NotImplementedError


class HonestBob(BobStrategy):
    name = "honest"

    def act(self, state, positions, request, measure_fn):
        if request.unitary is None:
            bits = []
            for p in positions:
                state, bit = measure_fn(state, p)
                bits.append(bit)
            return state, bits
        return sim.apply(state, request.unitary, positions), []


class WrongGateBob(BobStrategy):
    """Substitutes a fixed unitary for every request of matching width."""

    name = "wrong-gate"

    def __init__(self, gate: np.ndarray | None = None):
        self.gate = sim.X if gate is None else gate

    def act(self, state, positions, request, measure_fn):
        if request.unitary is not None and request.unitary.shape == self.gate.shape:
            return sim.apply(state, self.gate, positions), []
        return HonestBob().act(state, positions, request, measure_fn)


class ScrambleBob(BobStrategy):
    """Hits every payload with a fresh Haar-random unitary."""

    name = "scramble"

    def __init__(self, seed: int = 0):
        self.rng = sim.Rng(seed)

    def act(self, state, positions, request, measure_fn):
        state = sim.apply(state, sim.haar_unitary(2 ** len(positions), self.rng), positions)
        if request.unitary is None:
            return HonestBob().act(state, positions, request, measure_fn)
        return state, []


class LieBob(BobStrategy):
    """Performs every request honestly but reports flipped outcome bits."""

    name = "lie"

    def act(self, state, positions, request, measure_fn):
        state, bits = HonestBob().act(state, positions, request, measure_fn)
        return state, [1 - b for b in bits]


class DropBob(BobStrategy):
    """Stops responding after a set number of rounds."""

    name = "drop"

    def __init__(self, after: int = 0):
        self.after = after
        self.count = 0

    def act(self, state, positions, request, measure_fn):
        if self.count >= self.after:
            raise ProtocolAbort(f"helper stopped responding at round {self.count}")
        self.count += 1
        return HonestBob().act(state, positions, request, measure_fn)


BOB_FACTORIES: dict[str, Callable[[int], BobStrategy]] = {
    "honest": lambda seed: HonestBob(),
    "wrong-gate": lambda seed: WrongGateBob(),
    "scramble": lambda seed: ScrambleBob(seed),
    "lie": lambda seed: LieBob(),
    "drop": lambda seed: DropBob(),
}


def make_bob(name: str, seed: int = 0) -> BobStrategy:
    if name not in BOB_FACTORIES:
        raise PreconditionError(f"unknown helper strategy {name!r}")
    return BOB_FACTORIES[name](seed)


ALLOWED_OPS = frozenset(
    {
        "prepare_zero",
        "input",
        "pauli",
        "controlled_pauli",
        "swap",
        "controlled_swap",
        "coin_flip",
        "send",
        "receive",
        "classical",
    }
)


@dataclass(frozen=True)
class LoggedOp:
    kind: str
    detail: str


class AliceMachine:
    """Register machine limited to pad bookkeeping.

    Quantum side: fresh |0> wires, X and Z (plain or classically
    controlled), SWAP (ditto), and shipping wires to the helper and
    back.  Classical side: coin flips and arithmetic on recorded bits.
    Wires are opaque ids; dense-register positions shift as wires leave,
    which stays hidden behind the id map.  Every operation lands in
    op_log and must belong to ALLOWED_OPS.
    """

    def __init__(self, tape=None, *, seed: int = 0, capture_views: bool = False):
        self.tape = tape if tape is not None else SampledTape(sim.Rng(seed))
        self.capture_views = capture_views
        self.op_log: list[LoggedOp] = []
        self.transcript = ProtocolTranscript()
        self.views: list[tuple[int, np.ndarray]] = []
        self._sv = sim.StateVector(0, np.ones(1, dtype=complex))
        self._pos: dict[int, int] = {}
        self._zombies: list[int] = []
        self._next_wire = 0

    def _log(self, kind: str, detail: str = ""):
        if kind not in ALLOWED_OPS:
            raise PreconditionError(f"operation kind {kind!r} is outside the allowed set")
        self.op_log.append(LoggedOp(kind, detail))

    def note(self, text: str):
        """Record a classical computation step."""
        self._log("classical", text)

    @property
    def state(self) -> sim.StateVector:
        return self._sv

    def wires(self) -> list[int]:
        return sorted(self._pos)

    def _position(self, wire: int) -> int:
        if wire not in self._pos:
            raise PreconditionError(f"wire {wire} is not held by this register")
        return self._pos[wire]

    def prepare_zero(self) -> int:
        self._sv = sim.append_zero(self._sv)
        wire = self._next_wire
        self._next_wire += 1
        self._pos[wire] = self._sv.n - 1
        self._log("prepare_zero", f"wire {wire}")
        return wire

    def inject(self, state: sim.StateVector) -> list[int]:
        """Accept an externally supplied register (the data to be processed)."""
        base = self._sv.n
        self._sv = sim.tensor(self._sv, state)
        wires = []
        for q in range(state.n):
            wire = self._next_wire
            self._next_wire += 1
            self._pos[wire] = base + q
            wires.append(wire)
        self._log("input", f"wires {wires}")
        return wires

    def x(self, wire: int):
        self._sv = sim.apply(self._sv, sim.X, [self._position(wire)])
        self._log("pauli", f"X {wire}")

    def z(self, wire: int):
        self._sv = sim.apply(self._sv, sim.Z, [self._position(wire)])
        self._log("pauli", f"Z {wire}")

    def x_if(self, bit: int, wire: int):
        if bit:
            self._sv = sim.apply(self._sv, sim.X, [self._position(wire)])
        self._log("controlled_pauli", f"X^{bit} {wire}")

    def z_if(self, bit: int, wire: int):
        if bit:
            self._sv = sim.apply(self._sv, sim.Z, [self._position(wire)])
        self._log("controlled_pauli", f"Z^{bit} {wire}")

    def swap(self, a: int, b: int):
        self._sv = sim.apply(self._sv, sim.SWAP, [self._position(a), self._position(b)])
        self._log("swap", f"{a} {b}")

    def swap_if(self, bit: int, a: int, b: int):
        if bit:
            self._sv = sim.apply(self._sv, sim.SWAP, [self._position(a), self._position(b)])
        self._log("controlled_swap", f"{a} {b} bit={bit}")

    def coin(self) -> int:
        bit = self.tape.draw_coin()
        self._log("coin_flip", str(bit))
        return bit

    def _measure_fn(self, state, position):
        probs = sim.outcome_probabilities(state, position)
        # a forced outcome consumes no randomness, so branch enumeration
        # does not fork on it
        if probs[1] <= COLLAPSE_EPS:
            bit = 0
        elif probs[0] <= COLLAPSE_EPS:
            bit = 1
        else:
            bit = self.tape.draw_outcome(probs)
        return sim.collapse(state, position, bit), bit

    def _drop_qubit(self, position: int):
        self._pos = {w: p - 1 if p > position else p for w, p in self._pos.items()}
        self._zombies = [p - 1 if p > position else p for p in self._zombies]

    def exchange(self, wires, request: GateRequest, bob: BobStrategy) -> list[int]:
        """One round trip: padded wires go out, the reply comes back.

        Measurement requests consume the wires; the reply is one bit per
        wire.  Unitary requests hand the wires back unchanged in count.
        """
        wires = list(wires)
        positions = [self._position(w) for w in wires]
        if len(set(positions)) != len(positions):
            raise PreconditionError("duplicate wires in one exchange")
        if request.unitary is not None and request.unitary.shape != (2 ** len(wires),) * 2:
            raise DimensionError("request unitary does not fit the payload")
        index = len(self.transcript.rounds)
        if self.capture_views:
            self.views.append((index, sim.reduced_density(self._sv, positions)))
        self._log("send", f"{request.label} wires {wires}")
        try:
            result, bits = bob.act(self._sv, tuple(positions), request, self._measure_fn)
        except ProtocolAbort as abort:
            abort.transcript = self.transcript
            raise
        if not isinstance(result, sim.StateVector) or result.n != self._sv.n:
            raise ProtocolAbort("helper returned a malformed register", self.transcript)
        self._sv = result
        bits = [int(b) for b in bits]
        returned = len(wires)
        if request.unitary is None:
            if len(bits) != len(wires):
                raise ProtocolAbort(
                    "helper reported the wrong number of outcomes", self.transcript
                )
            # measured wires leave the register; collapse makes the split exact
            for w in sorted(wires, key=lambda w: self._pos[w], reverse=True):
                p = self._pos.pop(w)
                self._sv, _ = sim.factor_out(self._sv, [p])
                self._drop_qubit(p)
            returned = 0
        self.transcript.rounds.append(
            TranscriptRound(index, request.label, len(wires), returned, len(bits))
        )
        self._log("receive", f"{request.label} bits {bits}")
        return bits

    def release(self, wire: int):
        """Hand a scratch wire back to the environment.

        Factors the qubit out when it is unentangled (always true on the
        honest path); otherwise it stays in the dense register as an
        inaccessible leftover so later analysis still sees its
        entanglement.
        """
        p = self._position(wire)
        del self._pos[wire]
        try:
            self._sv, _ = sim.factor_out(self._sv, [p])
        except EntanglementError:
            self._zombies.append(p)
            return
        self._drop_qubit(p)

    def view(self, wires) -> sim.StateVector:
        """Pure state of the listed wires, in that qubit order.

        Valid only when they make up the entire live register."""
        order = [self._position(w) for w in wires]
        if self._zombies or set(order) != set(range(self._sv.n)):
            raise PreconditionError("register holds more than the requested wires")
        n = self._sv.n
        axes = [n - 1 - order[q] for q in reversed(range(n))]
        amps = self._sv.amps.reshape([2] * n).transpose(axes).reshape(-1)
        return sim.StateVector(n, amps)

    def density(self, wires) -> np.ndarray:
        """Reduced density of the listed wires, in that qubit order."""
        return sim.reduced_density(self._sv, [self._position(w) for w in wires])


def assisted_measure(m: AliceMachine, bob: BobStrategy, wire: int) -> int:
    """Delegated computational measurement; the X coin hides the outcome."""
    j = m.coin()
    k = m.coin()
    m.z_if(k, wire)
    m.x_if(j, wire)
    reply = m.exchange([wire], MEASURE, bob)
    m.note(f"decode outcome as reply^{j}")
    return reply[0] ^ j


def assisted_hadamard(m: AliceMachine, bob: BobStrategy, wire: int):
    """One-exchange H; conjugation swaps the pad roles, X^j Z^k -> X^k Z^j."""
    j = m.coin()
    k = m.coin()
    m.z_if(k, wire)
    m.x_if(j, wire)
    m.exchange([wire], GateRequest("H", sim.H), bob)
    m.z_if(j, wire)
    m.x_if(k, wire)


def assisted_cnot(m: AliceMachine, bob: BobStrategy, control: int, target: int):
    """One-exchange CNOT.

    X on the control copies onto the target and Z on the target copies
    onto the control, so both decode masks mix the two pads.
    """
    jc, kc = m.coin(), m.coin()
    jt, kt = m.coin(), m.coin()
    m.z_if(kc, control)
    m.x_if(jc, control)
    m.z_if(kt, target)
    m.x_if(jt, target)
    m.exchange([target, control], GateRequest("CNOT", sim.CNOT), bob)
    m.z_if(kc ^ kt, control)
    m.x_if(jc, control)
    m.z_if(kt, target)
    m.x_if(jc ^ jt, target)


def broken_cnot(m: AliceMachine, bob: BobStrategy, control: int, target: int):
    """Faulty CNOT decode that forgets the target Z pad crossing to the control."""
    jc, kc = m.coin(), m.coin()
    jt, kt = m.coin(), m.coin()
    m.z_if(kc, control)
    m.x_if(jc, control)
    m.z_if(kt, target)
    m.x_if(jt, target)
    m.exchange([target, control], GateRequest("CNOT", sim.CNOT), bob)
    m.z_if(kc, control)
    m.x_if(jc, control)
    m.z_if(kt, target)
    m.x_if(jc ^ jt, target)


def assisted_t(m: AliceMachine, bob: BobStrategy, wire: int, *, reuse_pad: bool = False):
    """Two-exchange T.

    Undoing the pad after the T leaves an extra S^dagger exactly when
    the X coin was set, so a second exchange applies S either to the
    data wire or to a decoy, routed by a classically controlled swap.
    The decoy keeps the second request present in both cases.  reuse_pad
    re-keys the second pad from the first; that is the deliberately
    broken variant for the key-reuse demonstration.
    """
    j = m.coin()
    k = m.coin()
    m.z_if(k, wire)
    m.x_if(j, wire)
    m.exchange([wire], GateRequest("T", sim.T), bob)
    m.x_if(j, wire)
    m.z_if(k, wire)
    decoy = m.prepare_zero()
    m.swap_if(j, wire, decoy)
    if reuse_pad:
        j2, k2 = j, k
        m.note("second pad reuses first-round coins")
    else:
        j2, k2 = m.coin(), m.coin()
    m.z_if(k2, decoy)
    m.x_if(j2, decoy)
    m.exchange([decoy], GateRequest("S", sim.S), bob)
    m.z_if(j2 ^ k2, decoy)
    m.x_if(j2, decoy)
    m.swap_if(j, wire, decoy)
    m.release(decoy)


def _apply_wired_pauli(m: AliceMachine, p: pauli.PauliOperator, wires):
    for q, w in enumerate(wires):
        m.z_if((p.z_mask >> q) & 1, w)
        m.x_if((p.x_mask >> q) & 1, w)


def _draw_key(m: AliceMachine, wires) -> int:
    """Flip pad coins for each wire and apply the pad; returns the key index."""
    key = 0
    for q, w in enumerate(wires):
        j, k = m.coin(), m.coin()
        m.z_if(k, w)
        m.x_if(j, w)
        key += (j + 2 * k) * 4**q
    return key


@dataclass(frozen=True)
class OneRoundProtocol:
    """Single-exchange delegation of a gate with Pauli corrections."""

    gate: hierarchy.GateSpec
    decode_table: tuple[pauli.PauliOperator, ...]

    def run(self, m: AliceMachine, bob: BobStrategy, wires) -> list[int]:
        if len(wires) != self.gate.arity:
            raise PreconditionError(f"{self.gate.name} needs {self.gate.arity} wires")
        key = _draw_key(m, wires)
        m.exchange(list(wires), GateRequest(self.gate.name, self.gate.unitary), bob)
        _apply_wired_pauli(m, self.decode_table[key], wires)
        return []


def compile_one_round(gate: hierarchy.GateSpec) -> OneRoundProtocol:
    """Tabulate pad corrections; only Clifford gates close in one exchange."""
    n = gate.arity
    table = []
    for e in range(4**n):
        d = hierarchy.recognize_pauli(
            hierarchy.decode_for(gate.unitary, pauli.from_index(e, n))
        )
        if d is None:
            raise NotRealizableError(
                f"{gate.name} pushes a pad to a non-Pauli correction; "
                "use the two-exchange form"
            )
        table.append(d)
    return OneRoundProtocol(gate, tuple(table))


@dataclass(frozen=True)
class CorrectionSlot:
    """One scheduled second-exchange request with its own decode table."""

    label: str
    unitary: np.ndarray
    decode_table: tuple[pauli.PauliOperator, ...]
    members: tuple[int, ...]


@dataclass(frozen=True)
class TwoRoundProtocol:
    """Two-exchange delegation for gates whose pad corrections are Clifford.

    The second-exchange schedule lists every correction class in a fixed
    order regardless of the key; slots the key does not need run on
    decoy wires, so the request stream carries no key information.
    """

    gate: hierarchy.GateSpec
    schedule: tuple[CorrectionSlot, ...]
    slot_of: tuple[int | None, ...]
    residual: tuple[pauli.PauliOperator, ...]

    def run(self, m: AliceMachine, bob: BobStrategy, wires) -> list[int]:
        if len(wires) != self.gate.arity:
            raise PreconditionError(f"{self.gate.name} needs {self.gate.arity} wires")
        key = _draw_key(m, wires)
        m.exchange(list(wires), GateRequest(self.gate.name, self.gate.unitary), bob)
        mine = self.slot_of[key]
        for index, slot in enumerate(self.schedule):
            decoys = [m.prepare_zero() for _ in wires]
            hit = 1 if index == mine else 0
            for w, d in zip(wires, decoys):
                m.swap_if(hit, w, d)
            subkey = _draw_key(m, decoys)
            m.exchange(decoys, GateRequest(slot.label, slot.unitary), bob)
            _apply_wired_pauli(m, slot.decode_table[subkey], decoys)
            for w, d in zip(wires, decoys):
                m.swap_if(hit, w, d)
            for d in decoys:
                m.release(d)
        _apply_wired_pauli(m, self.residual[key], wires)
        return []


def compile_two_round(gate: hierarchy.GateSpec) -> TwoRoundProtocol:
    """Group pad corrections into Clifford classes modulo a leading Pauli.

    Each class contributes one schedule slot; its representative is
    swapped for a named gate whenever one matches up to a Pauli, which
    is how the T schedule comes out as a single S request.
    """
    u = gate.unitary
    n = gate.arity
    if not hierarchy.is_in_level(u, 3):
        raise NotRealizableError(f"{gate.name} pad corrections are not Clifford")
    slots: list[dict] = []
    slot_of: list[int | None] = []
    residual: list[pauli.PauliOperator] = []
    for e in range(4**n):
        d = hierarchy.decode_for(u, pauli.from_index(e, n))
        direct = hierarchy.recognize_pauli(d)
        if direct is not None:
            slot_of.append(None)
            residual.append(direct)
            continue
        placed = False
        for idx, s in enumerate(slots):
            left = hierarchy.recognize_pauli(d @ s["unitary"].conj().T)
            if left is not None:
                slot_of.append(idx)
                residual.append(left)
                s["members"].append(e)
                placed = True
                break
        if placed:
            continue
        rep, label = d, None
        for name, named in hierarchy.NAMED_GATES.items():
            if named.arity != n:
                continue
            if hierarchy.recognize_pauli(d @ named.unitary.conj().T) is not None:
                rep, label = named.unitary, name
                break
        if label is None:
            label = f"R{len(slots)}"
        table = []
        for e2 in range(4**n):
            p = hierarchy.recognize_pauli(hierarchy.decode_for(rep, pauli.from_index(e2, n)))
            if p is None:
                raise NotRealizableError(f"{gate.name} correction class is not Clifford")
            table.append(p)
        slots.append({"label": label, "unitary": rep, "table": tuple(table), "members": [e]})
        slot_of.append(len(slots) - 1)
        residual.append(hierarchy.recognize_pauli(d @ rep.conj().T))
    schedule = tuple(
        CorrectionSlot(s["label"], s["unitary"], s["table"], tuple(s["members"]))
        for s in slots
    )
    return TwoRoundProtocol(gate, schedule, tuple(slot_of), tuple(residual))


def _run_measure(m, bob, wires):
    return [assisted_measure(m, bob, wires[0])]


def _run_hadamard(m, bob, wires):
    assisted_hadamard(m, bob, wires[0])
    return []


def _run_cnot(m, bob, wires):
    # wire order matches the gate matrix: wires[0] target, wires[1] control
    assisted_cnot(m, bob, control=wires[1], target=wires[0])
    return []


def _run_t(m, bob, wires):
    assisted_t(m, bob, wires[0])
    return []


def _run_broken_reuse(m, bob, wires):
    assisted_t(m, bob, wires[0], reuse_pad=True)
    return []


@dataclass(frozen=True)
class ProtocolSpec:
    """Registry entry tying a named protocol to its runner and ideal action."""

    name: str
    n_wires: int
    run: Callable
    ideal: np.ndarray | None
    measures: bool


PROTOCOLS: dict[str, ProtocolSpec] = {
    "measure": ProtocolSpec("measure", 1, _run_measure, None, True),
    "hadamard": ProtocolSpec("hadamard", 1, _run_hadamard, sim.H, False),
    "cnot": ProtocolSpec("cnot", 2, _run_cnot, sim.CNOT, False),
    "t-gate": ProtocolSpec("t-gate", 1, _run_t, sim.T, False),
    "broken-reuse": ProtocolSpec("broken-reuse", 1, _run_broken_reuse, sim.T, False),
}


@dataclass(frozen=True)
class CircuitOp:
    kind: str  # H | T | CNOT | M
    qubits: tuple[int, ...]  # CNOT order: (control, target)


_ARITY = {"H": 1, "T": 1, "CNOT": 2, "M": 1}


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    ops: tuple[CircuitOp, ...]

    def __post_init__(self):
        measured = set()
        for op in self.ops:
            if op.kind not in _ARITY or len(op.qubits) != _ARITY[op.kind]:
                raise PreconditionError(f"malformed circuit op {op}")
            for q in op.qubits:
                if not 0 <= q < self.n_qubits:
                    raise PreconditionError(f"qubit {q} outside the register")
                if q in measured:
                    raise PreconditionError(f"qubit {q} used after its measurement")
            if op.kind == "CNOT" and op.qubits[0] == op.qubits[1]:
                raise PreconditionError("CNOT needs two distinct qubits")
            if op.kind == "M":
                measured.add(op.qubits[0])

    def measured_qubits(self) -> list[int]:
        return [op.qubits[0] for op in self.ops if op.kind == "M"]


def parse_circuit(text: str) -> Circuit:
    """Line format: `H q`, `T q`, `CNOT control target`, `M q`; # starts a comment."""
    ops = []
    top = -1
    measured = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0].upper()
        if kind not in _ARITY:
            raise CircuitParseError(line_no, f"unknown instruction {parts[0]!r}")
        if len(parts) - 1 != _ARITY[kind]:
            raise CircuitParseError(line_no, f"{kind} takes {_ARITY[kind]} qubit argument(s)")
        try:
            qubits = tuple(int(p) for p in parts[1:])
        except ValueError:
            raise CircuitParseError(line_no, f"bad qubit index in {line!r}") from None
        if any(q < 0 for q in qubits):
            raise CircuitParseError(line_no, "qubit indices are non-negative")
        if kind == "CNOT" and qubits[0] == qubits[1]:
            raise CircuitParseError(line_no, "CNOT needs two distinct qubits")
        for q in qubits:
            if q in measured:
                raise CircuitParseError(line_no, f"qubit {q} was already measured")
        if kind == "M":
            measured.add(qubits[0])
        ops.append(CircuitOp(kind, qubits))
        top = max(top, *qubits)
    return Circuit(top + 1, tuple(ops))


def _ideal_apply(state: sim.StateVector, op: CircuitOp) -> sim.StateVector:
    if op.kind == "H":
        return sim.apply(state, sim.H, [op.qubits[0]])
    if op.kind == "T":
        return sim.apply(state, sim.T, [op.qubits[0]])
    return sim.apply(state, sim.CNOT, [op.qubits[1], op.qubits[0]])


def ideal_final_state(circuit: Circuit, input_bits: int = 0) -> sim.StateVector:
    """Direct dense reference run; measurement-free circuits only."""
    if circuit.measured_qubits():
        raise PreconditionError("circuit contains measurements")
    state = sim.basis_state(circuit.n_qubits, input_bits)
    for op in circuit.ops:
        state = _ideal_apply(state, op)
    return state


def ideal_outcome_distribution(circuit: Circuit, input_bits: int = 0) -> dict:
    """Joint Born distribution of the M results, keyed in circuit order."""
    branches = [(1.0, sim.basis_state(circuit.n_qubits, input_bits), ())]
    for op in circuit.ops:
        if op.kind != "M":
            branches = [(w, _ideal_apply(s, op), o) for w, s, o in branches]
            continue
        q = op.qubits[0]
        grown = []
        for w, s, o in branches:
            probs = sim.outcome_probabilities(s, q)
            for bit in (0, 1):
                if probs[bit] > COLLAPSE_EPS:
                    grown.append((w * probs[bit], sim.collapse(s, q, bit), o + (bit,)))
        branches = grown
    out: dict[tuple[int, ...], float] = {}
    for w, _, o in branches:
        out[o] = out.get(o, 0.0) + w
    return out


@dataclass
class RunResult:
    circuit: Circuit
    mode: str
    measurements: dict[int, int]
    transcript: ProtocolTranscript
    state: sim.StateVector | None  # pure live-register state, None if a leftover clings
    density: np.ndarray  # reduced density of the live qubits, always present
    cycles: int
    gate_slots: int
    views: list  # (round index, payload density) pairs when capture_views was set


BLIND_SLOTS = ("H", "CNOT", "T", "M")


def blind_cycles(circuit: Circuit) -> int:
    """Cycles the blind scheduler needs; each cycle serves at least one op."""
    pending = deque(circuit.ops)
    cycles = 0
    while pending:
        cycles += 1
        for slot in BLIND_SLOTS:
            if pending and pending[0].kind == slot:
                pending.popleft()
    return cycles


def _run_op(m, bob, op, wires, measurements):
    if op.kind == "H":
        assisted_hadamard(m, bob, wires[op.qubits[0]])
    elif op.kind == "T":
        assisted_t(m, bob, wires[op.qubits[0]])
    elif op.kind == "CNOT":
        assisted_cnot(m, bob, wires[op.qubits[0]], wires[op.qubits[1]])
    else:
        measurements[op.qubits[0]] = assisted_measure(m, bob, wires[op.qubits[0]])


def _run_decoy(m, bob, slot):
    if slot == "H":
        w = m.prepare_zero()
        assisted_hadamard(m, bob, w)
        m.release(w)
    elif slot == "CNOT":
        a, b = m.prepare_zero(), m.prepare_zero()
        assisted_cnot(m, bob, a, b)
        m.release(a)
        m.release(b)
    elif slot == "T":
        w = m.prepare_zero()
        assisted_t(m, bob, w)
        m.release(w)
    else:
        w = m.prepare_zero()
        assisted_measure(m, bob, w)


def run_circuit(
    circuit: Circuit,
    bob: BobStrategy,
    *,
    mode: str = "plain",
    tape=None,
    seed: int = 0,
    capture_views: bool = False,
    min_cycles: int = 0,
    input_bits: int = 0,
) -> RunResult:
    """Execute a circuit through the helper.

    plain mode issues one protocol per gate.  blind mode walks a fixed
    H, CNOT, T, M request cycle, serving the front of the program when
    it matches the slot and a decoy wire otherwise, so the request
    stream depends only on the cycle count; min_cycles keeps padding
    with decoy-only cycles after the program is done.
    """
    if mode not in ("plain", "blind"):
        raise PreconditionError(f"unknown mode {mode!r}")
    # fail on the whole program's requirement, not on the wire-by-wire
    # growth path, whose count would understate what was asked for
    if circuit.n_qubits > sim.QUBIT_CAP:
        raise CapacityError(
            f"{circuit.n_qubits} qubits exceeds the dense cap of {sim.QUBIT_CAP}"
        )
    if not 0 <= input_bits < (1 << circuit.n_qubits):
        raise PreconditionError("input bits outside the register")
    m = AliceMachine(tape, seed=seed, capture_views=capture_views)
    wires = {}
    for q in range(circuit.n_qubits):
        wires[q] = m.prepare_zero()
        if (input_bits >> q) & 1:
            m.x(wires[q])
    measurements: dict[int, int] = {}
    cycles = 0
    if mode == "plain":
        for op in circuit.ops:
            _run_op(m, bob, op, wires, measurements)
    else:
        pending = deque(circuit.ops)
        while pending or cycles < min_cycles:
            cycles += 1
            for slot in BLIND_SLOTS:
                if pending and pending[0].kind == slot:
                    _run_op(m, bob, pending.popleft(), wires, measurements)
                else:
                    _run_decoy(m, bob, slot)
    live = [wires[q] for q in sorted(wires) if q not in measurements]
    density = m.density(live)
    try:
        state = m.view(live)
    except PreconditionError:
        state = None
    gate_slots = sum(1 for r in m.transcript.rounds if r.label in ("H", "CNOT", "T"))
    return RunResult(
        circuit, mode, measurements, m.transcript, state, density, cycles, gate_slots,
        m.views,
    )
