"""Conjugation-based gate classification.

Level 1 is the Pauli group, and level k holds the unitaries that map
every Pauli into level k-1 under conjugation.  Level 2 (the Clifford
group) and level 3 only need the conjugation images of the X/Z
generators, because the level below each of them is closed under
products; from level 4 up the membership test enumerates all 4^n
phaseless Paulis and recurses.

Delegation protocols lean on two facts checked here: a level-2 gate's
pad correction decode_for(u, key) is again a Pauli (one round suffices),
and a level-3 gate's correction is a Clifford (a second round finishes
the job).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import pauli, simulator as sim
from .errors import DimensionError, PreconditionError

PAULI_TOL = 1e-8


def num_qubits(matrix: np.ndarray) -> int:
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError("expected a square matrix")
    n = (matrix.shape[0]).bit_length() - 1
    if 1 << n != matrix.shape[0]:
        raise DimensionError(f"dimension {matrix.shape[0]} is not a power of two")
    return n


@dataclass(frozen=True)
class GateSpec:
    """A named unitary; index bit j of the matrix belongs to wire j."""

    name: str
    arity: int
    unitary: np.ndarray

    def __post_init__(self):
        if num_qubits(self.unitary) != self.arity:
            raise DimensionError(f"{self.name}: matrix does not act on {self.arity} qubits")
        sim.assert_unitary(self.unitary)


# CNOT: control on wire 1, target on wire 0.  TOFFOLI: controls 1 and 2,
# target 0.  FREDKIN: control 2, swaps wires 0 and 1.
NAMED_GATES: dict[str, GateSpec] = {
    spec.name: spec
    for spec in (
        GateSpec("X", 1, sim.X),
        GateSpec("Z", 1, sim.Z),
        GateSpec("XZ", 1, sim.X @ sim.Z),
        GateSpec("H", 1, sim.H),
        GateSpec("S", 1, sim.S),
        GateSpec("T", 1, sim.T),
        GateSpec("CNOT", 2, sim.CNOT),
        GateSpec("CZ", 2, sim.CZ),
        GateSpec("SWAP", 2, sim.SWAP),
        GateSpec("TOFFOLI", 3, sim.TOFFOLI),
        GateSpec("FREDKIN", 3, sim.FREDKIN),
    )
}


def recognize_pauli(u: np.ndarray, tol: float = PAULI_TOL) -> pauli.PauliOperator | None:
    """The phaseless Pauli equal to u up to global phase, or None.

    A Pauli's column c has its sole nonzero entry at row c XOR x_mask,
    with sign (-1)^parity(z_mask AND c), so the masks can be read off a
    handful of entries; one full comparison then confirms the candidate.
    """
    n = num_qubits(u)
    x_mask = int(np.argmax(np.abs(u[0])))
    base = u[x_mask, 0]
    if abs(base) < 0.5:
        return None
    z_mask = 0
    for q in range(n):
        ratio = u[x_mask ^ (1 << q), 1 << q] / base
        if abs(abs(ratio) - 1.0) > 0.5:
            return None
        if ratio.real < 0:
            z_mask |= 1 << q
    candidate = pauli.PauliOperator(n, x_mask, z_mask)
    if sim.equal_up_to_global_phase(u, pauli.to_matrix(candidate), tol):
        return candidate
    return None


def generators(n: int) -> list[tuple[str, pauli.PauliOperator]]:
    """Named X/Z generators of the n-qubit Pauli group."""
    out = []
    for q in range(n):
        out.append((f"X{q}", pauli.x_on(n, q)))
        out.append((f"Z{q}", pauli.z_on(n, q)))
    return out


def conjugate(u: np.ndarray, p: pauli.PauliOperator) -> np.ndarray:
    return u @ pauli.to_matrix(p) @ u.conj().T


def conjugation_table(
    u: np.ndarray, tol: float = PAULI_TOL
) -> dict[str, pauli.PauliOperator] | None:
    """Images of the X/Z generators under conjugation, or None off the Clifford group."""
    table = {}
    for name, gen in generators(num_qubits(u)):
        image = recognize_pauli(conjugate(u, gen), tol)
        if image is None:
            return None
        table[name] = image
    return table


def is_clifford(u: np.ndarray, tol: float = PAULI_TOL) -> bool:
    return conjugation_table(u, tol) is not None


def is_in_level(
    u: np.ndarray, k: int, tol: float = PAULI_TOL, *, full_enumeration: bool = False
) -> bool:
    """Membership in hierarchy level k.

    full_enumeration forces the 4^n sweep at this level even where the
    generator shortcut applies; recursion below always uses the default
    strategy.
    """
    if k < 1:
        raise PreconditionError("hierarchy levels start at 1")
    n = num_qubits(u)
    if k == 1:
        return recognize_pauli(u, tol) is not None
    if not full_enumeration:
        if k == 2:
            return is_clifford(u, tol)
        if k == 3:
            return all(is_clifford(conjugate(u, gen), tol) for _, gen in generators(n))
    return all(
        is_in_level(conjugate(u, p), k - 1, tol) for p in pauli.all_phaseless(n)
    )


@dataclass(frozen=True)
class Witness:
    """Conjugation image of one Pauli generator, with its own classification."""

    generator: str
    image_pauli: pauli.PauliOperator | None
    image_level: int | None


@dataclass(frozen=True)
class HierarchyVerdict:
    level: int | None  # None means beyond max_k
    max_k: int
    witnesses: tuple[Witness, ...]

    def render(self) -> list[str]:
        head = f"level {self.level}" if self.level else f"beyond level {self.max_k}"
        lines = [head]
        for w in self.witnesses:
            image = pauli.render(w.image_pauli) if w.image_pauli else "(not a Pauli)"
            depth = f"level {w.image_level}" if w.image_level else f"beyond level {self.max_k - 1}"
            lines.append(f"  {w.generator} -> {image} [{depth}]")
        return lines


def classify(u: np.ndarray, max_k: int = 4, tol: float = PAULI_TOL) -> HierarchyVerdict:
    """Smallest hierarchy level of u up to max_k, with conjugation witnesses."""
    if max_k < 1:
        raise PreconditionError("max_k must be at least 1")
    sim.assert_unitary(u)
    level = None
    for k in range(1, max_k + 1):
        if is_in_level(u, k, tol):
            level = k
            break
    witnesses = []
    for name, gen in generators(num_qubits(u)):
        image = conjugate(u, gen)
        image_level = None
        for k in range(1, max_k):
            if is_in_level(image, k, tol):
                image_level = k
                break
        witnesses.append(Witness(name, recognize_pauli(image, tol), image_level))
    return HierarchyVerdict(level, max_k, tuple(witnesses))


def decode_for(u: np.ndarray, key: pauli.PauliOperator) -> np.ndarray:
    """Correction u . key^dagger . u^dagger that undoes a pad pushed through u."""
    if num_qubits(u) != key.n:
        raise DimensionError("gate and key act on different register sizes")
    return u @ pauli.to_matrix(pauli.inverse(key)) @ u.conj().T


@dataclass(frozen=True)
class ReducedScheme:
    """Key maps that turn a helper running v into a protocol for target = d0.v.e0."""

    target: np.ndarray
    encodings: dict[int, pauli.PauliOperator]
    decodings: dict[int, np.ndarray]


def normalize_bob_gate(
    v: np.ndarray,
    e0: pauli.PauliOperator,
    d0: pauli.PauliOperator,
    target: np.ndarray | None = None,
) -> ReducedScheme:
    """Reduce a protocol whose helper natively applies v to one for u = d0.v.e0.

    Starting from a scheme with per-key encodings E_j (key 0 pair given as
    e0, d0), the new maps are E'_j = E_0^dag E_j and D'_j = D_j D_0^dag.
    Every key is verified to satisfy D'_j . u . E'_j = u before returning.
    """
    sim.assert_unitary(v)
    n = num_qubits(v)
    if e0.n != n or d0.n != n:
        raise DimensionError("key operators do not match the gate size")
    u = pauli.to_matrix(d0) @ v @ pauli.to_matrix(e0)
    if target is not None and not sim.equal_up_to_global_phase(u, target, 1e-10):
        raise PreconditionError("d0.v.e0 does not reach the requested target gate")
    v_dag = v.conj().T
    d0_dag = pauli.to_matrix(d0).conj().T
    encodings: dict[int, pauli.PauliOperator] = {}
    decodings: dict[int, np.ndarray] = {}
    for j in range(4**n):
        step = pauli.from_index(j, n)
        e_j = pauli.multiply(step, e0)
        encodings[j] = pauli.multiply(pauli.inverse(e0), e_j)
        decodings[j] = u @ pauli.to_matrix(pauli.inverse(e_j)) @ v_dag @ d0_dag
        composite = decodings[j] @ u @ pauli.to_matrix(encodings[j])
        if not sim.equal_up_to_global_phase(composite, u, 1e-10):
            raise PreconditionError(f"reduction failed verification at key {j}")
    return ReducedScheme(u, encodings, decodings)
