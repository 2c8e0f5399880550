"""Dense state-vector simulation for small registers.

Index conventions (shared by every module):

* Qubit q contributes bit q of a basis-state index, so qubit 0 is the
  least significant bit.
* apply(state, gate, targets) reads the gate's own row/column index the
  same way: index bit j of the gate belongs to targets[j].  The CNOT
  constant below has its control on index bit 1, so
  apply(state, CNOT, [target, control]) is the usual wiring.
* Unitaries and density matrices are plain complex ndarrays; validation
  helpers (assert_unitary, check_density) guard the module boundaries
  instead of a wrapper class.

Registers are capped at 12 qubits; everything here is meant for protocol
verification at desk scale, not performance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DimensionError, EntanglementError, PreconditionError

QUBIT_CAP = 12
NORM_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
T = np.array([[1, 0], [0, np.exp(0.25j * np.pi)]], dtype=complex)
S = T @ T
CNOT = np.array(
    [[1, 0, 0, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1],
     [0, 0, 1, 0]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
SWAP = np.array(
    [[1, 0, 0, 0],
     [0, 0, 1, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1]], dtype=complex)
TOFFOLI = np.eye(8, dtype=complex)
TOFFOLI[[6, 7]] = TOFFOLI[[7, 6]]
FREDKIN = np.eye(8, dtype=complex)
FREDKIN[[5, 6]] = FREDKIN[[6, 5]]


class Rng:
    """Deterministic random source.  Identical seeds give identical streams."""

    def __init__(self, seed: int):
        self.seed = int(seed) % (1 << 64)
        self._gen = np.random.default_rng(self.seed)

    def bit(self) -> int:
        return int(self._gen.integers(0, 2))

    def bits(self, count: int) -> list[int]:
        return [self.bit() for _ in range(count)]

    def random(self) -> float:
        return float(self._gen.random())

    def integers(self, low: int, high: int) -> int:
        """Uniform integer in [low, high)."""
        return int(self._gen.integers(low, high))

    def normal(self, size) -> np.ndarray:
        return self._gen.standard_normal(size)

    def derive(self, index: int) -> "Rng":
        """Independent child stream, by hashing the seed with the index."""
        child = int(np.random.SeedSequence([self.seed, int(index)]).generate_state(1)[0])
        return Rng(child)


@dataclass(frozen=True)
class StateVector:
    """Pure state over n qubits; amplitudes indexed with qubit 0 as the LSB."""

    n: int
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if self.n < 0:
            raise DimensionError("negative qubit count")
        if amps.shape != (1 << self.n,):
            raise DimensionError(f"amplitude array is not 2^{self.n} long")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise PreconditionError(f"state norm {norm} drifted from 1")
        object.__setattr__(self, "amps", amps)


def _bare(n: int, amps: np.ndarray) -> StateVector:
    # construction bypass for internal callers whose output is normalised
    # by algebra; skips the dataclass validation on hot paths
    sv = object.__new__(StateVector)
    object.__setattr__(sv, "n", n)
    object.__setattr__(sv, "amps", amps)
    return sv


def prepare_zero(n: int) -> StateVector:
    """All-zeros register on n qubits."""
    if n < 1:
        raise DimensionError("register needs at least one qubit")
    if n > QUBIT_CAP:
        raise CapacityError(f"{n} qubits exceeds the dense cap of {QUBIT_CAP}")
    amps = np.zeros(1 << n, dtype=complex)
    amps[0] = 1.0
    return StateVector(n, amps)


def append_zero(state: StateVector) -> StateVector:
    """Extend the register with one fresh |0> qubit as the new MSB."""
    if state.n + 1 > QUBIT_CAP:
        raise CapacityError(f"{state.n + 1} qubits exceeds the dense cap of {QUBIT_CAP}")
    return _bare(state.n + 1, np.concatenate([state.amps, np.zeros_like(state.amps)]))


def basis_state(n: int, index: int) -> StateVector:
    amps = np.zeros(1 << n, dtype=complex)
    amps[index] = 1.0
    return StateVector(n, amps)


def random_state(n: int, rng: Rng) -> StateVector:
    """Pseudorandom pure state (normalised complex Gaussian vector)."""
    amps = rng.normal(1 << n) + 1j * rng.normal(1 << n)
    return StateVector(n, amps / np.linalg.norm(amps))


def tensor(low: StateVector, high: StateVector) -> StateVector:
    """Joint state with `high` occupying the new most significant qubits."""
    if low.n + high.n > QUBIT_CAP:
        raise CapacityError(f"{low.n + high.n} qubits exceeds the dense cap")
    return _bare(low.n + high.n, np.kron(high.amps, low.amps))


def apply(state: StateVector, gate: np.ndarray, targets) -> StateVector:
    """Apply a 2^k x 2^k gate to the listed qubits (targets[0] = index bit 0)."""
    targets = list(targets)
    k = len(targets)
    if gate.shape != (1 << k, 1 << k):
        raise DimensionError(f"gate shape {gate.shape} does not fit {k} targets")
    if len(set(targets)) != k:
        raise DimensionError("duplicate target qubit")
    if any(not 0 <= q < state.n for q in targets):
        raise DimensionError("target outside the register")
    if k == 1:
        # axis split (above, target, below) keeps this a pair of scaled adds
        q = targets[0]
        psi = state.amps.reshape(-1, 2, 1 << q)
        a0, a1 = psi[:, 0, :], psi[:, 1, :]
        out = np.empty_like(psi)
        out[:, 0, :] = gate[0, 0] * a0 + gate[0, 1] * a1
        out[:, 1, :] = gate[1, 0] * a0 + gate[1, 1] * a1
        return _bare(state.n, out.reshape(-1))
    psi = state.amps.reshape([2] * state.n)
    g = gate.reshape([2] * (2 * k))
    # Contract gate column bit j with the axis of qubit targets[j].
    col_axes = [2 * k - 1 - j for j in range(k)]
    target_axes = [state.n - 1 - q for q in targets]
    moved = np.tensordot(g, psi, axes=(col_axes, target_axes))
    # Output row bit j sits at axis k-1-j; send it back to its qubit's slot.
    out = np.moveaxis(moved, [k - 1 - j for j in range(k)], target_axes)
    return _bare(state.n, out.reshape(1 << state.n))


def outcome_probabilities(state: StateVector, qubit: int) -> tuple[float, float]:
    """Born probabilities (p0, p1) for a computational measurement of one qubit."""
    psi = state.amps.reshape([2] * state.n)
    sliced = np.moveaxis(psi, state.n - 1 - qubit, 0)
    p1 = float(np.sum(np.abs(sliced[1]) ** 2))
    p0 = float(np.sum(np.abs(sliced[0]) ** 2))
    return p0, p1


def collapse(state: StateVector, qubit: int, bit: int) -> StateVector:
    """Post-measurement state for a forced outcome; rejects zero-probability branches."""
    probs = outcome_probabilities(state, qubit)
    p = probs[bit]
    if p < 1e-12:
        raise PreconditionError(f"outcome {bit} on qubit {qubit} has probability {p}")
    psi = state.amps.reshape([2] * state.n).copy()
    sliced = np.moveaxis(psi, state.n - 1 - qubit, 0)
    sliced[1 - bit] = 0.0
    return _bare(state.n, psi.reshape(1 << state.n) / math.sqrt(p))


def measure(state: StateVector, qubit: int, rng: Rng) -> tuple[int, StateVector]:
    """Sample a computational-basis measurement of one qubit and collapse."""
    _, p1 = outcome_probabilities(state, qubit)
    bit = 1 if rng.random() < p1 else 0
    return bit, collapse(state, qubit, bit)


def exact_distribution(state: StateVector) -> np.ndarray:
    """Born distribution over all 2^n basis states."""
    probs = np.abs(state.amps) ** 2
    if abs(float(probs.sum()) - 1.0) > 1e-10:
        raise PreconditionError("distribution does not sum to 1")
    return probs


def marginal_distribution(state: StateVector, qubits) -> np.ndarray:
    """Joint outcome distribution of the listed qubits (bit j of the outcome = qubits[j])."""
    qubits = list(qubits)
    probs = exact_distribution(state).reshape([2] * state.n)
    front = [state.n - 1 - q for q in reversed(qubits)]
    rest = [a for a in range(state.n) if a not in front]
    probs = probs.transpose(front + rest).reshape(1 << len(qubits), -1)
    return probs.sum(axis=1)


def reduced_density(state: StateVector, qubits) -> np.ndarray:
    """Density matrix of the listed qubits, tracing out the rest."""
    qubits = list(qubits)
    k = len(qubits)
    front = [state.n - 1 - q for q in reversed(qubits)]
    rest = [a for a in range(state.n) if a not in front]
    m = state.amps.reshape([2] * state.n).transpose(front + rest).reshape(1 << k, -1)
    return m @ m.conj().T


def check_density(rho: np.ndarray) -> None:
    """Validate Hermiticity, unit trace and positivity of a density matrix."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError("density matrix must be square")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
        raise PreconditionError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-10:
        raise PreconditionError("density matrix trace is not 1")
    if float(np.linalg.eigvalsh(rho).min()) < -1e-9:
        raise PreconditionError("density matrix has a negative eigenvalue")


def density_from_ensemble(members) -> np.ndarray:
    """Average density matrix of (probability, StateVector) pairs."""
    members = list(members)
    if not members:
        raise PreconditionError("empty ensemble")
    total = sum(p for p, _ in members)
    if any(p < -1e-12 for p, _ in members) or abs(total - 1.0) > 1e-10:
        raise PreconditionError(f"ensemble probabilities sum to {total}")
    dims = {sv.n for _, sv in members}
    if len(dims) != 1:
        raise DimensionError("ensemble members act on different register sizes")
    rho = sum(p * np.outer(sv.amps, sv.amps.conj()) for p, sv in members)
    check_density(rho)
    return rho


def equal_up_to_global_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> bool:
    """True when a == e^{i theta} b entrywise within tol.

    The phase is anchored on the largest-magnitude entry of b.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        return False
    flat_b = b.ravel()
    anchor = int(np.argmax(np.abs(flat_b)))
    if abs(flat_b[anchor]) < tol:
        return bool(np.max(np.abs(a)) <= tol)
    c = a.ravel()[anchor] / flat_b[anchor]
    if abs(abs(c) - 1.0) > tol:
        return False
    return bool(np.max(np.abs(a - c * b)) <= tol)


def distance_trace(a: np.ndarray, b: np.ndarray) -> float:
    """Trace distance: half the sum of singular values of the difference."""
    if a.shape != b.shape:
        raise DimensionError("trace distance needs matching shapes")
    return 0.5 * float(np.linalg.svd(a - b, compute_uv=False).sum())


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 for pure states."""
    if a.n != b.n:
        raise DimensionError("fidelity needs matching register sizes")
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


def assert_unitary(u: np.ndarray, tol: float = 1e-10) -> None:
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionError("unitary must be square")
    if np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) > tol:
        raise PreconditionError("matrix is not unitary within tolerance")


def haar_unitary(dim: int, rng: Rng) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = (rng.normal((dim, dim)) + 1j * rng.normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def factor_out(state: StateVector, qubits, tol: float = 1e-8):
    """Split off qubits that are in a product with the rest of the register.

    Returns (remaining_state, removed_amplitudes).  The removed factor's
    phase is canonicalised so the remaining state keeps the global phase
    of the input; raises EntanglementError when the split is impossible.
    Remaining qubits are renumbered downward to close the gap.
    """
    qubits = list(qubits)
    k = len(qubits)
    group_axes = [state.n - 1 - q for q in reversed(qubits)]
    rest_axes = [a for a in range(state.n) if a not in group_axes]
    m = state.amps.reshape([2] * state.n).transpose(rest_axes + group_axes).reshape(-1, 1 << k)
    if k == 1:
        # one qubit pinned to a basis value splits off by slicing alone
        norms = np.linalg.norm(m, axis=0)
        b = int(norms[1] > norms[0])
        if norms[1 - b] <= tol:
            phi = np.zeros(2, dtype=complex)
            phi[b] = 1.0
            return _bare(state.n - 1, m[:, b] / norms[b]), phi
    _, s, vh = np.linalg.svd(m, full_matrices=False)
    if s.size > 1 and s[1] > tol:
        raise EntanglementError(f"qubits {qubits} are entangled with the rest (s1={s[1]:.3g})")
    phi = vh[0]
    anchor = int(np.argmax(np.abs(phi)))
    phi = phi * (abs(phi[anchor]) / phi[anchor])
    kept = m @ phi.conj()
    if np.max(np.abs(m - np.outer(kept, phi))) > tol:
        raise EntanglementError(f"qubits {qubits} do not factor cleanly")
    return _bare(state.n - k, kept / np.linalg.norm(kept)), phi
