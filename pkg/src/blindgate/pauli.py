"""Bitmask Pauli operators with an i**k phase.

Conventions used throughout the toolkit:

* An n-qubit Pauli is stored as two bitmasks plus a phase exponent and
  denotes  i**phase_exp * prod_q X_q**x_q * Z_q**z_q,  with X written to
  the left of Z on every qubit.
* Bit q of a mask refers to qubit q, and qubit 0 is the least significant
  bit of a basis-state index.  to_matrix therefore places qubit 0 in the
  rightmost Kronecker factor.
* Phaseless Paulis on one qubit enumerate as I, X, Z, XZ.  An n-qubit
  index packs one such 2-bit code per qubit, qubit 0 in the low bits.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import CapacityError, DimensionError

MATRIX_QUBIT_CAP = 12

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# indexed by x + 2*z
_FACTORS = (_I2, _X, _Z, _X @ _Z)
_PHASES = (1.0 + 0j, 1j, -1.0 + 0j, -1j)


@dataclass(frozen=True)
class PauliOperator:
    """i**phase_exp times a product of per-qubit X**x Z**z factors."""

    n: int
    x_mask: int
    z_mask: int
    phase_exp: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError("a Pauli needs at least one qubit")
        span = 1 << self.n
        if not (0 <= self.x_mask < span and 0 <= self.z_mask < span):
            raise DimensionError("mask has bits outside the register")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return multiply(self, other)

    def __str__(self) -> str:
        return render(self)


def identity(n: int) -> PauliOperator:
    return PauliOperator(n, 0, 0, 0)


def x_on(n: int, qubit: int) -> PauliOperator:
    return PauliOperator(n, 1 << qubit, 0, 0)


def z_on(n: int, qubit: int) -> PauliOperator:
    return PauliOperator(n, 0, 1 << qubit, 0)


def phaseless(p: PauliOperator) -> PauliOperator:
    return replace(p, phase_exp=0)


def multiply(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """Operator product a.b, with a acting on the left."""
    if a.n != b.n:
        raise DimensionError(f"cannot multiply Paulis on {a.n} and {b.n} qubits")
    # Moving each Z of a past each X of b on the same qubit costs a sign.
    crossings = (a.z_mask & b.x_mask).bit_count()
    phase = (a.phase_exp + b.phase_exp + 2 * crossings) % 4
    return PauliOperator(a.n, a.x_mask ^ b.x_mask, a.z_mask ^ b.z_mask, phase)


def inverse(p: PauliOperator) -> PauliOperator:
    """Hermitian adjoint, which is also the group inverse."""
    # (X Z)^dagger = Z X = -X Z on every qubit carrying both factors.
    flips = (p.x_mask & p.z_mask).bit_count()
    return replace(p, phase_exp=(-p.phase_exp + 2 * flips) % 4)


def commutes(a: PauliOperator, b: PauliOperator) -> bool:
    """True when a.b == b.a, by the symplectic parity rule."""
    if a.n != b.n:
        raise DimensionError(f"cannot compare Paulis on {a.n} and {b.n} qubits")
    parity = (a.x_mask & b.z_mask).bit_count() + (a.z_mask & b.x_mask).bit_count()
    return parity % 2 == 0


def to_matrix(p: PauliOperator) -> np.ndarray:
    """Dense matrix of p, qubit 0 in the least significant index bit."""
    if p.n > MATRIX_QUBIT_CAP:
        raise CapacityError(f"{p.n} qubits exceeds the dense cap of {MATRIX_QUBIT_CAP}")
    out = np.eye(1, dtype=complex)
    for q in range(p.n - 1, -1, -1):
        code = ((p.x_mask >> q) & 1) | (((p.z_mask >> q) & 1) << 1)
        out = np.kron(out, _FACTORS[code])
    return _PHASES[p.phase_exp] * out


def to_index(p: PauliOperator) -> int:
    """Index of the phaseless part of p; the phase is deliberately dropped."""
    index = 0
    for q in range(p.n):
        code = ((p.x_mask >> q) & 1) | (((p.z_mask >> q) & 1) << 1)
        index |= code << (2 * q)
    return index


def from_index(index: int, n: int) -> PauliOperator:
    """Phaseless Pauli with the given enumeration index."""
    if not 0 <= index < 4**n:
        raise DimensionError(f"index {index} outside [0, 4^{n})")
    x_mask = 0
    z_mask = 0
    for q in range(n):
        code = (index >> (2 * q)) & 3
        x_mask |= (code & 1) << q
        z_mask |= (code >> 1) << q
    return PauliOperator(n, x_mask, z_mask, 0)


def all_phaseless(n: int):
    """All 4**n phaseless Paulis in enumeration order."""
    for index in range(4**n):
        yield from_index(index, n)


def render(p: PauliOperator) -> str:
    """Text form such as 'i^2 · X0 Z0 X1'; identity renders as 'I'."""
    parts = []
    for q in range(p.n):
        if (p.x_mask >> q) & 1:
            parts.append(f"X{q}")
        if (p.z_mask >> q) & 1:
            parts.append(f"Z{q}")
    body = " ".join(parts) if parts else "I"
    if p.phase_exp:
        return f"i^{p.phase_exp} · {body}"
    return body


def parse_pauli(text: str, n: int | None = None) -> PauliOperator:
    """Inverse of render.  Factors multiply left to right."""
    phase = 0
    factors: list[tuple[str, int]] = []
    max_qubit = -1
    for token in text.replace("·", " ").split():
        if token.startswith("i^"):
            phase += int(token[2:])
        elif token == "I":
            pass
        elif token[0] in "XZ" and token[1:].isdigit():
            qubit = int(token[1:])
            factors.append((token[0], qubit))
            max_qubit = max(max_qubit, qubit)
        else:
            raise ValueError(f"unrecognised Pauli token {token!r}")
    if n is None:
        n = max_qubit + 1 if max_qubit >= 0 else 1
    elif max_qubit >= n:
        raise DimensionError(f"token on qubit {max_qubit} but register has {n}")
    out = PauliOperator(n, 0, 0, phase)
    for kind, qubit in factors:
        out = multiply(out, x_on(n, qubit) if kind == "X" else z_on(n, qubit))
    return out
