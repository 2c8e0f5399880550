"""Reversible bit-permutation mirror of the gate-ladder machinery.

The quantum delegation story has a classical shadow: XOR with a secret
mask plays the one-time pad, and conjugating mask-XORs through a
reversible gate plays the correction ladder.  Level 1 holds the XOR
maps themselves, level 2 their normalizer (exactly the affine
bijections), and Toffoli or Fredkin only appear at level 3.  Unlike the
quantum ladder there is no controlled step that climbs out of level 2,
which is the checkable core of the no-go argument reported here.

The module also carries the one classical protocol that does work:
blinding a CNF formula by flipping variables under a secret mask, so an
untrusted solver hands back a witness only the mask holder can read.
"""

from dataclasses import dataclass

from . import simulator as sim
from .errors import CapacityError, DimensionError, PreconditionError

BIT_CAP = 12


@dataclass(frozen=True)
class ReversibleGate:
    """Permutation of n-bit strings, tabulated over all 2^n points."""

    n: int
    perm: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError("gate needs at least one bit")
        if self.n > BIT_CAP:
            raise CapacityError(f"{self.n} bits exceeds the table cap of {BIT_CAP}")
        perm = tuple(int(v) for v in self.perm)
        size = 1 << self.n
        if len(perm) != size or sorted(perm) != list(range(size)):
            raise PreconditionError("table is not a permutation of the bit strings")
        object.__setattr__(self, "perm", perm)

    def __call__(self, x: int) -> int:
        return self.perm[x]


def identity_gate(n: int) -> ReversibleGate:
    return ReversibleGate(n, tuple(range(1 << n)))


def xor_gate(n: int, constant: int) -> ReversibleGate:
    """Level-1 element: XOR every input with a fixed constant."""
    if not 0 <= constant < (1 << n):
        raise PreconditionError("constant does not fit the bit count")
    return ReversibleGate(n, tuple(x ^ constant for x in range(1 << n)))


def controlled_xor(n: int, control: int, constant: int) -> ReversibleGate:
    """XOR the constant in only when the control bit is set.

    The constant must leave the control bit alone, otherwise the table
    is not even a bijection.
    """
    if not 0 <= control < n:
        raise PreconditionError("control bit out of range")
    if not 0 <= constant < (1 << n):
        raise PreconditionError("constant does not fit the bit count")
    if (constant >> control) & 1:
        raise PreconditionError("constant may not touch the control bit")
    mask = 1 << control
    return ReversibleGate(
        n, tuple(x ^ constant if x & mask else x for x in range(1 << n))
    )


def swap_bits(n: int, a: int, b: int) -> ReversibleGate:
    if a == b or not (0 <= a < n and 0 <= b < n):
        raise PreconditionError("need two distinct in-range bit positions")

    def move(x: int) -> int:
        xa, xb = (x >> a) & 1, (x >> b) & 1
        return x & ~(1 << a) & ~(1 << b) | (xb << a) | (xa << b)

    return ReversibleGate(n, tuple(move(x) for x in range(1 << n)))


def toffoli_gate() -> ReversibleGate:
    """Bits 1 and 2 control a NOT on bit 0."""
    return ReversibleGate(
        3, tuple(x ^ 1 if (x >> 1) & (x >> 2) & 1 else x for x in range(8))
    )


def fredkin_gate() -> ReversibleGate:
    """Bit 2 controls a swap of bits 0 and 1."""
    swap = swap_bits(3, 0, 1)
    return ReversibleGate(3, tuple(swap(x) if (x >> 2) & 1 else x for x in range(8)))


NAMED_CLASSICAL: dict[str, ReversibleGate] = {
    "NOT": xor_gate(1, 1),
    "CNOT": controlled_xor(2, 1, 0b01),
    "SWAP": swap_bits(2, 0, 1),
    "TOFFOLI": toffoli_gate(),
    "FREDKIN": fredkin_gate(),
}


def compose(outer: ReversibleGate, inner: ReversibleGate) -> ReversibleGate:
    """outer after inner."""
    if outer.n != inner.n:
        raise DimensionError("bit counts differ")
    return ReversibleGate(outer.n, tuple(outer.perm[v] for v in inner.perm))


def inverse(gate: ReversibleGate) -> ReversibleGate:
    table = [0] * len(gate.perm)
    for x, y in enumerate(gate.perm):
        table[y] = x
    return ReversibleGate(gate.n, tuple(table))


def is_xor_map(gate: ReversibleGate) -> bool:
    """Level-1 membership: the whole table is one constant XOR."""
    return _xor_table(gate.perm)


def conjugate_xor(gate: ReversibleGate, constant: int) -> ReversibleGate:
    """gate followed by XOR-with-constant followed by gate inverse."""
    inv = inverse(gate)
    return ReversibleGate(
        gate.n, tuple(gate.perm[inv.perm[y] ^ constant] for y in range(len(gate.perm)))
    )


def _xor_table(perm) -> bool:
    c = perm[0]
    return all(y == x ^ c for x, y in enumerate(perm))


def _table_level_le(perm, k: int) -> bool:
    # raw-tuple recursion; the public wrapper carries the validation
    if k == 1:
        return _xor_table(perm)
    size = len(perm)
    inv = [0] * size
    for x, y in enumerate(perm):
        inv[y] = x
    return all(
        _table_level_le(tuple(perm[inv[y] ^ c] for y in range(size)), k - 1)
        for c in range(size)
    )


def is_in_tilde_level(gate: ReversibleGate, k: int) -> bool:
    """Ladder membership by full enumeration.

    Level 1 is the XOR maps; level k conjugates every one of the 2^n
    XOR constants through the gate and asks for level k-1.  No closure
    shortcut: every constant is checked at every level.
    """
    if k < 1:
        raise PreconditionError("levels start at 1")
    return _table_level_le(gate.perm, k)


def tilde_level(gate: ReversibleGate, max_k: int = 4):
    """Smallest ladder level of the gate, or None when above max_k."""
    for k in range(1, max_k + 1):
        if is_in_tilde_level(gate, k):
            return k
    return None


def random_affine(n: int, rng: sim.Rng) -> ReversibleGate:
    """Uniform-ish level-2 element: invertible GF(2) matrix plus shift.

    Rows are rejection-sampled until the matrix is invertible; the
    result is verified against the ladder rather than trusted.
    """
    while True:
        rows = [_pack_bits(rng.bits(n)) for _ in range(n)]
        if _gf2_invertible(rows, n):
            break
    shift = _pack_bits(rng.bits(n))
    table = []
    for x in range(1 << n):
        y = shift
        for i, row in enumerate(rows):
            if _parity(row & x):
                y ^= 1 << i
        table.append(y)
    return ReversibleGate(n, tuple(table))


def _pack_bits(bits) -> int:
    value = 0
    for i, b in enumerate(bits):
        value |= b << i
    return value


def _parity(v: int) -> int:
    return bin(v).count("1") & 1


def _gf2_invertible(rows, n: int) -> bool:
    work = list(rows)
    for col in range(n):
        pivot = next((r for r in range(col, n) if (work[r] >> col) & 1), None)
        if pivot is None:
            return False
        work[col], work[pivot] = work[pivot], work[col]
        for r in range(n):
            if r != col and (work[r] >> col) & 1:
                work[r] ^= work[col]
    return True


@dataclass(frozen=True)
class NoGoReport:
    """Machine-checked evidence that the classical ladder stalls at affine.

    Controlled XOR maps all land in level 2, so no classically
    controlled level-1 correction ever climbs; composing level-2
    elements never escapes level 2; and the gates a universal set needs
    sit strictly at level 3.
    """

    controlled_xor_worst: int
    controlled_xor_count: int
    toffoli_level: int
    fredkin_level: int
    closure_samples: int
    closure_escapes: int

    def holds(self) -> bool:
        return (
            self.controlled_xor_worst <= 2
            and self.toffoli_level == 3
            and self.fredkin_level == 3
            and self.closure_escapes == 0
        )

    def render(self) -> list[str]:
        return [
            f"controlled-XOR gates on <=3 bits: {self.controlled_xor_count} checked, "
            f"worst level {self.controlled_xor_worst}",
            f"TOFFOLI level {self.toffoli_level}, FREDKIN level {self.fredkin_level}",
            f"level-2 composition closure: {self.closure_samples} samples, "
            f"{self.closure_escapes} escapes",
            "verdict: " + ("no-go evidence holds" if self.holds() else "EVIDENCE BROKEN"),
        ]


def demonstrate_no_go(sink=None, closure_samples: int = 10000, seed: int = 0) -> NoGoReport:
    """Assemble the no-go evidence by brute classification.

    sink, when given, receives each report line as it is produced.
    """
    worst = 1
    count = 0
    for n in (2, 3):
        for control in range(n):
            for constant in range(1 << n):
                if (constant >> control) & 1:
                    continue
                level = tilde_level(controlled_xor(n, control, constant), max_k=3)
                worst = max(worst, level if level is not None else 4)
                count += 1
    rng = sim.Rng(seed)
    escapes = 0
    for i in range(closure_samples):
        f = random_affine(3, rng.derive(2 * i))
        g = random_affine(3, rng.derive(2 * i + 1))
        if not (is_in_tilde_level(f, 2) and is_in_tilde_level(g, 2)):
            raise PreconditionError("affine sampler produced a non-level-2 gate")
        if not is_in_tilde_level(compose(f, g), 2):
            escapes += 1
    report = NoGoReport(
        controlled_xor_worst=worst,
        controlled_xor_count=count,
        toffoli_level=tilde_level(toffoli_gate()),
        fredkin_level=tilde_level(fredkin_gate()),
        closure_samples=closure_samples,
        closure_escapes=escapes,
    )
    if sink is not None:
        for line in report.render():
            sink(line)
    return report


@dataclass(frozen=True)
class CnfFormula:
    """CNF over 1-indexed variables; negative literal means negated.

    An empty clause is legal and unsatisfiable, matching the usual
    DIMACS reading.
    """

    n_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n_vars < 0:
            raise PreconditionError("negative variable count")
        clauses = tuple(tuple(int(l) for l in clause) for clause in self.clauses)
        for clause in clauses:
            for lit in clause:
                if lit == 0 or abs(lit) > self.n_vars:
                    raise PreconditionError(f"literal {lit} out of range")
        object.__setattr__(self, "clauses", clauses)


def evaluate(formula: CnfFormula, assignment) -> bool:
    """Does the 0/1 assignment (indexed by variable-1) satisfy the formula?"""
    assignment = list(assignment)
    if len(assignment) != formula.n_vars:
        raise DimensionError("assignment length does not match the variable count")
    for clause in formula.clauses:
        if not any(
            assignment[abs(lit) - 1] == (1 if lit > 0 else 0) for lit in clause
        ):
            return False
    return True


def parse_dimacs(text: str) -> CnfFormula:
    """Read DIMACS CNF: `p cnf vars clauses`, 0-terminated clause lines."""
    n_vars = None
    declared = None
    clauses: list[tuple[int, ...]] = []
    pending: list[int] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if n_vars is not None or len(parts) != 4 or parts[1] != "cnf":
                raise PreconditionError(f"line {line_no}: bad problem header")
            try:
                n_vars, declared = int(parts[2]), int(parts[3])
            except ValueError:
                raise PreconditionError(f"line {line_no}: bad problem header") from None
            continue
        if n_vars is None:
            raise PreconditionError(f"line {line_no}: clause before the header")
        for token in line.split():
            try:
                lit = int(token)
            except ValueError:
                raise PreconditionError(
                    f"line {line_no}: {token!r} is not a literal"
                ) from None
            if lit == 0:
                clauses.append(tuple(pending))
                pending = []
            else:
                pending.append(lit)
    if n_vars is None:
        raise PreconditionError("missing problem header")
    if pending:
        raise PreconditionError("last clause is not 0-terminated")
    if declared != len(clauses):
        raise PreconditionError(
            f"header declares {declared} clauses, found {len(clauses)}"
        )
    return CnfFormula(n_vars, tuple(clauses))


def format_dimacs(formula: CnfFormula) -> str:
    lines = [f"p cnf {formula.n_vars} {len(formula.clauses)}"]
    for clause in formula.clauses:
        lines.append(" ".join(str(l) for l in clause) + " 0")
    return "\n".join(lines) + "\n"


def mask_variables(formula: CnfFormula, mask) -> CnfFormula:
    """Invert each masked variable wherever it appears."""
    mask = tuple(int(b) for b in mask)
    if len(mask) != formula.n_vars:
        raise DimensionError("mask length does not match the variable count")
    blinded = tuple(
        tuple(-lit if mask[abs(lit) - 1] else lit for lit in clause)
        for clause in formula.clauses
    )
    return CnfFormula(formula.n_vars, blinded)


def blind_sat(formula: CnfFormula, rng: sim.Rng):
    """Hide the formula's satisfying set behind a uniform variable mask.

    Where the mask bit is set the variable is inverted in every clause,
    so a satisfies the blinded formula exactly when a XOR mask satisfies
    the original.  Returns (blinded formula, mask).
    """
    mask = tuple(rng.bit() for _ in range(formula.n_vars))
    return mask_variables(formula, mask), mask


def unblind_assignment(assignment, mask):
    """Undo the variable inversions on a returned witness."""
    assignment = tuple(int(b) for b in assignment)
    mask = tuple(int(b) for b in mask)
    if len(assignment) != len(mask):
        raise DimensionError("assignment and mask lengths differ")
    return tuple(a ^ m for a, m in zip(assignment, mask))


def brute_force_sat(formula: CnfFormula):
    """Exhaustive solver standing in for the untrusted helper.

    Returns a satisfying 0/1 tuple or None.
    """
    if formula.n_vars > BIT_CAP:
        raise CapacityError(f"{formula.n_vars} variables exceeds the cap of {BIT_CAP}")
    for bits in range(1 << formula.n_vars):
        assignment = tuple((bits >> i) & 1 for i in range(formula.n_vars))
        if evaluate(formula, assignment):
            return assignment
    return None


def random_formula(n_vars: int, n_clauses: int, rng: sim.Rng, width: int = 3) -> CnfFormula:
    """Random width-literal CNF with distinct variables inside each clause."""
    if width > n_vars:
        raise PreconditionError("clause width exceeds the variable count")
    clauses = []
    for _ in range(n_clauses):
        chosen: list[int] = []
        while len(chosen) < width:
            v = 1 + _draw_index(rng, n_vars)
            if v not in chosen:
                chosen.append(v)
        clauses.append(tuple(v if rng.bit() else -v for v in chosen))
    return CnfFormula(n_vars, tuple(clauses))


def planted_formula(n_vars: int, n_clauses: int, rng: sim.Rng, width: int = 3):
    """Random CNF guaranteed satisfiable; returns (formula, hidden assignment).

    Each clause gets one literal forced to agree with the hidden
    assignment, the standard planting trick.
    """
    hidden = tuple(rng.bit() for _ in range(n_vars))
    base = random_formula(n_vars, n_clauses, rng, width)
    fixed = []
    for clause in base.clauses:
        if any(hidden[abs(l) - 1] == (1 if l > 0 else 0) for l in clause):
            fixed.append(clause)
            continue
        spot = _draw_index(rng, len(clause))
        fixed.append(
            tuple(-l if i == spot else l for i, l in enumerate(clause))
        )
    return CnfFormula(n_vars, tuple(fixed)), hidden


def _draw_index(rng: sim.Rng, bound: int) -> int:
    return min(int(rng.random() * bound), bound - 1)
