"""Shared test oracles, kept independent of the library's tensor code paths."""

import numpy as np


def embed(gate: np.ndarray, targets, n: int) -> np.ndarray:
    """Full 2^n matrix for a gate on the listed qubits, built by bit surgery.

    Index bit j of the gate belongs to targets[j], matching the library
    convention, but the construction here walks basis states explicitly.
    """
    dim = 1 << n
    k = len(targets)
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        local = 0
        for j, q in enumerate(targets):
            local |= ((col >> q) & 1) << j
        base = col
        for j, q in enumerate(targets):
            base &= ~(1 << q)
        for out_local in range(1 << k):
            row = base
            for j, q in enumerate(targets):
                row |= ((out_local >> j) & 1) << q
            full[row, col] += gate[out_local, local]
    return full


def partial_trace_oracle(rho: np.ndarray, keep, n: int) -> np.ndarray:
    """Partial trace by explicit index walking (keep[j] = bit j of the result)."""
    keep = list(keep)
    drop = [q for q in range(n) if q not in keep]
    dim_keep = 1 << len(keep)
    out = np.zeros((dim_keep, dim_keep), dtype=complex)
    for r in range(dim_keep):
        for c in range(dim_keep):
            for rest in range(1 << len(drop)):
                row = 0
                col = 0
                for j, q in enumerate(keep):
                    row |= ((r >> j) & 1) << q
                    col |= ((c >> j) & 1) << q
                for j, q in enumerate(drop):
                    bit = (rest >> j) & 1
                    row |= bit << q
                    col |= bit << q
                out[r, c] += rho[row, col]
    return out


def random_clifford(n, rng, length=20):
    """Product of random H/S/CNOT factors, as a dense matrix."""
    from blindgate import simulator as sim

    u = np.eye(2**n, dtype=complex)
    for _ in range(length):
        kind = rng.integers(3) if n > 1 else rng.integers(2)
        if kind == 0:
            u = embed(sim.H, [int(rng.integers(n))], n) @ u
        elif kind == 1:
            u = embed(sim.S, [int(rng.integers(n))], n) @ u
        else:
            target = int(rng.integers(n))
            control = int(rng.integers(n - 1))
            if control >= target:
                control += 1
            u = embed(sim.CNOT, [target, control], n) @ u
    return u


def random_diagonal_eighth_roots(n, rng):
    """Diagonal of random eighth roots of unity.  Level varies with the phase pattern."""
    exponents = rng.integers(8, size=2**n)
    return np.diag(np.exp(1j * np.pi * exponents / 4))


def protocol_matrix(run_fn, n, script):
    """Assemble the linear map a scripted protocol run applies to n wires.

    Valid because a fixed coin script makes the run a deterministic
    sequence of linear operations, so basis columns glue into one matrix
    with a consistent global phase.
    """
    from blindgate import protocols as proto

    cols = []
    for b in range(2**n):
        machine = proto.AliceMachine(proto.BranchTape(script))
        wires = [machine.prepare_zero() for _ in range(n)]
        for q in range(n):
            if (b >> q) & 1:
                machine.x(wires[q])
        run_fn(machine, wires)
        cols.append(machine.view(wires).amps)
    return np.array(cols).T
