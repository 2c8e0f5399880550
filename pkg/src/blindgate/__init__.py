"""Simulator and verification toolkit for Pauli-padded delegated quantum computation.

A limited client that can only prepare |0>, apply Pauli gates, swap wires
and flip coins delegates the hard gates (and all measurements) to an
untrusted universal helper.  Qubits travel under fresh Pauli one-time
pads, so the helper computes without learning anything about the data.
This package executes those protocols on a dense simulator and machine
checks both sides of the bargain: correctness (the composite equals the
ideal gate) and privacy (the helper's view stays maximally mixed).
"""

from .errors import (
    BlindgateError,
    CapacityError,
    CircuitParseError,
    DimensionError,
    EntanglementError,
    MalformedWitnessError,
    NotRealizableError,
    PreconditionError,
    ProtocolAbort,
)
from .pauli import PauliOperator

__all__ = [
    "BlindgateError",
    "CapacityError",
    "CircuitParseError",
    "DimensionError",
    "EntanglementError",
    "MalformedWitnessError",
    "NotRealizableError",
    "PauliOperator",
    "PreconditionError",
    "ProtocolAbort",
]
