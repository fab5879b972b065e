"""Layered ansatz families used by the benchmarks.

Entanglers act on nearest neighbours in ascending order ``(0,1), (1,2), ...``.
"""

from __future__ import annotations

import numpy as np

from .statevector import Gate, ParametricCircuit, rotation


def _chain(name: str, n: int) -> list[Gate]:
    return [Gate(name, (q, q + 1)) for q in range(n - 1)]


def random_pauli_ansatz(n: int, depth: int, rng: np.random.Generator) -> ParametricCircuit:
    """Per layer: one rotation per qubit about a random axis, then a CZ chain."""
    gates: list[Gate] = []
    p = 0
    for _ in range(depth):
        for q in range(n):
            gates.append(rotation(str(rng.choice(["X", "Y", "Z"])), q, p))
            p += 1
        gates.extend(_chain("CZ", n))
    return ParametricCircuit(n, tuple(gates))


def hardware_efficient_ansatz(n: int, depth: int) -> ParametricCircuit:
    """Per layer: RX then RZ on every qubit, then a CNOT chain."""
    gates: list[Gate] = []
    p = 0
    for _ in range(depth):
        for q in range(n):
            gates.append(rotation("X", q, p))
            gates.append(rotation("Z", q, p + 1))
            p += 2
        gates.extend(_chain("CNOT", n))
    return ParametricCircuit(n, tuple(gates))


def ising_ansatz(n: int, depth: int) -> ParametricCircuit:
    """RY layer, then ``depth`` blocks of (CZ chain, RY layer).

    Parameter count is ``n * (depth + 1)``.
    """
    gates: list[Gate] = [rotation("Y", q, q) for q in range(n)]
    p = n
    for _ in range(depth):
        gates.extend(_chain("CZ", n))
        for q in range(n):
            gates.append(rotation("Y", q, p))
            p += 1
    return ParametricCircuit(n, tuple(gates))
