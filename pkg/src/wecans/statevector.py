"""Dense statevector simulation of parametric circuits.

Qubit 0 is the most significant bit of the basis-state index, so the Pauli
string ``"ZI"`` acts with ``Z`` on qubit 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .pauli import Observable

_S2 = 1.0 / np.sqrt(2.0)
FIXED_GATES = {
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "Sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
}
TWO_QUBIT_GATES = ("CZ", "CNOT")
ROTATION_AXES = ("X", "Y", "Z")


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    """A gate in a parametric circuit.

    Rotations ``exp(-i theta A / 2)`` with ``A`` in {X, Y, Z} carry either a
    parameter index ``param`` or a frozen ``angle``. Fixed gates are named
    ``H``, ``Sdg``, ``X``, ``CZ`` or ``CNOT`` (control first).
    """

    name: str
    qubits: tuple[int, ...]
    param: int | None = None
    angle: float | None = None

    @property
    def is_rotation(self) -> bool:
        return self.name in ROTATION_AXES and (self.param is not None or self.angle is not None)


def rotation(axis: str, qubit: int, param: int) -> Gate:
    return Gate(axis, (qubit,), param=param)


def fixed_rotation(axis: str, qubit: int, angle: float) -> Gate:
    return Gate(axis, (qubit,), angle=float(angle))


def rotation_matrix(axis: str, theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    if axis == "X":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if axis == "Y":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if axis == "Z":
        return np.array([[c - 1j * s, 0], [0, c + 1j * s]])
    raise CircuitError(f"unknown rotation axis {axis!r}")


@dataclass(frozen=True)
class ParametricCircuit:
    n: int
    gates: tuple[Gate, ...]

    def __post_init__(self):
        seen = []
        for gate in self.gates:
            if any(q < 0 or q >= self.n for q in gate.qubits):
                raise CircuitError(f"qubit index out of range in {gate}")
            if gate.is_rotation:
                if gate.param is not None and gate.angle is not None:
                    raise CircuitError(f"rotation needs exactly one of param/angle: {gate}")
                if gate.param is not None:
                    seen.append(gate.param)
            elif gate.name in TWO_QUBIT_GATES:
                if len(gate.qubits) != 2 or gate.qubits[0] == gate.qubits[1]:
                    raise CircuitError(f"bad two-qubit gate {gate}")
            elif gate.name not in FIXED_GATES:
                raise CircuitError(f"unsupported gate {gate.name!r}")
            if gate.name not in TWO_QUBIT_GATES and len(gate.qubits) != 1:
                raise CircuitError(f"single-qubit gate on {len(gate.qubits)} qubits: {gate}")
        if sorted(seen) != list(range(len(seen))):
            raise CircuitError("parameter indices must map one-to-one onto 0..d-1")
        object.__setattr__(self, "_d", len(seen))
        # gate position of each parameter, used for shifted re-simulation
        where = [0] * len(seen)
        for pos, gate in enumerate(self.gates):
            if gate.param is not None:
                where[gate.param] = pos
        object.__setattr__(self, "_param_pos", tuple(where))

    @property
    def d(self) -> int:
        return self._d

    def param_position(self, i: int) -> int:
        return self._param_pos[i]

    def then(self, other: "ParametricCircuit") -> "ParametricCircuit":
        if other.n != self.n:
            raise CircuitError("qubit counts differ")
        return ParametricCircuit(self.n, self.gates + other.gates)

    def bound_inverse(self, theta: Sequence[float]) -> "ParametricCircuit":
        """Circuit for ``U(theta)^dagger`` with every parameter frozen."""
        theta = np.asarray(theta, dtype=float)
        inv = []
        for gate in reversed(self.gates):
            if gate.is_rotation:
                angle = theta[gate.param] if gate.param is not None else gate.angle
                inv.append(fixed_rotation(gate.name, gate.qubits[0], -angle))
            elif gate.name == "Sdg":
                raise CircuitError("Sdg has no inverse in the supported gate set")
            else:
                inv.append(gate)
        return ParametricCircuit(self.n, tuple(inv))


def zero_state(n: int) -> np.ndarray:
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1.0
    return psi


def apply_1q(psi: np.ndarray, mat: np.ndarray, q: int, n: int) -> np.ndarray:
    view = psi.reshape(2**q, 2, 2 ** (n - q - 1))
    a0, a1 = view[:, 0, :], view[:, 1, :]
    out = np.empty_like(view)
    out[:, 0, :] = mat[0, 0] * a0 + mat[0, 1] * a1
    out[:, 1, :] = mat[1, 0] * a0 + mat[1, 1] * a1
    return out.reshape(-1)


def apply_2q(psi: np.ndarray, name: str, c: int, t: int, n: int) -> np.ndarray:
    out = psi.reshape((2,) * n).copy()
    idx = [slice(None)] * n
    idx[c] = 1
    if name == "CZ":
        idx[t] = 1
        out[tuple(idx)] *= -1
    else:
        sub = [slice(None)] * n
        sub[c] = 1
        # flip target within the control=1 slice
        taxis = t - (1 if t > c else 0)
        out[tuple(sub)] = np.flip(out[tuple(sub)], axis=taxis)
    return out.reshape(-1)


def apply_gate(psi: np.ndarray, gate: Gate, theta: np.ndarray, n: int, shift: float = 0.0) -> np.ndarray:
    if gate.is_rotation:
        angle = theta[gate.param] if gate.param is not None else gate.angle
        return apply_1q(psi, rotation_matrix(gate.name, angle + shift), gate.qubits[0], n)
    if gate.name in FIXED_GATES:
        return apply_1q(psi, FIXED_GATES[gate.name], gate.qubits[0], n)
    return apply_2q(psi, gate.name, gate.qubits[0], gate.qubits[1], n)


def run(circuit: ParametricCircuit, theta: Sequence[float]) -> np.ndarray:
    """Statevector ``U(theta)|0...0>``."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (circuit.d,):
        raise CircuitError(f"expected {circuit.d} parameters, got shape {theta.shape}")
    psi = zero_state(circuit.n)
    for gate in circuit.gates:
        psi = apply_gate(psi, gate, theta, circuit.n)
    return psi


def prefix_states(circuit: ParametricCircuit, theta: np.ndarray) -> list[np.ndarray]:
    """``states[p]`` is the state before gate ``p``; the last entry is the output."""
    psi = zero_state(circuit.n)
    states = [psi]
    for gate in circuit.gates:
        psi = apply_gate(psi, gate, theta, circuit.n)
        states.append(psi)
    return states


def run_shifted(
    circuit: ParametricCircuit,
    theta: np.ndarray,
    i: int,
    shift: float,
    prefixes: list[np.ndarray] | None = None,
) -> np.ndarray:
    """State with parameter ``i`` shifted by ``shift``, reusing cached prefixes."""
    pos = circuit.param_position(i)
    psi = prefixes[pos] if prefixes is not None else None
    if psi is None:
        psi = zero_state(circuit.n)
        for gate in circuit.gates[:pos]:
            psi = apply_gate(psi, gate, theta, circuit.n)
    psi = apply_gate(psi, circuit.gates[pos], theta, circuit.n, shift=shift)
    for gate in circuit.gates[pos + 1 :]:
        psi = apply_gate(psi, gate, theta, circuit.n)
    return psi


def _check_dims(psi: np.ndarray, obs: Observable) -> None:
    if psi.shape != (2**obs.n_qubits,):
        raise CircuitError(f"state of length {psi.shape[0]} does not match {obs.n_qubits} qubits")


@lru_cache(maxsize=256)
def group_values(obs: Observable, j: int) -> np.ndarray:
    """Single-shot value of group ``j`` for every measured bitstring (rotated basis)."""
    n = obs.n_qubits
    if obs.projector:
        vals = np.ones(2**n)
        vals[0] = 0.0
        vals.setflags(write=False)
        return vals
    bits = (np.arange(2**n)[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    signs = 1 - 2 * bits
    out = np.zeros(2**n)
    for coeff, pauli in obs.group_terms(j):
        mask = np.array([letter != "I" for letter in pauli])
        out += coeff * np.prod(np.where(mask[None, :], signs, 1), axis=1)
    out.setflags(write=False)
    return out


def rotate_to_basis(psi: np.ndarray, basis: str) -> np.ndarray:
    n = len(basis)
    for q, letter in enumerate(basis):
        if letter == "X":
            psi = apply_1q(psi, FIXED_GATES["H"], q, n)
        elif letter == "Y":
            psi = apply_1q(psi, FIXED_GATES["Sdg"], q, n)
            psi = apply_1q(psi, FIXED_GATES["H"], q, n)
    return psi


def group_probabilities(psi: np.ndarray, obs: Observable, j: int) -> np.ndarray:
    """Outcome distribution after rotating into the measurement basis of group ``j``."""
    rotated = rotate_to_basis(psi, obs.group_basis(j))
    probs = np.abs(rotated) ** 2
    return probs / probs.sum()


def exact_expectation(psi: np.ndarray, obs: Observable) -> float:
    """``<psi|H|psi>`` evaluated group by group in the diagonal basis."""
    _check_dims(psi, obs)
    if obs.projector:
        return float(1.0 - abs(psi[0]) ** 2)
    total = obs.constant
    for j in range(obs.n_groups):
        total += float(group_probabilities(psi, obs, j) @ group_values(obs, j))
    return float(total)


def exact_group_expectation(psi: np.ndarray, obs: Observable, j: int) -> float:
    return float(group_probabilities(psi, obs, j) @ group_values(obs, j))


def dense_expectation(psi: np.ndarray, obs: Observable) -> float:
    _check_dims(psi, obs)
    val = np.vdot(psi, obs.to_dense() @ psi)
    return float(val.real)


def sample_group(
    psi: np.ndarray,
    obs: Observable,
    j: int,
    shots: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Per-shot values of group ``j`` by inverse-CDF sampling of bitstrings."""
    _check_dims(psi, obs)
    if not 0 <= j < obs.n_groups:
        raise CircuitError(f"group index {j} out of range")
    if shots < 1:
        raise CircuitError("shots must be positive")
    cdf = np.cumsum(group_probabilities(psi, obs, j))
    outcomes = np.searchsorted(cdf, rng.random(shots) * cdf[-1], side="right")
    outcomes = np.minimum(outcomes, cdf.size - 1)
    return group_values(obs, j)[outcomes]


def sample_group_counts(
    probs: np.ndarray, shots: int, rng: np.random.Generator
) -> np.ndarray:
    """Histogram of ``shots`` bitstrings drawn from ``probs``."""
    return rng.multinomial(shots, probs)
