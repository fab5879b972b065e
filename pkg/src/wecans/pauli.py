"""Weighted Pauli sums, qubit-wise commuting groups and benchmark observables."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

PAULI_LETTERS = frozenset("IXYZ")

_PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class ObservableError(ValueError):
    """Raised for malformed Pauli terms or Hamiltonian documents."""


def qubitwise_commute(a: str, b: str) -> bool:
    """True if at every position the letters agree or one of them is ``I``."""
    return all(x == y or x == "I" or y == "I" for x, y in zip(a, b))


def _is_identity(pauli: str) -> bool:
    return set(pauli) <= {"I"}


@dataclass(frozen=True)
class Observable:
    """A Hamiltonian ``constant + sum_i c_i P_i`` partitioned into measurement groups.

    ``terms`` holds only non-identity strings. An all-identity component is folded
    into ``constant``; it enters exact expectations but is never sampled.

    When ``projector`` is set the observable is ``I - |0...0><0...0|`` and is
    measured directly in the computational basis (one group, 0/1 per shot).

    ``shot_ratio`` optionally fixes deterministic per-group shot weights, used
    instead of random group sampling (e.g. ``(J, g)`` for the Ising chain).
    """

    n_qubits: int
    terms: tuple[tuple[float, str], ...]
    groups: tuple[tuple[int, ...], ...]
    group_probs: tuple[float, ...]
    constant: float = 0.0
    projector: bool = False
    shot_ratio: tuple[float, ...] | None = None
    _bases: tuple[str, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        bases = []
        if self.projector:
            bases.append("Z" * self.n_qubits)
        else:
            for group in self.groups:
                basis = ["Z"] * self.n_qubits
                for idx in group:
                    for q, letter in enumerate(self.terms[idx][1]):
                        if letter != "I":
                            basis[q] = letter
                bases.append("".join(basis))
        object.__setattr__(self, "_bases", tuple(bases))

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def one_norm(self) -> float:
        return one_norm_bound(self)

    def group_basis(self, j: int) -> str:
        """Measurement basis letter per qubit for group ``j`` (``Z`` where unconstrained)."""
        return self._bases[j]

    def group_terms(self, j: int) -> list[tuple[float, str]]:
        return [self.terms[i] for i in self.groups[j]]

    def to_dense(self) -> np.ndarray:
        """Dense ``2^n x 2^n`` matrix; qubit 0 is the most significant index bit."""
        dim = 2**self.n_qubits
        if self.projector:
            mat = np.eye(dim, dtype=complex)
            mat[0, 0] = 0.0
            return mat
        mat = self.constant * np.eye(dim, dtype=complex)
        for coeff, pauli in self.terms:
            mat += coeff * pauli_matrix(pauli)
        return mat


def pauli_matrix(pauli: str) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for letter in pauli:
        out = np.kron(out, _PAULI_MATRICES[letter])
    return out


def _validate_terms(terms: Sequence[tuple[float, str]]) -> int:
    if len(terms) == 0:
        raise ObservableError("at least one term is required")
    n = len(terms[0][1])
    for coeff, pauli in terms:
        if len(pauli) != n:
            raise ObservableError(f"inconsistent Pauli string lengths: {pauli!r} vs {n}")
        if not set(pauli) <= PAULI_LETTERS:
            raise ObservableError(f"invalid Pauli letter in {pauli!r}")
        if isinstance(coeff, (complex, np.complexfloating)) or not math.isfinite(float(coeff)):
            raise ObservableError(f"coefficient must be a finite real, got {coeff!r}")
    if n == 0:
        raise ObservableError("Pauli strings must act on at least one qubit")
    return n


def _probs(terms, groups) -> tuple[float, ...]:
    weights = np.array([sum(abs(terms[i][0]) for i in g) for g in groups], dtype=float)
    total = weights.sum()
    if total <= 0:
        raise ObservableError("observable has no nonzero measured terms")
    return tuple(float(w) for w in weights / total)


def group_qubitwise(terms: Sequence[tuple[float, str]]) -> Observable:
    """Greedy qubit-wise commuting grouping.

    Terms are visited by decreasing ``|c|`` (stable, so ties keep input order) and
    each joins the first existing group it commutes with qubit-wise, otherwise it
    opens a new group. Identity strings become the constant offset.
    """
    n = _validate_terms(terms)
    constant = 0.0
    kept: list[tuple[float, str]] = []
    for coeff, pauli in terms:
        if _is_identity(pauli):
            constant += float(coeff)
        else:
            kept.append((float(coeff), pauli))
    if not kept:
        raise ObservableError("observable has no non-identity terms to measure")

    order = sorted(range(len(kept)), key=lambda i: -abs(kept[i][0]))
    groups: list[list[int]] = []
    for i in order:
        for group in groups:
            if all(qubitwise_commute(kept[i][1], kept[j][1]) for j in group):
                group.append(i)
                break
        else:
            groups.append([i])
    frozen = tuple(tuple(g) for g in groups)
    return Observable(
        n_qubits=n,
        terms=tuple(kept),
        groups=frozen,
        group_probs=_probs(kept, frozen),
        constant=constant,
    )


def one_norm_bound(obs: Observable, include_constant: bool = True) -> float:
    """Upper bound ``sum |c_i|`` on the operator norm."""
    if obs.projector:
        return 1.0
    total = sum(abs(c) for c, _ in obs.terms)
    if include_constant:
        total += abs(obs.constant)
    return float(total)


def build_tfim(n: int, J: float, g: float) -> Observable:
    """Open-boundary transverse-field Ising chain ``-J sum Z_i Z_{i+1} - g sum X_i``.

    Two groups (all ZZ bonds, all X fields) with a deterministic ``J:g`` shot split.
    """
    if n < 2:
        raise ObservableError("the Ising chain needs at least two sites")
    if J == 0 or g == 0:
        raise ObservableError("both the coupling and the field must be nonzero")
    terms = []
    for i in range(n - 1):
        letters = ["I"] * n
        letters[i] = letters[i + 1] = "Z"
        terms.append((-float(J), "".join(letters)))
    for i in range(n):
        letters = ["I"] * n
        letters[i] = "X"
        terms.append((-float(g), "".join(letters)))
    groups = (tuple(range(n - 1)), tuple(range(n - 1, 2 * n - 1)))
    return Observable(
        n_qubits=n,
        terms=tuple(terms),
        groups=groups,
        group_probs=_probs(terms, groups),
        shot_ratio=(abs(float(J)), abs(float(g))),
    )


def build_projector_cost(n: int) -> Observable:
    """Infidelity observable ``I - |0..0><0..0|`` sampled as 0/1 bits."""
    if n < 1:
        raise ObservableError("need at least one qubit")
    return Observable(
        n_qubits=n,
        terms=(),
        groups=((),),
        group_probs=(1.0,),
        projector=True,
    )


def from_terms(terms: Iterable[tuple[float, str]]) -> Observable:
    """Merge duplicate strings by adding coefficients, then group."""
    merged: dict[str, float] = {}
    for coeff, pauli in terms:
        merged[pauli] = merged.get(pauli, 0.0) + coeff
    return group_qubitwise([(c, p) for p, c in merged.items()])


def parse_observable(doc: dict) -> Observable:
    if not isinstance(doc, dict) or "n_qubits" not in doc or "terms" not in doc:
        raise ObservableError("document must contain 'n_qubits' and 'terms'")
    n = doc["n_qubits"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ObservableError(f"'n_qubits' must be a positive integer, got {n!r}")
    if not isinstance(doc["terms"], list) or not doc["terms"]:
        raise ObservableError("'terms' must be a non-empty list")
    terms = []
    for entry in doc["terms"]:
        try:
            coeff, pauli = entry["coeff"], entry["pauli"]
        except (KeyError, TypeError):
            raise ObservableError(f"malformed term {entry!r}") from None
        if isinstance(coeff, bool) or not isinstance(coeff, (int, float)):
            raise ObservableError(f"coefficient must be real, got {coeff!r}")
        if not isinstance(pauli, str):
            raise ObservableError(f"pauli must be a string, got {pauli!r}")
        pauli = pauli.upper()
        if len(pauli) != n:
            raise ObservableError(f"pauli {pauli!r} does not match n_qubits={n}")
        terms.append((float(coeff), pauli))
    return from_terms(terms)


def load_observable(source: str | os.PathLike) -> Observable:
    """Read a JSON Hamiltonian ``{"n_qubits": n, "terms": [{"coeff", "pauli"}, ...]}``."""
    with open(source, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ObservableError(f"invalid JSON in {source}: {exc}") from exc
    return parse_observable(doc)
