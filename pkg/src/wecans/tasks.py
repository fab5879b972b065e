"""Benchmark task construction: compiling, Ising chain and Hamiltonian files."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .ansatz import hardware_efficient_ansatz, ising_ansatz, random_pauli_ansatz
from .pauli import Observable, build_projector_cost, build_tfim, load_observable, parse_observable
from .statevector import ParametricCircuit

TASK_KINDS = ("compile", "tfim", "hamiltonian-file")
ANSATZE = ("random-pauli", "hea", "ising")
DEFAULT_ANSATZ = {"compile": "random-pauli", "tfim": "ising", "hamiltonian-file": "hea"}
MAX_DENSE_QUBITS = 12


class TaskError(ValueError):
    pass


@dataclass(frozen=True)
class TaskSpec:
    kind: str
    n: int
    depth: int
    task_seed: int = 0
    J: float = 1.0
    g: float = 1.5
    path: str | None = None
    ansatz: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Task:
    spec: TaskSpec
    circuit: ParametricCircuit
    obs: Observable
    reference_energy: float
    energy_scale: float
    theta_star: np.ndarray | None = None


def build_ansatz(name: str, n: int, depth: int, rng: np.random.Generator) -> ParametricCircuit:
    if name == "random-pauli":
        return random_pauli_ansatz(n, depth, rng)
    if name == "hea":
        return hardware_efficient_ansatz(n, depth)
    if name == "ising":
        return ising_ansatz(n, depth)
    raise TaskError(f"unknown ansatz {name!r}; choose from {ANSATZE}")


def ground_energy(obs: Observable) -> float:
    if obs.n_qubits > MAX_DENSE_QUBITS:
        raise TaskError(f"dense diagonalization limited to {MAX_DENSE_QUBITS} qubits")
    return float(np.linalg.eigvalsh(obs.to_dense())[0])


def bundled_hamiltonians() -> list[str]:
    root = resources.files("wecans") / "data"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def _load_hamiltonian(path: str) -> Observable:
    p = Path(path)
    if p.is_file():
        return load_observable(p)
    name = p.name[:-5] if p.name.endswith(".json") else p.name
    if name in bundled_hamiltonians():
        text = (resources.files("wecans") / "data" / f"{name}.json").read_text("utf-8")
        return parse_observable(json.loads(text))
    raise FileNotFoundError(f"no Hamiltonian file at {path}")


def build_task(spec: TaskSpec) -> Task:
    """Circuit, observable and ground-state reference for a benchmark task."""
    if spec.kind not in TASK_KINDS:
        raise TaskError(f"unknown task {spec.kind!r}")
    if spec.n < 1 or spec.depth < 1:
        raise TaskError("n and depth must be positive")
    ansatz = spec.ansatz or DEFAULT_ANSATZ[spec.kind]
    rng = np.random.default_rng([spec.task_seed, 0x5EED])

    if spec.kind == "compile":
        base = build_ansatz(ansatz, spec.n, spec.depth, rng)
        theta_star = rng.uniform(0.0, 2 * math.pi, base.d)
        circuit = base.then(base.bound_inverse(theta_star))
        return Task(spec, circuit, build_projector_cost(spec.n), 0.0, 1.0, theta_star)

    if spec.kind == "tfim":
        obs = build_tfim(spec.n, spec.J, spec.g)
        scale = abs(spec.J) * spec.n
    else:
        if not spec.path:
            raise TaskError("hamiltonian-file task needs a path")
        obs = _load_hamiltonian(spec.path)
        scale = 1.0
    if obs.n_qubits != spec.n:
        raise TaskError(f"observable has {obs.n_qubits} qubits but the task asks for {spec.n}")
    circuit = build_ansatz(ansatz, spec.n, spec.depth, rng)
    return Task(spec, circuit, obs, ground_energy(obs), scale)
