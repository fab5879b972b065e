import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wecans.ansatz import hardware_efficient_ansatz, ising_ansatz, random_pauli_ansatz
from wecans.pauli import build_projector_cost, from_terms, group_qubitwise
from wecans.statevector import (
    CircuitError,
    Gate,
    ParametricCircuit,
    apply_gate,
    exact_expectation,
    fixed_rotation,
    rotation,
    run,
    sample_group,
    zero_state,
)

from oracles import dense_hamiltonian, dense_state, random_terms


def one_qubit(axis="X"):
    return ParametricCircuit(1, (rotation(axis, 0, 0),))


def random_circuit(rng, n, n_gates):
    gates, p = [], 0
    for _ in range(n_gates):
        kind = rng.integers(4)
        if kind == 0:
            gates.append(rotation(str(rng.choice(["X", "Y", "Z"])), int(rng.integers(n)), p))
            p += 1
        elif kind == 1 and n > 1:
            a, b = rng.choice(n, 2, replace=False)
            gates.append(Gate(str(rng.choice(["CZ", "CNOT"])), (int(a), int(b))))
        elif kind == 2:
            gates.append(Gate(str(rng.choice(["H", "Sdg", "X"])), (int(rng.integers(n)),)))
        else:
            gates.append(fixed_rotation(str(rng.choice(["X", "Y", "Z"])), int(rng.integers(n)), rng.uniform(-3, 3)))
    return ParametricCircuit(n, tuple(gates))


def test_rx_zero_is_identity():
    psi = run(one_qubit(), [0.0])
    assert np.allclose(psi, [1, 0])


def test_rx_pi_flips():
    psi = run(one_qubit(), [math.pi])
    assert np.allclose(psi, [0, -1j], atol=1e-15)
    assert abs(psi[1]) ** 2 == pytest.approx(1.0)


def test_dimension_mismatch():
    with pytest.raises(CircuitError):
        run(one_qubit(), [0.0, 1.0])


@pytest.mark.parametrize("seed", range(5))
def test_random_circuit_matches_dense_product(seed):
    rng = np.random.default_rng(seed)
    circ = random_circuit(rng, 3, 25)
    theta = rng.uniform(0, 2 * np.pi, circ.d)
    fidelity = abs(np.vdot(dense_state(circ, theta), run(circ, theta))) ** 2
    assert fidelity == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize(
    "circuit_factory",
    [
        lambda: random_pauli_ansatz(3, 3, np.random.default_rng(1)),
        lambda: hardware_efficient_ansatz(4, 2),
        lambda: ising_ansatz(4, 2),
    ],
)
def test_ansatz_families_match_dense_product(circuit_factory):
    circ = circuit_factory()
    theta = np.random.default_rng(7).uniform(0, 2 * np.pi, circ.d)
    assert np.allclose(dense_state(circ, theta), run(circ, theta), atol=1e-12)


def test_ansatz_parameter_counts():
    assert random_pauli_ansatz(3, 3, np.random.default_rng(0)).d == 9
    assert hardware_efficient_ansatz(4, 3).d == 24
    assert ising_ansatz(6, 3).d == 24


def test_bound_inverse_returns_to_zero():
    rng = np.random.default_rng(3)
    base = random_pauli_ansatz(3, 3, rng)
    theta = rng.uniform(0, 2 * np.pi, base.d)
    circ = base.then(base.bound_inverse(theta))
    assert exact_expectation(run(circ, theta), build_projector_cost(3)) == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize(
    "gates",
    [
        (rotation("X", 0, 1),),  # indices must start at 0
        (rotation("X", 0, 0), rotation("Y", 0, 0)),  # shared index
        (Gate("CZ", (0, 0)),),
        (rotation("X", 3, 0),),
        (Gate("T", (0,)),),
        (Gate("X", (0,), param=0, angle=1.0),),
    ],
)
def test_invalid_circuits(gates):
    with pytest.raises(CircuitError):
        ParametricCircuit(2, gates)


@pytest.mark.parametrize("psi, pauli, expected", [([1, 0], "Z", 1.0), ([1, 1], "Z", 0.0), ([1, 1], "X", 1.0)])
def test_simple_expectations(psi, pauli, expected):
    psi = np.array(psi, complex) / np.linalg.norm(psi)
    assert exact_expectation(psi, group_qubitwise([(1.0, pauli)])) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_random_4q_expectation_vs_dense(seed):
    rng = np.random.default_rng(seed)
    terms = random_terms(rng, 4, 12)
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    psi /= np.linalg.norm(psi)
    expected = np.vdot(psi, dense_hamiltonian(terms, 4) @ psi).real
    assert exact_expectation(psi, from_terms(terms)) == pytest.approx(expected, abs=1e-10)


def test_expectation_dimension_mismatch():
    with pytest.raises(CircuitError):
        exact_expectation(zero_state(2), group_qubitwise([(1.0, "Z")]))


def test_sample_eigenstate():
    rng = np.random.default_rng(0)
    vals = sample_group(zero_state(1), group_qubitwise([(1.0, "Z")]), 0, 50, rng)
    assert np.all(vals == 1.0)


def test_sample_plus_state_x_basis():
    rng = np.random.default_rng(0)
    plus = np.array([1, 1], complex) / np.sqrt(2)
    assert np.all(sample_group(plus, group_qubitwise([(1.0, "X")]), 0, 50, rng) == 1.0)


def test_sample_plus_state_z_mean():
    rng = np.random.default_rng(1)
    plus = np.array([1, 1], complex) / np.sqrt(2)
    vals = sample_group(plus, group_qubitwise([(1.0, "Z")]), 0, 10**5, rng)
    assert abs(vals.mean()) <= 3 / np.sqrt(1e5)


def test_sample_y_basis():
    # eigenstate of Y with eigenvalue +1
    rng = np.random.default_rng(0)
    psi = np.array([1, 1j]) / np.sqrt(2)
    assert np.all(sample_group(psi, group_qubitwise([(1.0, "Y")]), 0, 50, rng) == 1.0)


def test_sample_projector_bits():
    rng = np.random.default_rng(0)
    uniform = np.full(8, 1 / np.sqrt(8), complex)
    vals = sample_group(uniform, build_projector_cost(3), 0, 20000, rng)
    assert set(np.unique(vals)) <= {0.0, 1.0}
    assert vals.mean() == pytest.approx(0.875, abs=4 * np.sqrt(0.875 * 0.125 / 20000))


def test_sample_group_errors():
    obs = group_qubitwise([(1.0, "Z")])
    rng = np.random.default_rng(0)
    with pytest.raises(CircuitError):
        sample_group(zero_state(1), obs, 1, 10, rng)
    with pytest.raises(CircuitError):
        sample_group(zero_state(1), obs, 0, 0, rng)


def test_sample_mean_converges_across_seeds():
    # |mean - exact| within 4 standard errors in at least 99% of seeded trials
    rng0 = np.random.default_rng(11)
    terms = random_terms(rng0, 3, 6)
    obs = from_terms(terms)
    circ = hardware_efficient_ansatz(3, 2)
    psi = run(circ, rng0.uniform(0, 2 * np.pi, circ.d))
    from wecans.statevector import exact_group_expectation, group_probabilities, group_values

    j = 0
    exact = exact_group_expectation(psi, obs, j)
    sd = math.sqrt(group_probabilities(psi, obs, j) @ group_values(obs, j) ** 2 - exact**2)
    hits = 0
    for seed in range(100):
        vals = sample_group(psi, obs, j, 10**5, np.random.default_rng(seed))
        hits += abs(vals.mean() - exact) <= 4 * sd / math.sqrt(1e5)
    assert hits >= 99


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_norm_preserved_over_100_gates(seed):
    rng = np.random.default_rng(seed)
    circ = random_circuit(rng, 4, 100)
    theta = rng.uniform(-10, 10, circ.d)
    psi = zero_state(4)
    for gate in circ.gates:
        psi = apply_gate(psi, gate, theta, 4)
        assert abs(np.linalg.norm(psi) - 1) <= 1e-10


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_run_is_pure(seed):
    rng = np.random.default_rng(seed)
    circ = random_circuit(rng, 3, 30)
    theta = rng.uniform(0, 6, circ.d)
    a, b = run(circ, theta), run(circ, theta)
    assert a.tobytes() == b.tobytes()
