"""Shot-based parameter-shift gradient estimation with measurement-group sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .pauli import Observable
from .statevector import (
    ParametricCircuit,
    exact_expectation,
    group_probabilities,
    group_values,
    prefix_states,
    run_shifted,
)

SHIFT = math.pi / 2
NEGLIGIBLE_MISS_PROB = 0.01


class EstimatorError(ValueError):
    pass


class SamplingMode(str, Enum):
    WRS = "wrs"
    DETERMINISTIC = "deterministic"


@dataclass
class GradientSample:
    """Result of one gradient evaluation.

    ``S[i]`` is a single-shot variance estimate such that ``Var(g[i]) ~ S[i] / shots_used[i]``.
    ``m[i]`` counts the distinct (shifted circuit, group) pairs executed for component ``i``.
    """

    g: np.ndarray
    S: np.ndarray
    shots_used: np.ndarray
    m: np.ndarray
    comm_rounds: int = 1


def default_mode(obs: Observable) -> SamplingMode:
    return SamplingMode.DETERMINISTIC if obs.shot_ratio is not None else SamplingMode.WRS


def _active_groups(obs: Observable) -> int:
    return sum(1 for p in obs.group_probs if p > 0)


def normalize_plan(plan: Sequence[int], obs: Observable, mode: SamplingMode) -> np.ndarray:
    """Validate a shot plan and round each entry up to something both shifts can share.

    Entries are made even; in deterministic mode each shift also needs one shot
    per group, so entries are raised to at least ``2 * M``.
    """
    s = np.asarray(plan)
    if s.ndim != 1 or not np.all(np.equal(np.mod(s, 1), 0)):
        raise EstimatorError("shot plan must be a 1-d integer vector")
    s = s.astype(np.int64)
    if np.any(s < 2):
        raise EstimatorError("every component needs at least 2 shots")
    s = s + (s % 2)
    if mode is SamplingMode.DETERMINISTIC:
        s = np.maximum(s, 2 * _active_groups(obs))
    return s


def split_deterministic(shots: int, weights: Sequence[float]) -> np.ndarray:
    """Split ``shots`` proportionally to ``weights``.

    Every group but the heaviest is rounded to nearest; the heaviest takes the
    remainder. Each group keeps at least one shot when ``shots`` allows it.
    """
    w = np.asarray(weights, dtype=float)
    big = int(np.argmax(w))
    counts = np.rint(shots * w / w.sum()).astype(np.int64)
    if shots >= len(w):
        counts = np.maximum(counts, 1)
    counts[big] = 0
    counts[big] = shots - counts.sum()
    return counts


def wrs_single_shot_value(p_j: float, v_j: float) -> float:
    """Inverse-probability weighted single-shot value of a randomly drawn group."""
    if p_j <= 0:
        raise EstimatorError("group probability must be positive")
    return v_j / p_j


def expected_switches(
    obs: Observable,
    s_tilde: float,
    shifts: int = 2,
    threshold: float = NEGLIGIBLE_MISS_PROB,
) -> float:
    """Expected number of executed circuits for one component under group sampling.

    Each shifted point receives ``s_tilde / shifts`` shots; miss probabilities
    ``(1 - p_j)^(s/shifts)`` below ``threshold`` are dropped.
    """
    if s_tilde < 2:
        raise EstimatorError("s_tilde must be at least 2")
    M = obs.n_groups
    missed = 0.0
    for p in obs.group_probs:
        q = (1.0 - p) ** (s_tilde / shifts)
        if q >= threshold:
            missed += q
    return shifts * (M - missed)


def _point_estimate(
    psi: np.ndarray,
    obs: Observable,
    shots: int,
    mode: SamplingMode,
    rng: np.random.Generator,
) -> tuple[float, float, int]:
    """Mean, single-shot variance and circuits executed at one shifted point."""
    if mode is SamplingMode.WRS:
        counts = rng.multinomial(shots, obs.group_probs)
        s1 = s2 = 0.0
        used = 0
        for j, c in enumerate(counts):
            if c == 0:
                continue
            used += 1
            vals = group_values(obs, j) / obs.group_probs[j]
            hist = rng.multinomial(c, group_probabilities(psi, obs, j))
            s1 += float(hist @ vals)
            s2 += float(hist @ (vals * vals))
        mean = s1 / shots
        if shots >= 2:
            var = max(s2 - shots * mean * mean, 0.0) / (shots - 1)
        else:
            var = mean * mean
        return mean + obs.constant, var, used

    counts = split_deterministic(shots, obs.shot_ratio or obs.group_probs)
    mean = obs.constant
    var_of_mean = 0.0
    used = 0
    for j, c in enumerate(counts):
        if c == 0:
            continue
        used += 1
        vals = group_values(obs, j)
        hist = rng.multinomial(c, group_probabilities(psi, obs, j))
        m_j = float(hist @ vals) / c
        if c >= 2:
            v_j = max(float(hist @ (vals * vals)) - c * m_j * m_j, 0.0) / (c - 1)
        else:
            v_j = m_j * m_j
        mean += m_j
        var_of_mean += v_j / c
    return mean, shots * var_of_mean, used


def estimate_expectation(
    psi: np.ndarray,
    obs: Observable,
    shots: int,
    rng: np.random.Generator,
    mode: SamplingMode | str | None = None,
) -> tuple[float, float, int]:
    """Shot-based estimate of ``<psi|H|psi>``.

    Returns the estimate, the single-shot variance (so the estimate's variance
    is about ``var / shots``) and the number of circuits executed.
    """
    if shots < 1:
        raise EstimatorError("shots must be positive")
    mode = default_mode(obs) if mode is None else SamplingMode(mode)
    return _point_estimate(psi, obs, int(shots), mode, rng)


def i_evaluate(
    circuit: ParametricCircuit,
    obs: Observable,
    theta: Sequence[float],
    plan: Sequence[int],
    mode: SamplingMode | str | None = None,
    rng: np.random.Generator | None = None,
    exact: bool = False,
) -> GradientSample:
    """Estimate the gradient with the two-point parameter-shift rule.

    Component ``i`` spends ``plan[i] / 2`` shots at each of ``theta +- pi/2 e_i``.
    With ``exact=True`` shot noise is switched off: exact expectations are used
    and the variances are zero, while shots and circuits are still accounted.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (circuit.d,):
        raise EstimatorError(f"expected {circuit.d} parameters, got shape {theta.shape}")
    if circuit.n != obs.n_qubits:
        raise EstimatorError("circuit and observable act on different qubit counts")
    mode = default_mode(obs) if mode is None else SamplingMode(mode)
    s = normalize_plan(plan, obs, mode)
    if s.shape != (circuit.d,):
        raise EstimatorError(f"shot plan has {s.shape[0]} entries for {circuit.d} parameters")
    if rng is None and not exact:
        raise EstimatorError("a random generator is required unless exact=True")

    d = circuit.d
    g = np.zeros(d)
    S = np.zeros(d)
    m = np.zeros(d, dtype=np.int64)
    prefixes = prefix_states(circuit, theta)
    for i in range(d):
        half = int(s[i] // 2)
        plus = run_shifted(circuit, theta, i, SHIFT, prefixes)
        minus = run_shifted(circuit, theta, i, -SHIFT, prefixes)
        if exact:
            g[i] = 0.5 * (exact_expectation(plus, obs) - exact_expectation(minus, obs))
            m[i] = 2 * _active_groups(obs)
            continue
        f_p, v_p, u_p = _point_estimate(plus, obs, half, mode, rng)
        f_m, v_m, u_m = _point_estimate(minus, obs, half, mode, rng)
        g[i] = 0.5 * (f_p - f_m)
        S[i] = 0.5 * (v_p + v_m)
        m[i] = u_p + u_m
    return GradientSample(g=g, S=S, shots_used=s, m=m)


def exact_gradient(circuit: ParametricCircuit, obs: Observable, theta: Sequence[float]) -> np.ndarray:
    return i_evaluate(circuit, obs, theta, np.full(circuit.d, 2), exact=True).g
