import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import wecans.optimizers as opt_mod
from wecans.ansatz import hardware_efficient_ansatz
from wecans.clock import SUPERCONDUCTING, LatencyModel
from wecans.gradient import exact_gradient
from wecans.optimizers import Budget, ConfigError, OptimizerConfig, OptimizerKind, run_optimizer
from wecans.pauli import build_projector_cost, group_qubitwise
from wecans.statevector import ParametricCircuit, exact_expectation, rotation, run
from wecans.tasks import TaskSpec, build_task

RX = ParametricCircuit(1, (rotation("X", 0, 0),))
Z1 = group_qubitwise([(1.0, "Z")])
SHOTS_ONLY = LatencyModel(1e-5, 0.0, 0.0)


def cfg(kind, **kw):
    budget = kw.pop("budget", Budget(max_iterations=20))
    return OptimizerConfig(kind=kind, budget=budget, **kw)


def go(kind, circuit=RX, obs=Z1, latency=SUPERCONDUCTING, seed=0, theta0=None, **kw):
    return run_optimizer(circuit, obs, cfg(kind, **kw), latency, np.random.default_rng(seed), theta0=theta0)


# ---- SGD -------------------------------------------------------------------

def test_sgd_exact_descent_is_monotone():
    trace = go("sgd", exact=True, alpha=0.1, theta0=[math.pi / 2 - 0.3], budget=Budget(max_iterations=50))
    costs = trace.column("exact_cost")
    assert len(trace) == 50
    assert np.all(np.diff(costs) < 0)


def test_sgd_zero_step_is_flat():
    trace = go("sgd", alpha=0.0, theta0=[1.0], record_theta=True)
    assert all(r.theta == [1.0] for r in trace.records)
    assert np.ptp(trace.column("exact_cost")) == 0.0


def test_sgd_shot_budget_iterations():
    trace = go("sgd", shots_per_eval=100, budget=Budget(max_shots=1000))
    assert len(trace) == 5
    assert trace.records[-1].total_shots == 1000


def test_zero_budget_gives_empty_trace():
    assert len(go("we-adamcans", budget=Budget(max_time=0.0))) == 0


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(budget=Budget()),
        dict(budget=Budget(max_time=-1.0)),
        dict(beta1=1.0),
        dict(mu=0.0),
        dict(r=1.0),
        dict(s_min=1),
        dict(alpha=-0.1),
        dict(L=0.0),
        dict(shots_per_eval=0),
    ],
)
def test_invalid_configs(kwargs):
    with pytest.raises(ConfigError):
        go("adam", **kwargs)


def test_cans_step_size_limit():
    with pytest.raises(ConfigError):
        go("icans", alpha=2.5, L=1.0)
    with pytest.raises(ConfigError):
        go("gcans", alpha=0.0)


def test_unknown_kind():
    with pytest.raises(ValueError):
        cfg("shoals")


def test_defaults_follow_lipschitz_bound():
    circ = hardware_efficient_ansatz(2, 1)
    obs = group_qubitwise([(0.5, "ZZ"), (-0.25, "XI"), (1.0, "II")])
    resolved = cfg("icans").resolved(circ, obs)
    assert resolved.L == pytest.approx(circ.d * 1.75)
    assert resolved.alpha == pytest.approx(1 / resolved.L)


def test_config_round_trip():
    c = cfg("we-adamcans", alpha=0.1, mode="wrs", budget=Budget(max_time=5.0, max_shots=10))
    assert OptimizerConfig.from_dict(c.to_dict()) == c


# ---- Adam ------------------------------------------------------------------

def test_adam_first_step_identity():
    theta0 = np.array([0.4])
    trace = go("adam", exact=True, alpha=0.05, theta0=theta0, record_theta=True, budget=Budget(max_iterations=1))
    g = exact_gradient(RX, Z1, theta0)[0]
    step = trace.records[0].theta[0] - theta0[0]
    assert step == pytest.approx(-0.05 * g / (abs(g) + 1e-8), rel=1e-12)
    assert abs(step) == pytest.approx(0.05, rel=1e-6)


def reference_adam(circ, obs, theta0, alpha, iters, b1=0.9, b2=0.99, eps=1e-8):
    theta = np.array(theta0, float)
    m = v = np.zeros_like(theta)
    out = []
    for t in range(1, iters + 1):
        g = exact_gradient(circ, obs, theta)
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        theta = theta - alpha * (m / (1 - b1**t)) / (np.sqrt(v / (1 - b2**t)) + eps)
        out.append(theta.copy())
    return out


@pytest.mark.parametrize("kind", ["adam", "adamcans", "we-adamcans"])
def test_update_uses_unclipped_step(kind):
    # exact gradients decouple the trajectory from the shot plan, so every
    # Adam variant without clipping must follow plain Adam with the original step
    circ = hardware_efficient_ansatz(2, 2)
    obs = build_projector_cost(2)
    theta0 = np.random.default_rng(4).uniform(0, 2 * np.pi, circ.d)
    trace = go(kind, circuit=circ, obs=obs, exact=True, theta0=theta0, record_theta=True,
               alpha=0.2, budget=Budget(max_iterations=15))
    for rec, ref in zip(trace.records, reference_adam(circ, obs, theta0, 0.2, 15)):
        assert np.allclose(rec.theta, ref, atol=1e-12)


def test_clipping_changes_the_update():
    circ = hardware_efficient_ansatz(2, 2)
    obs = build_projector_cost(2)
    theta0 = np.random.default_rng(4).uniform(0, 2 * np.pi, circ.d)
    common = dict(circuit=circ, obs=obs, theta0=theta0, record_theta=True, alpha=0.2,
                  budget=Budget(max_iterations=15))
    plain = go("we-adamcans", clipping=False, **common)
    clipped = go("we-adamcans", clipping=True, **common)
    assert plain.records[0].theta == clipped.records[0].theta
    assert any(a.theta != b.theta for a, b in zip(plain.records, clipped.records))


def test_we_adamcans_at_zero_overhead_equals_adamcans():
    circ = hardware_efficient_ansatz(2, 2)
    obs = build_projector_cost(2)
    a = go("adamcans", circuit=circ, obs=obs, latency=SHOTS_ONLY, seed=3, budget=Budget(max_iterations=40))
    b = go("we-adamcans", circuit=circ, obs=obs, latency=SHOTS_ONLY, seed=3, budget=Budget(max_iterations=40))
    assert a.records == b.records


def test_first_adaptive_plans():
    assert go("we-adamcans").records[0].shot_plan == [100]
    assert go("icans").records[0].shot_plan == [2]


def test_fallback_when_gain_bound_not_positive(monkeypatch):
    monkeypatch.setattr(opt_mod.alloc, "clip_alpha", lambda chi, X, L, alpha, r: (0.0, True))
    trace = go("we-adamcans", s_min=50, budget=Budget(max_iterations=4))
    assert all(r.fallback for r in trace.records)
    assert all(r.shot_plan == [50] for r in trace.records)


# ---- CANS family -------------------------------------------------------------

def test_icans_shots_grow_near_optimum():
    # signal shrinks near the minimum of cos(theta), so the rule asks for more shots
    early, late = [], []
    for seed in range(5):
        trace = go("icans", seed=seed, theta0=[1.0], budget=Budget(max_iterations=150))
        plans = [r.shot_plan[0] for r in trace.records]
        early.append(np.median(plans[5:30]))
        late.append(np.median(plans[-30:]))
    assert np.median(late) >= np.median(early)


def test_wecans_g_without_overhead_matches_gcans():
    circ = hardware_efficient_ansatz(2, 1)
    obs = build_projector_cost(2)
    a = go("gcans", circuit=circ, obs=obs, latency=SHOTS_ONLY, seed=1, budget=Budget(max_iterations=30))
    b = go("wecans-g", circuit=circ, obs=obs, latency=SHOTS_ONLY, seed=1, budget=Budget(max_iterations=30))
    assert a.records == b.records


def test_wecans_i_without_overhead_matches_icans():
    circ = hardware_efficient_ansatz(2, 1)
    obs = build_projector_cost(2)
    a = go("icans", circuit=circ, obs=obs, latency=SHOTS_ONLY, seed=1, budget=Budget(max_iterations=30))
    b = go("wecans-i", circuit=circ, obs=obs, latency=SHOTS_ONLY, seed=1, budget=Budget(max_iterations=30))
    assert a.records == b.records


def test_wecans_g_huge_overhead_buys_more_shots():
    circ = hardware_efficient_ansatz(2, 1)
    obs = build_projector_cost(2)
    heavy = LatencyModel(1e-5, 0.0, 10.0)  # R = 1e6
    common = dict(circuit=circ, obs=obs, seed=2, budget=Budget(max_iterations=6))
    g = go("gcans", latency=SHOTS_ONLY, **common)
    w = go("wecans-g", latency=heavy, **common)
    for a, b in zip(g.records[1:], w.records[1:]):
        assert sum(b.shot_plan) >= 10 * sum(a.shot_plan)


# ---- shared invariants -------------------------------------------------------

KINDS = [k.value for k in OptimizerKind]


@pytest.mark.parametrize("kind", KINDS)
def test_determinism_and_exact_cost_oracle(kind):
    circ = hardware_efficient_ansatz(2, 1)
    obs = group_qubitwise([(0.7, "ZZ"), (0.4, "XI"), (0.2, "IX")])
    kw = dict(circuit=circ, obs=obs, seed=9, record_theta=True, budget=Budget(max_time=60.0))
    a, b = go(kind, **kw), go(kind, **kw)
    assert a == b
    for rec in a.records:
        assert rec.exact_cost == exact_expectation(run(circ, rec.theta), obs)


@settings(max_examples=12, deadline=None)
@given(
    st.sampled_from(KINDS),
    st.sampled_from(["max_time", "max_cost", "max_shots"]),
    st.floats(1.0, 80.0),
    st.integers(0, 1000),
)
def test_budget_honesty_and_monotone_accounting(kind, dim, limit, seed):
    circ = hardware_efficient_ansatz(2, 1)
    obs = build_projector_cost(2)
    if dim == "max_shots":
        limit = int(limit * 1000)
    trace = go(kind, circuit=circ, obs=obs, seed=seed, budget=Budget(**{dim: limit}))
    column = {"max_time": "sim_time", "max_cost": "econ_cost", "max_shots": "total_shots"}[dim]
    values = trace.column(column)
    assert len(values) >= 1
    for name in ("sim_time", "econ_cost", "total_shots"):
        assert np.all(np.diff(trace.column(name)) >= 0)
    last_step = values[-1] - (values[-2] if len(values) > 1 else 0)
    assert values[-1] >= limit
    assert values[-1] - last_step < limit


def test_tfim_uses_deterministic_split():
    task = build_task(TaskSpec("tfim", n=3, depth=1))
    trace = run_optimizer(task.circuit, task.obs, cfg("icans", budget=Budget(max_iterations=3)),
                          SUPERCONDUCTING, np.random.default_rng(0))
    assert trace.header["config"]["mode"] == "deterministic"
    # two groups per shifted point: 4 circuits per component, 4 shots minimum
    assert all(min(r.shot_plan) >= 4 for r in trace.records)
