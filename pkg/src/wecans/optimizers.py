"""Optimization loops driven by simulated time, cost or shot budgets."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from . import allocators as alloc
from .clock import BRAKET_RIGETTI, CostClock, LatencyModel, charge_iteration, overhead_ratios
from .gradient import SamplingMode, default_mode, expected_switches, i_evaluate, normalize_plan
from .pauli import Observable, one_norm_bound
from .statevector import ParametricCircuit, exact_expectation, run


class OptimizerKind(str, Enum):
    SGD = "sgd"
    ADAM = "adam"
    ICANS = "icans"
    GCANS = "gcans"
    WECANS_I = "wecans-i"
    WECANS_G = "wecans-g"
    ADAMCANS = "adamcans"
    WE_ADAMCANS = "we-adamcans"


CANS_KINDS = (OptimizerKind.ICANS, OptimizerKind.GCANS, OptimizerKind.WECANS_I, OptimizerKind.WECANS_G)
ADAM_KINDS = (OptimizerKind.ADAM, OptimizerKind.ADAMCANS, OptimizerKind.WE_ADAMCANS)


class ConfigError(ValueError):
    pass


@dataclass
class Budget:
    """Stop limits; the run ends as soon as any set limit is reached."""

    max_time: float | None = None
    max_cost: float | None = None
    max_shots: int | None = None
    max_iterations: int | None = None

    def validate(self) -> None:
        limits = [self.max_time, self.max_cost, self.max_shots, self.max_iterations]
        if all(v is None for v in limits):
            raise ConfigError("at least one budget limit is required")
        for v in limits:
            if v is not None and not v >= 0:
                raise ConfigError("budget limits must be nonnegative")

    def exhausted(self, clock: CostClock, iterations: int) -> bool:
        return (
            (self.max_time is not None and clock.sim_time >= self.max_time)
            or (self.max_cost is not None and clock.econ_cost >= self.max_cost)
            or (self.max_shots is not None and clock.total_shots >= self.max_shots)
            or (self.max_iterations is not None and iterations >= self.max_iterations)
        )


@dataclass
class OptimizerConfig:
    """Hyperparameters for every optimizer kind.

    ``alpha`` and ``L`` default to ``1/L`` and ``d * sum|c_i|``. Fixed-shot
    optimizers spend ``shots_per_eval`` shots at each shifted point, i.e.
    ``2 * shots_per_eval`` per gradient component.
    """

    kind: OptimizerKind
    budget: Budget
    alpha: float | None = None
    L: float | None = None
    beta1: float = 0.9
    beta2: float = 0.99
    epsilon: float = 1e-8
    mu: float = 0.99
    s_min: int = 100
    r: float = 0.75
    clipping: bool = False
    shots_per_eval: int = 100
    seed: int = 0
    exact: bool = False
    mode: SamplingMode | None = None
    record_theta: bool = False

    def __post_init__(self):
        self.kind = OptimizerKind(self.kind)
        if self.mode is not None:
            self.mode = SamplingMode(self.mode)

    def validate(self) -> None:
        self.budget.validate()
        if self.alpha is not None and not self.alpha >= 0:
            raise ConfigError("alpha must be nonnegative")
        if self.L is not None and not self.L > 0:
            raise ConfigError("L must be positive")
        for name in ("beta1", "beta2", "mu"):
            if not 0 < getattr(self, name) < 1:
                raise ConfigError(f"{name} must lie in (0, 1)")
        if not 0 < self.r < 1:
            raise ConfigError("r must lie in (0, 1)")
        if self.s_min < 2:
            raise ConfigError("s_min must be at least 2")
        if self.shots_per_eval < 1:
            raise ConfigError("shots_per_eval must be positive")

    def resolved(self, circuit: ParametricCircuit, obs: Observable) -> "OptimizerConfig":
        L = self.L if self.L is not None else circuit.d * one_norm_bound(obs)
        alpha = self.alpha if self.alpha is not None else 1.0 / L
        out = OptimizerConfig(**{**self.__dict__, "L": L, "alpha": alpha})
        out.mode = self.mode if self.mode is not None else default_mode(obs)
        return out

    def to_dict(self) -> dict:
        out = asdict(self)
        out["kind"] = self.kind.value
        out["mode"] = self.mode.value if self.mode is not None else None
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "OptimizerConfig":
        doc = dict(doc)
        doc["budget"] = Budget(**doc["budget"])
        return cls(**doc)


@dataclass
class TraceRecord:
    k: int
    exact_cost: float
    sim_time: float
    econ_cost: float
    total_shots: int
    shot_plan: list[int]
    grad_norm_est: float
    theta: list[float] | None = None
    fallback: bool = False


@dataclass
class RunTrace:
    header: dict
    records: list[TraceRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


class _Run:
    """Shared bookkeeping: evaluation, clock charging and trace recording."""

    def __init__(self, circuit, obs, config, latency, pricing, rng, theta0):
        config.validate()
        self.cfg = config.resolved(circuit, obs)
        if self.cfg.kind in CANS_KINDS and not 0 < self.cfg.alpha * self.cfg.L < 2:
            raise ConfigError("CANS rules need 0 < alpha < 2/L")
        self.circuit, self.obs, self.rng = circuit, obs, rng
        self.latency = latency
        self.clock = CostClock(latency, pricing)
        if theta0 is None:
            theta0 = rng.uniform(0.0, 2 * math.pi, circuit.d)
        self.theta = np.array(theta0, dtype=float)
        if self.theta.shape != (circuit.d,):
            raise ConfigError(f"theta0 must have {circuit.d} entries")
        self.trace = RunTrace(
            header={
                "config": self.cfg.to_dict(),
                "latency": latency.to_dict(),
                "pricing": pricing.to_dict(),
                "d": circuit.d,
                "n_qubits": circuit.n,
                "theta0": [float(t) for t in self.theta],
            }
        )
        self.k = 0
        self.single_circuit_counts = self.cfg.mode is SamplingMode.DETERMINISTIC or obs.n_groups == 1

    def done(self) -> bool:
        return self.cfg.budget.exhausted(self.clock, self.k)

    def evaluate(self, plan: np.ndarray):
        sample = i_evaluate(
            self.circuit, self.obs, self.theta, plan, self.cfg.mode, self.rng, exact=self.cfg.exact
        )
        charge_iteration(self.clock, int(sample.shots_used.sum()), int(sample.m.sum()), sample.comm_rounds)
        return sample

    def switches_estimate(self, s_tilde: np.ndarray) -> np.ndarray:
        """Predicted circuits per component for the next iteration."""
        if self.single_circuit_counts:
            active = sum(1 for p in self.obs.group_probs if p > 0)
            return np.full(self.circuit.d, 2.0 * active)
        return np.array([expected_switches(self.obs, max(s, 2.0)) for s in s_tilde])

    def record(self, plan, g, fallback=False) -> None:
        cost = exact_expectation(run(self.circuit, self.theta), self.obs)
        self.trace.records.append(
            TraceRecord(
                k=self.k,
                exact_cost=cost,
                sim_time=self.clock.sim_time,
                econ_cost=self.clock.econ_cost,
                total_shots=self.clock.total_shots,
                shot_plan=[int(x) for x in plan],
                grad_norm_est=float(np.linalg.norm(g)),
                theta=[float(t) for t in self.theta] if self.cfg.record_theta else None,
                fallback=fallback,
            )
        )
        self.k += 1


def _fixed_plan(runner: _Run) -> np.ndarray:
    return normalize_plan(
        np.full(runner.circuit.d, 2 * runner.cfg.shots_per_eval), runner.obs, runner.cfg.mode
    )


def run_sgd(
    circuit: ParametricCircuit,
    obs: Observable,
    config: OptimizerConfig,
    latency: LatencyModel,
    rng: np.random.Generator,
    theta0: Sequence[float] | None = None,
    pricing: LatencyModel = BRAKET_RIGETTI,
) -> RunTrace:
    """Plain SGD ``theta <- theta - alpha g`` with a fixed shot plan."""
    runner = _Run(circuit, obs, config, latency, pricing, rng, theta0)
    plan = _fixed_plan(runner)
    while not runner.done():
        sample = runner.evaluate(plan)
        runner.theta = runner.theta - runner.cfg.alpha * sample.g
        runner.record(sample.shots_used, sample.g)
    return runner.trace


def run_cans(
    circuit: ParametricCircuit,
    obs: Observable,
    config: OptimizerConfig,
    latency: LatencyModel,
    rng: np.random.Generator,
    theta0: Sequence[float] | None = None,
    pricing: LatencyModel = BRAKET_RIGETTI,
) -> RunTrace:
    """SGD with an adaptive per-component shot plan from the CANS family."""
    runner = _Run(circuit, obs, config, latency, pricing, rng, theta0)
    cfg = runner.cfg
    if cfg.kind not in CANS_KINDS:
        raise ConfigError(f"{cfg.kind.value} is not a CANS rule")
    d = circuit.d
    plan = normalize_plan(np.full(d, alloc.CANS_MIN_SHOTS), obs, cfg.mode)
    tracker = alloc.EmaTracker(d, cfg.mu)
    shots_ema = alloc.ScalarEma(plan, cfg.mu)
    while not runner.done():
        sample = runner.evaluate(plan)
        runner.theta = runner.theta - cfg.alpha * sample.g
        tracker.update(sample.g, sample.S)
        shots_ema.update(sample.shots_used)
        chi, xi = tracker.chi, tracker.xi
        if cfg.kind is OptimizerKind.ICANS:
            nxt = alloc.icans_shots(chi, xi, cfg.L, cfg.alpha)
        elif cfg.kind is OptimizerKind.GCANS:
            nxt = alloc.gcans_shots(chi, xi, cfg.L, cfg.alpha)
        else:
            ratios = overhead_ratios(latency, runner.switches_estimate(shots_ema.value), d)
            if cfg.kind is OptimizerKind.WECANS_I:
                nxt = alloc.wecans_i_shots(chi, xi, cfg.L, cfg.alpha, ratios.R_i)
            else:
                nxt = alloc.wecans_g_shots(chi, xi, cfg.L, cfg.alpha, ratios.R)
        runner.record(sample.shots_used, sample.g)
        plan = normalize_plan(nxt, obs, cfg.mode)
    return runner.trace


def run_adam(
    circuit: ParametricCircuit,
    obs: Observable,
    config: OptimizerConfig,
    latency: LatencyModel,
    rng: np.random.Generator,
    theta0: Sequence[float] | None = None,
    pricing: LatencyModel = BRAKET_RIGETTI,
) -> RunTrace:
    """Adam with a fixed shot plan (``adam``) or adaptive shots (``adamcans``, ``we-adamcans``).

    The adaptive variants follow the latency-aware Adam loop: after each
    update the moving averages predict the next Adam direction, the step size
    used for shot sizing is clipped so the gain bound stays positive, and the
    shot plan maximizes the expected gain per unit time (``R = 0`` for
    ``adamcans``). Unless ``clipping`` is set, parameter updates keep the
    unclipped step size.
    """
    runner = _Run(circuit, obs, config, latency, pricing, rng, theta0)
    cfg = runner.cfg
    if cfg.kind not in ADAM_KINDS:
        raise ConfigError(f"{cfg.kind.value} is not an Adam variant")
    adaptive = cfg.kind is not OptimizerKind.ADAM
    d = circuit.d
    if adaptive:
        plan = normalize_plan(np.full(d, cfg.s_min), obs, cfg.mode)
    else:
        plan = _fixed_plan(runner)
    m_raw = np.zeros(d)
    v_raw = np.zeros(d)
    tracker = alloc.EmaTracker(d, cfg.mu)
    shots_ema = alloc.ScalarEma(plan, cfg.mu)
    alpha0 = cfg.alpha
    alpha = alpha0
    b1, b2, eps = cfg.beta1, cfg.beta2, cfg.epsilon
    while not runner.done():
        t = runner.k + 1
        sample = runner.evaluate(plan)
        g = sample.g
        m_raw = b1 * m_raw + (1 - b1) * g
        v_raw = b2 * v_raw + (1 - b2) * g * g
        m_hat = m_raw / (1 - b1**t)
        v_hat = v_raw / (1 - b2**t)
        runner.theta = runner.theta - alpha * m_hat / (np.sqrt(v_hat) + eps)
        fallback = False
        if adaptive:
            tracker.update(g, sample.S)
            shots_ema.update(sample.shots_used)
            chi, xi = tracker.chi, tracker.xi
            # the gain expansion neglects eps, as the shot rule is derived without it
            X = alloc.adam_direction(chi, m_raw, v_raw, b1, b2, 0.0, t + 1)
            alpha_shots, _ = alloc.clip_alpha(chi, X, cfg.L, alpha0, cfg.r)
            A, B = alloc.adam_gain_terms(chi, xi, m_raw, v_raw, alpha_shots, cfg.L, 0.0, b1, b2, t + 1)
            if cfg.kind is OptimizerKind.ADAMCANS:
                R = 0.0
            else:
                R = overhead_ratios(latency, runner.switches_estimate(shots_ema.value), d).R
            try:
                nxt = alloc.we_adam_shots(A, B, R, cfg.s_min)
            except alloc.AllocationError:
                nxt = np.full(d, cfg.s_min)
                fallback = True
            alpha = alpha_shots if cfg.clipping else alpha0
        runner.record(sample.shots_used, g, fallback)
        if adaptive:
            plan = normalize_plan(nxt, obs, cfg.mode)
    return runner.trace


def run_optimizer(
    circuit: ParametricCircuit,
    obs: Observable,
    config: OptimizerConfig,
    latency: LatencyModel,
    rng: np.random.Generator,
    theta0: Sequence[float] | None = None,
    pricing: LatencyModel = BRAKET_RIGETTI,
) -> RunTrace:
    kind = OptimizerKind(config.kind)
    if kind is OptimizerKind.SGD:
        fn = run_sgd
    elif kind in CANS_KINDS:
        fn = run_cans
    else:
        fn = run_adam
    return fn(circuit, obs, config, latency, rng, theta0=theta0, pricing=pricing)
