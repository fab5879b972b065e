"""Latency-aware shot allocation for variational quantum algorithms.

Exact state-vector simulation, parameter-shift gradients with weighted random
sampling, CANS-family and Adam-based shot allocators, and a cost clock that
charges per-shot, circuit-switching and communication latencies.
"""

from .allocators import (
    EmaTracker,
    adam_gain_terms,
    clip_alpha,
    gcans_shots,
    icans_shots,
    we_adam_shots,
    wecans_g_shots,
    wecans_i_shots,
)
from .clock import BRAKET_RIGETTI, SUPERCONDUCTING, CostClock, LatencyModel, charge_iteration, load_latency, overhead_ratios
from .gradient import GradientSample, SamplingMode, exact_gradient, i_evaluate
from .optimizers import Budget, OptimizerConfig, OptimizerKind, RunTrace, TraceRecord, run_optimizer
from .pauli import Observable, build_projector_cost, build_tfim, group_qubitwise, load_observable
from .statevector import Gate, ParametricCircuit, exact_expectation, run
from .tasks import Task, TaskSpec, build_task
from .traces import median_curve, trace_emit, trace_parse

__version__ = "0.1.0"
