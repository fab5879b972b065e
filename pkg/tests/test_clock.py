import json
import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wecans.clock import (
    BRAKET_RIGETTI,
    SUPERCONDUCTING,
    ZERO,
    CostClock,
    LatencyModel,
    bundled_profiles,
    charge_iteration,
    load_latency,
    overhead_ratios,
)


def test_superconducting_iteration():
    clock = CostClock(SUPERCONDUCTING)
    charge = charge_iteration(clock, shots=1000, switches=8, rounds=1)
    assert charge.dt == 4.81
    assert clock.sim_time == 4.81
    assert (clock.total_shots, clock.total_switches, clock.total_rounds) == (1000, 8, 1)


def test_rigetti_pricing():
    clock = CostClock(SUPERCONDUCTING, pricing=BRAKET_RIGETTI)
    charge = charge_iteration(clock, shots=1000, switches=8)
    assert charge.dcost == 2.75
    assert clock.econ_cost == 2.75


def test_zero_latency_counts_shots_only():
    clock = CostClock(ZERO, pricing=ZERO)
    charge_iteration(clock, 500, 10)
    assert clock.sim_time == 0.0 and clock.econ_cost == 0.0
    assert clock.total_shots == 500


def test_negative_counts_rejected():
    with pytest.raises(ValueError):
        charge_iteration(CostClock(SUPERCONDUCTING), -1, 0)


def test_negative_latency_rejected():
    with pytest.raises(ValueError):
        LatencyModel(-1.0, 0.0, 0.0)


def test_overhead_ratio_per_component():
    r = overhead_ratios(SUPERCONDUCTING, [2] * 30, d=30)
    assert r.R_i[0] == pytest.approx((0.2 + 4.0 / 30) / 1e-5, rel=1e-12)
    assert r.R == pytest.approx(1e6, rel=1e-12)
    assert not r.sentinel


def test_overhead_ratio_zero_overhead():
    r = overhead_ratios(LatencyModel(1e-5, 0.0, 0.0), [2, 4])
    assert r.R == 0.0
    assert np.all(r.R_i == 0.0)


def test_overhead_ratio_sentinel(caplog):
    with caplog.at_level(logging.WARNING):
        r = overhead_ratios(LatencyModel(0.0, 0.3, 0.0), [2, 2])
    assert r.sentinel
    assert r.R > 1e9
    assert "sentinel" in caplog.text


def test_bundled_profiles():
    assert {"superconducting", "braket-rigetti", "shots-only"} <= set(bundled_profiles())
    assert load_latency("superconducting") == SUPERCONDUCTING
    assert load_latency("profiles/braket-rigetti.json") == BRAKET_RIGETTI


def test_profile_from_path(tmp_path):
    path = tmp_path / "lat.json"
    path.write_text(json.dumps({"c1": 1e-4, "c2": 0.5, "c3": 1.0, "unit": "s"}))
    assert load_latency(path) == LatencyModel(1e-4, 0.5, 1.0, "s")
    with pytest.raises(FileNotFoundError):
        load_latency(tmp_path / "missing.json")
    path.write_text(json.dumps({"c1": 1e-4}))
    with pytest.raises(ValueError):
        load_latency(path)


counts = st.tuples(st.integers(0, 10**6), st.integers(0, 200), st.integers(0, 3))
rates = st.tuples(*[st.floats(0, 10, allow_nan=False)] * 3)


@settings(max_examples=60, deadline=None)
@given(counts, rates, st.integers(1, 50))
def test_linearity(c, lat, k):
    model = LatencyModel(*lat)
    clock = CostClock(model, pricing=model)
    single = model.cost(*c)
    for _ in range(k):
        charge_iteration(clock, *c)
    assert clock.sim_time == pytest.approx(k * single, rel=1e-12, abs=1e-300)
    assert clock.total_shots == k * c[0]


@settings(max_examples=60, deadline=None)
@given(st.lists(counts, min_size=1, max_size=20), rates)
def test_relabeling_and_monotone(history, lat):
    # with c3 = 0, prices and times share one accumulator
    model = LatencyModel(lat[0], lat[1], 0.0)
    clock = CostClock(model, pricing=model)
    last = (0.0, 0.0, 0)
    for c in history:
        charge_iteration(clock, *c)
        now = (clock.sim_time, clock.econ_cost, clock.total_shots)
        assert all(a <= b for a, b in zip(last, now))
        last = now
    assert clock.sim_time == clock.econ_cost
    assert clock.sim_time == pytest.approx(
        model.c1 * clock.total_shots + model.c2 * clock.total_switches, rel=1e-9, abs=1e-300
    )
