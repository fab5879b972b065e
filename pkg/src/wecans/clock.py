"""Simulated wall-clock and monetary accounting for shot, switch and round overheads."""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

log = logging.getLogger(__name__)

# used as R when the per-shot cost is zero and only overheads are charged
C1_ZERO_SENTINEL_RATIO = 1e12


@dataclass(frozen=True)
class LatencyModel:
    """Linear overhead model ``c1 * shots + c2 * switches + c3 * rounds``.

    The same structure prices a cloud service: ``c1`` per shot, ``c2`` per task
    and ``c3 = 0``.
    """

    c1: float
    c2: float
    c3: float
    unit: str = "s"

    def __post_init__(self):
        for name in ("c1", "c2", "c3"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be nonnegative")

    def cost(self, shots: float, switches: float, rounds: float = 1) -> float:
        # single rounding of the three products
        return math.fsum((self.c1 * shots, self.c2 * switches, self.c3 * rounds))

    def to_dict(self) -> dict:
        return asdict(self)


SUPERCONDUCTING = LatencyModel(1e-5, 0.1, 4.0, "s")
BRAKET_RIGETTI = LatencyModel(3.5e-4, 0.3, 0.0, "USD")
ZERO = LatencyModel(0.0, 0.0, 0.0, "s")


def parse_latency(doc: dict) -> LatencyModel:
    try:
        return LatencyModel(
            float(doc["c1"]), float(doc["c2"]), float(doc["c3"]), str(doc.get("unit", "s"))
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"invalid latency profile: {exc}") from exc


def bundled_profiles() -> list[str]:
    root = resources.files("wecans") / "profiles"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_latency(source: str | os.PathLike) -> LatencyModel:
    """Load a ``{c1, c2, c3, unit}`` profile from a path or a bundled profile name."""
    path = Path(source)
    if path.is_file():
        with open(path, encoding="utf-8") as fh:
            return parse_latency(json.load(fh))
    name = path.name[:-5] if path.name.endswith(".json") else path.name
    if name in bundled_profiles():
        text = (resources.files("wecans") / "profiles" / f"{name}.json").read_text("utf-8")
        return parse_latency(json.loads(text))
    raise FileNotFoundError(f"no latency profile at {source!s} and no bundled profile {name!r}")


@dataclass
class CostClock:
    """Running totals. ``sim_time`` follows ``latency``; ``econ_cost`` follows ``pricing``."""

    latency: LatencyModel
    pricing: LatencyModel = BRAKET_RIGETTI
    sim_time: float = 0.0
    econ_cost: float = 0.0
    total_shots: int = 0
    total_switches: int = 0
    total_rounds: int = 0


@dataclass(frozen=True)
class Charge:
    dt: float
    dcost: float


def charge_iteration(clock: CostClock, shots: int, switches: int, rounds: int = 1) -> Charge:
    """Add one iteration's shots, circuit switches and communication rounds."""
    if shots < 0 or switches < 0 or rounds < 0:
        raise ValueError("counts must be nonnegative")
    dt = clock.latency.cost(shots, switches, rounds)
    dcost = clock.pricing.cost(shots, switches, rounds)
    clock.sim_time += dt
    clock.econ_cost += dcost
    clock.total_shots += int(shots)
    clock.total_switches += int(switches)
    clock.total_rounds += int(rounds)
    return Charge(dt, dcost)


@dataclass(frozen=True)
class OverheadRatio:
    R: float
    R_i: np.ndarray = field(repr=False)
    sentinel: bool = False


def overhead_ratios(latency: LatencyModel, m: Sequence[float], d: int | None = None) -> OverheadRatio:
    """Overhead-to-shot-cost ratios, per iteration (``R``) and per component (``R_i``).

    ``R_i = (c2 m_i + c3 / d) / c1`` and ``R = (c2 sum m_i + c3) / c1``.
    """
    m = np.asarray(m, dtype=float)
    d = len(m) if d is None else d
    if latency.c1 == 0:
        if latency.c2 == 0 and latency.c3 == 0:
            return OverheadRatio(0.0, np.zeros(len(m)))
        log.warning("c1 is zero; using sentinel overhead ratio %g", C1_ZERO_SENTINEL_RATIO)
        return OverheadRatio(
            C1_ZERO_SENTINEL_RATIO, np.full(len(m), C1_ZERO_SENTINEL_RATIO), sentinel=True
        )
    R_i = (latency.c2 * m + latency.c3 / d) / latency.c1
    R = (latency.c2 * m.sum() + latency.c3) / latency.c1
    return OverheadRatio(float(R), R_i)
