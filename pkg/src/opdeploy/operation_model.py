"""Operation models: registration, reduced, simplified and deployed.

The registration model is the raw record of every input and output product
flow of one operation.  Scaling each flow by its cost rate and summing per
direction gives the reduced model ``(re, pe)``.  Collapsing those to their
totals gives the simplified model, an input impulse ``RE`` at ``t_s`` and an
output impulse ``PE`` at ``t_f``.  Integrating ``re`` negatively and ``pe``
positively gives the deployed model, whose sum ``ice`` splits into a closed
flow ``ibe`` that vanishes after ``t_f`` and an open flow ``ide`` holding the
settled surplus.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np

from .errors import ConfigurationError, GridMismatchError, ModelError
from .signal_core import (
    TIME_TOL,
    CumulativeSignal,
    Signal,
    TimeGrid,
    integrate_cumulative,
    make_impulse,
    scale,
    sum_signals,
)

# Density magnitude below which an output channel counts as idle.
ZERO_TOL = 1e-12
# Allowed drift of the deployed flow after completion.
SETTLE_TOL = 1e-9


class Direction(str, Enum):
    INPUT = "in"
    OUTPUT = "out"


@dataclass(frozen=True)
class ChannelRole:
    direction: Direction
    product_id: str

    @property
    def label(self) -> str:
        return f"{self.direction.value}:{self.product_id}"


@dataclass(frozen=True, eq=False)
class Channel:
    role: ChannelRole
    signal: Signal


@dataclass(frozen=True, eq=False)
class RegistrationModel:
    channels: tuple[Channel, ...]
    t_s: float
    t_f: float

    def __post_init__(self):
        channels = tuple(self.channels)
        object.__setattr__(self, "channels", channels)
        if not self.t_s < self.t_f:
            raise ModelError(f"operation needs t_s < t_f, got t_s={self.t_s}, t_f={self.t_f}")
        if not channels:
            raise ModelError("registration model has no channels")
        seen = set()
        for ch in channels:
            if ch.role.label in seen:
                raise ModelError(f"duplicate channel {ch.role.label}")
            seen.add(ch.role.label)
        grid = channels[0].signal.grid
        for ch in channels:
            if not grid.matches(ch.signal.grid):
                raise GridMismatchError(f"channel {ch.role.label} is on a different grid")
            if np.any(ch.signal.density < 0) or any(m < 0 for _, m in ch.signal.impulses):
                raise ModelError(f"channel {ch.role.label} has negative flow")
        if not (grid.contains(self.t_s) and grid.contains(self.t_f)):
            raise ModelError("grid does not cover [t_s, t_f]")

    @property
    def grid(self) -> TimeGrid:
        return self.channels[0].signal.grid

    @property
    def top(self) -> float:
        return self.t_f - self.t_s

    def inputs(self) -> list[Channel]:
        return [c for c in self.channels if c.role.direction is Direction.INPUT]

    def outputs(self) -> list[Channel]:
        return [c for c in self.channels if c.role.direction is Direction.OUTPUT]

    def channel(self, product_id: str, direction: Direction | None = None) -> Channel:
        for c in self.channels:
            if c.role.product_id == product_id and direction in (None, c.role.direction):
                return c
        raise KeyError(product_id)


@dataclass(frozen=True)
class CostRates:
    """Cost estimate per quantity unit of each input (rs) and output (ps) product."""

    input_rates: Mapping[str, float] = field(default_factory=dict)
    output_rates: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for name, rates in (("input", self.input_rates), ("output", self.output_rates)):
            for pid, r in rates.items():
                if not r >= 0:
                    raise ValueError(f"{name} rate for {pid!r} must be >= 0, got {r}")
        object.__setattr__(self, "input_rates", dict(self.input_rates))
        object.__setattr__(self, "output_rates", dict(self.output_rates))

    def rate_for(self, role: ChannelRole) -> float:
        rates = self.input_rates if role.direction is Direction.INPUT else self.output_rates
        if role.product_id not in rates:
            raise ConfigurationError(
                f"no cost rate for {role.direction.name.lower()} product {role.product_id!r}",
                product_id=role.product_id,
            )
        return float(rates[role.product_id])

    def scaled(self, c: float) -> "CostRates":
        return CostRates(
            {k: v * c for k, v in self.input_rates.items()},
            {k: v * c for k, v in self.output_rates.items()},
        )


@dataclass(frozen=True, eq=False)
class ReducedModel:
    re: Signal
    pe: Signal
    t_s: float
    t_f: float

    def __post_init__(self):
        if not self.re.grid.matches(self.pe.grid):
            raise GridMismatchError("re and pe must share one grid")
        if not self.t_s < self.t_f:
            raise ModelError(f"operation needs t_s < t_f, got t_s={self.t_s}, t_f={self.t_f}")


@dataclass(frozen=True)
class SimplifiedModel:
    RE: float
    PE: float
    t_s: float
    t_f: float

    def __post_init__(self):
        if self.RE < 0 or self.PE < 0:
            raise ModelError(f"RE and PE must be >= 0, got RE={self.RE}, PE={self.PE}")
        if not self.t_s < self.t_f:
            raise ModelError(f"operation needs t_s < t_f, got t_s={self.t_s}, t_f={self.t_f}")

    @property
    def top(self) -> float:
        return self.t_f - self.t_s

    @property
    def theta(self) -> tuple[float, float, float]:
        return (self.PE, self.RE, self.top)

    def impulse_signals(self, grid: TimeGrid) -> tuple[Signal, Signal]:
        """``re*`` (RE at t_s) and ``pe*`` (PE at t_f) on ``grid``."""
        return make_impulse(self.RE, self.t_s, grid), make_impulse(self.PE, self.t_f, grid)


@dataclass(frozen=True, eq=False)
class DeployedModel:
    ire: CumulativeSignal
    ipe: CumulativeSignal
    ice: CumulativeSignal
    ibe: CumulativeSignal
    ide: CumulativeSignal
    t_s: float
    t_f: float

    @property
    def grid(self) -> TimeGrid:
        return self.ice.grid

    @property
    def top(self) -> float:
        return self.t_f - self.t_s


def operation_grid(t_s: float, t_f: float, dt: float, tail: float = 1.0, lead: int = 1) -> TimeGrid:
    """Grid for deploying an operation on ``[t_s, t_f]``.

    ``dt`` is shrunk so that ``t_f`` falls exactly on a sample, ``lead`` empty
    samples precede ``t_s``, and the grid reaches at least ``t_f + tail``.
    """
    top = t_f - t_s
    if not top > 0:
        raise ModelError("operation needs t_s < t_f")
    steps = max(1, math.ceil(top / dt - TIME_TOL))
    step = top / steps
    n_tail = math.ceil(tail / step - TIME_TOL)
    return TimeGrid(t_s - lead * step, step, lead + steps + n_tail + 1)


def reduce_channel(rq: Signal, rate: float) -> Signal:
    if rate < 0:
        raise ValueError(f"cost rate must be >= 0, got {rate}")
    return scale(rq, rate)


def reduce(reg: RegistrationModel, costs: CostRates) -> ReducedModel:
    """Cost-weight every channel and merge them into one input and one output stream."""
    grid = reg.grid
    re_parts = [reduce_channel(c.signal, costs.rate_for(c.role)) for c in reg.inputs()]
    pe_parts = [reduce_channel(c.signal, costs.rate_for(c.role)) for c in reg.outputs()]
    re = sum_signals(re_parts) if re_parts else Signal.zeros(grid)
    pe = sum_signals(pe_parts) if pe_parts else Signal.zeros(grid)
    return ReducedModel(re, pe, reg.t_s, reg.t_f)


def simplify(red: ReducedModel) -> SimplifiedModel:
    return SimplifiedModel(
        RE=red.re.integral(red.t_s, red.t_f),
        PE=red.pe.integral(red.t_s, red.t_f),
        t_s=red.t_s,
        t_f=red.t_f,
    )


def deploy(re: Signal, pe: Signal, t_s: float, t_f: float, unit_interval: float = 1.0) -> DeployedModel:
    """Integrate the reduced streams into the deployed model.

    Inputs integrate into the negative half-plane, outputs into the positive
    one.  The grid must reach ``t_f + unit_interval`` so that the open flow can
    be measured over one unit interval after completion.
    """
    if not re.grid.matches(pe.grid):
        raise GridMismatchError("re and pe must share one grid")
    grid = re.grid
    if not t_s < t_f:
        raise ModelError(f"operation needs t_s < t_f, got t_s={t_s}, t_f={t_f}")
    if not grid.contains(t_s) or grid.t_end < t_f + unit_interval - TIME_TOL * grid.dt:
        raise ValueError(
            f"grid [{grid.t_start}, {grid.t_end}] must span [t_s, t_f + {unit_interval}]"
            f" = [{t_s}, {t_f + unit_interval}]"
        )
    ire = integrate_cumulative(re, -1)
    ipe = integrate_cumulative(pe, +1)
    ice = ire + ipe
    ibe, ide = decompose(ice, t_f)
    return DeployedModel(ire, ipe, ice, ibe, ide, t_s, t_f)


def deploy_reduced(red: ReducedModel, unit_interval: float = 1.0) -> DeployedModel:
    return deploy(red.re, red.pe, red.t_s, red.t_f, unit_interval)


def deploy_simplified(simp: SimplifiedModel, dt: float, unit_interval: float = 1.0) -> DeployedModel:
    grid = operation_grid(simp.t_s, simp.t_f, dt, tail=unit_interval)
    re_star, pe_star = simp.impulse_signals(grid)
    return deploy(re_star, pe_star, simp.t_s, simp.t_f, unit_interval)


def decompose(ice: CumulativeSignal, t_f: float) -> tuple[CumulativeSignal, CumulativeSignal]:
    """Split ``ice`` into the closed flow ``ibe`` and the open flow ``ide``.

    ``ide`` is the settled level of ``ice`` from ``t_f`` on, zero before;
    ``ibe`` is the remainder, so ``ibe + ide == ice`` exactly.
    """
    grid = ice.grid
    k_f = grid.index_at_or_after(t_f)
    if k_f >= grid.n_samples:
        raise ModelError(f"completion time t_f={t_f} lies past the grid end")
    tail = ice.values[k_f:]
    level = float(tail[0])
    drift = float(np.max(np.abs(tail - level)))
    if drift > SETTLE_TOL * max(1.0, abs(level), float(np.max(np.abs(ice.values)))):
        raise ModelError(f"deployed flow still moving after t_f (drift {drift:.3g})")
    ide_values = np.zeros(grid.n_samples)
    ide_values[k_f:] = level
    ide = CumulativeSignal(grid, ide_values)
    ibe = CumulativeSignal(grid, ice.values - ide_values)
    return ibe, ide


def tight_resource_flow(rq: Signal, pq: Signal) -> CumulativeSignal:
    """Quantity bound inside the operation over time, seen from outside."""
    if not rq.grid.matches(pq.grid):
        raise GridMismatchError("rq and pq must share one grid")
    return integrate_cumulative(rq, -1) + integrate_cumulative(pq, +1)


def detect_completion(reg_outputs: list[Signal]) -> float:
    """End of the last sample in which any output flow is active."""
    if not reg_outputs:
        raise ModelError("no output channels to detect completion from")
    grid = reg_outputs[0].grid
    last = -1
    for s in reg_outputs:
        active = np.nonzero(s.density > ZERO_TOL)[0]
        if active.size:
            last = max(last, int(active[-1]))
        for t, m in s.impulses:
            if m > ZERO_TOL:
                last = max(last, grid.index_at_or_after(t) - 1)
    if last < 0:
        raise ModelError("output channels never become active")
    return grid.time_at(last + 1)


def detect_start(signals: list[Signal]) -> float:
    """Start of the first sample in which any flow is active."""
    grid = signals[0].grid
    first = grid.n_samples
    for s in signals:
        active = np.nonzero(s.density > ZERO_TOL)[0]
        if active.size:
            first = min(first, int(active[0]))
        for t, m in s.impulses:
            if m > ZERO_TOL:
                first = min(first, grid.index_at_or_after(t))
    if first == grid.n_samples:
        raise ModelError("no channel ever becomes active")
    return grid.time_at(first)
