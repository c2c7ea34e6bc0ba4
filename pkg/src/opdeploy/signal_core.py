"""Uniformly sampled flow-rate signals and their cumulative integrals.

A :class:`Signal` is a rate density sampled on a :class:`TimeGrid` plus a list
of point impulses.  Density sample ``k`` is the rate over ``[t_k, t_k + dt)``
(left-Riemann), so the final sample of a grid carries no mass.  A
:class:`CumulativeSignal` is a step function: its value at ``t`` is
``values[k]`` for the largest ``k`` with ``t_k <= t``; outside the grid the
boundary value is held.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import GridMismatchError

# Fraction of dt within which two times are treated as equal.
TIME_TOL = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    dt: float
    n_samples: int

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.n_samples < 0:
            raise ValueError(f"n_samples must be >= 0, got {self.n_samples}")

    @classmethod
    def spanning(cls, t_start: float, t_end: float, dt: float) -> "TimeGrid":
        """Smallest grid starting at ``t_start`` whose last sample is >= ``t_end``."""
        n = math.ceil((t_end - t_start) / dt - TIME_TOL) + 1
        return cls(t_start, dt, max(n, 1))

    @property
    def t_end(self) -> float:
        return self.t_start + (self.n_samples - 1) * self.dt if self.n_samples else self.t_start

    @property
    def times(self) -> np.ndarray:
        return self.t_start + np.arange(self.n_samples) * self.dt

    def time_at(self, k: int) -> float:
        return self.t_start + k * self.dt

    def contains(self, t: float) -> bool:
        eps = TIME_TOL * self.dt
        return self.n_samples > 0 and self.t_start - eps <= t <= self.t_end + eps

    def index_at_or_after(self, t: float) -> int:
        """First sample index with ``t_k >= t`` (within tolerance)."""
        return max(0, math.ceil((t - self.t_start) / self.dt - TIME_TOL))

    def index_at_or_before(self, t: float) -> int:
        """Last sample index with ``t_k <= t`` (within tolerance); -1 if none."""
        return math.floor((t - self.t_start) / self.dt + TIME_TOL)

    def matches(self, other: "TimeGrid") -> bool:
        if self.n_samples != other.n_samples:
            return False
        scale = max(abs(self.dt), abs(other.dt))
        return (
            abs(self.dt - other.dt) <= 1e-12 * scale
            and abs(self.t_start - other.t_start) <= TIME_TOL * scale
        )


def _frozen(values, n: int | None = None) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError("expected a one-dimensional sequence")
    if n is not None and arr.size != n:
        raise ValueError(f"expected {n} values, got {arr.size}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Signal:
    """Rate density on a grid plus symbolic ``(time, mass)`` impulses."""

    grid: TimeGrid
    density: np.ndarray
    impulses: tuple[tuple[float, float], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "density", _frozen(self.density, self.grid.n_samples))
        imps = tuple(sorted((float(t), float(m)) for t, m in self.impulses))
        for t, _ in imps:
            if not self.grid.contains(t):
                raise ValueError(f"impulse at t={t} lies outside the grid")
        object.__setattr__(self, "impulses", imps)

    @classmethod
    def zeros(cls, grid: TimeGrid) -> "Signal":
        return cls(grid, np.zeros(grid.n_samples))

    @classmethod
    def constant(cls, grid: TimeGrid, value: float) -> "Signal":
        return cls(grid, np.full(grid.n_samples, float(value)))

    def total(self) -> float:
        """Integral over the whole grid span, impulses included."""
        return float(self.grid.dt * self.density[:-1].sum()) + sum(m for _, m in self.impulses)

    def integral(self, t_a: float, t_b: float) -> float:
        """Integral over the closed interval ``[t_a, t_b]``.

        Impulses sitting exactly on either end point are counted.
        """
        if t_a > t_b:
            raise ValueError(f"t_a={t_a} > t_b={t_b}")
        grid = self.grid
        if grid.n_samples == 0:
            return 0.0
        lo = grid.times
        hi = np.minimum(lo + grid.dt, grid.t_end)
        eps = TIME_TOL * grid.dt
        overlap = np.clip(np.minimum(hi, t_b) - np.maximum(lo, t_a), 0.0, None)
        inside = (lo >= t_a - eps) & (lo + grid.dt <= t_b + eps)
        inside[-1] = False
        overlap[inside] = grid.dt
        mass = sum(m for t, m in self.impulses if t_a - eps <= t <= t_b + eps)
        return float(np.dot(self.density, overlap)) + mass


@dataclass(frozen=True, eq=False)
class CumulativeSignal:
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, self.grid.n_samples))

    def at(self, t: float) -> float:
        if self.grid.n_samples == 0:
            raise ValueError("empty cumulative signal")
        k = min(max(self.grid.index_at_or_before(t), 0), self.grid.n_samples - 1)
        return float(self.values[k])

    def final(self) -> float:
        return float(self.values[-1])

    def _check(self, other: "CumulativeSignal") -> None:
        if not self.grid.matches(other.grid):
            raise GridMismatchError("cumulative signals are on different grids")

    def __add__(self, other: "CumulativeSignal") -> "CumulativeSignal":
        self._check(other)
        return CumulativeSignal(self.grid, self.values + other.values)

    def __sub__(self, other: "CumulativeSignal") -> "CumulativeSignal":
        self._check(other)
        return CumulativeSignal(self.grid, self.values - other.values)

    def __neg__(self) -> "CumulativeSignal":
        return CumulativeSignal(self.grid, -self.values)


def integrate_cumulative(s: Signal, sign: int = 1) -> CumulativeSignal:
    """Running integral of ``s``, left-Riemann on the density.

    ``values[k]`` holds the density mass of samples ``j < k`` plus every
    impulse with time ``<= t_k``, multiplied by ``sign``.
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    grid = s.grid
    n = grid.n_samples
    if n == 0:
        return CumulativeSignal(grid, np.zeros(0))
    steps = np.zeros(n)
    steps[1:] = s.density[:-1] * grid.dt
    for t, m in s.impulses:
        steps[min(grid.index_at_or_after(t), n - 1)] += m
    return CumulativeSignal(grid, sign * np.cumsum(steps))


def integrate_interval(c: CumulativeSignal, t_a: float, t_b: float) -> float:
    """Exact integral of the step function ``c`` over ``[t_a, t_b]``.

    The first value is held before the grid and the last value after it.
    """
    if t_a > t_b:
        raise ValueError(f"t_a={t_a} > t_b={t_b}")
    n = c.grid.n_samples
    if n == 0:
        raise ValueError("empty cumulative signal")
    times = c.grid.times
    lo = np.concatenate(([-np.inf], times[1:]))
    hi = np.concatenate((times[1:], [np.inf]))
    overlap = np.clip(np.minimum(hi, t_b) - np.maximum(lo, t_a), 0.0, None)
    return float(np.dot(c.values, overlap))


def sum_signals(signals: Iterable[Signal]) -> Signal:
    signals = list(signals)
    if not signals:
        raise ValueError("sum_signals needs at least one signal")
    grid = signals[0].grid
    for s in signals[1:]:
        if not grid.matches(s.grid):
            raise GridMismatchError("signals must share one grid; resample first")
    density = np.sum([s.density for s in signals], axis=0)
    impulses = [imp for s in signals for imp in s.impulses]
    return Signal(grid, density, tuple(impulses))


def scale(s: Signal, c: float) -> Signal:
    return Signal(s.grid, s.density * c, tuple((t, m * c) for t, m in s.impulses))


def make_impulse(mass: float, t: float, grid: TimeGrid) -> Signal:
    if not grid.contains(t):
        raise ValueError(f"impulse time {t} outside grid [{grid.t_start}, {grid.t_end}]")
    return Signal(grid, np.zeros(grid.n_samples), ((t, mass),))


def resample(s: Signal, grid: TimeGrid) -> Signal:
    """Move ``s`` onto ``grid`` conserving its total integral.

    Density mass is redistributed by interval overlap; impulses snap to the
    nearest target sample.  The target grid must cover the source span.
    """
    src = s.grid
    if src.matches(grid):
        return s
    if src.n_samples == 0:
        return Signal.zeros(grid)
    eps = TIME_TOL * max(src.dt, grid.dt)
    if grid.n_samples == 0 or grid.t_start > src.t_start + eps or grid.t_end < src.t_end - eps:
        raise ValueError("target grid does not span the source signal")

    src_edges = src.times
    mass_at_edges = np.concatenate(([0.0], np.cumsum(s.density[:-1] * src.dt)))
    tgt_times = grid.times
    cum = np.interp(tgt_times, src_edges, mass_at_edges, left=0.0, right=mass_at_edges[-1])
    density = np.zeros(grid.n_samples)
    density[:-1] = np.diff(cum) / grid.dt
    # Zero-width last sample: carry the source rate for continuity, no mass.
    last = src.index_at_or_before(tgt_times[-1])
    if 0 <= last < src.n_samples and tgt_times[-1] <= src.t_end + eps:
        density[-1] = s.density[last]

    impulses = []
    for t, m in s.impulses:
        k = int(round((t - grid.t_start) / grid.dt))
        impulses.append((grid.time_at(min(max(k, 0), grid.n_samples - 1)), m))
    return Signal(grid, density, tuple(impulses))


def signal_from_steps(grid: TimeGrid, steps: Sequence[tuple[float, float, float]]) -> Signal:
    """Build a density from ``(t_from, t_to, rate)`` rectangles.

    Rectangles not aligned to the grid are spread conservatively over the
    samples they overlap.
    """
    density = np.zeros(grid.n_samples)
    lo = grid.times
    hi = lo + grid.dt
    for t_from, t_to, rate in steps:
        overlap = np.clip(np.minimum(hi, t_to) - np.maximum(lo, t_from), 0.0, None)
        density += rate * overlap / grid.dt
    return Signal(grid, density)
