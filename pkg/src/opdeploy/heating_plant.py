"""Batch fluid-heating plant with heater wear.

One operation fills a batch of cold fluid, heats it at a constant fraction
``k_u`` of nominal power until the setpoint is reached, then discharges it.
Temperature follows a lumped energy balance with an ambient loss term,
integrated with forward Euler.  Heater wear is recorded as a fourth input
channel whose density is the life fraction consumed per time unit.

The defaults use hours, kW, kWh, cubic metres and degrees Celsius.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import SimulationError
from .operation_model import Channel, ChannelRole, Direction, RegistrationModel
from .signal_core import TIME_TOL, Signal, TimeGrid

COLD_FLUID = "cold_fluid"
ENERGY = "energy"
WEAR = "mechanism_wear"
HEATED_FLUID = "heated_fluid"

MAX_HEATING_STEPS = 20_000_000


@dataclass(frozen=True)
class PlantConfig:
    batch_volume: float = 1.0  # m3
    T_inlet: float = 10.0  # degC
    T_setpoint: float = 60.0
    T_ambient: float = 20.0
    heat_capacity_volumetric: float = 1.163  # kWh / (m3 K), water
    efficiency: float = 0.95
    loss_coefficient: float = 0.08  # kW / K
    P_nominal: float = 20.0  # kW
    heater_life_nominal: float = 2000.0  # h at rated power
    alpha: float = 4.0
    fill_rate: float = 4.0  # m3 / h
    discharge_rate: float = 4.0
    dt: float = 0.0005  # h; >= 1000 heating steps even at full power

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name in ("T_inlet", "T_setpoint", "T_ambient", "alpha", "loss_coefficient"):
                continue
            if not value > 0:
                raise ValueError(f"{f.name} must be > 0, got {value}")
        if not self.T_setpoint > self.T_inlet:
            raise ValueError("T_setpoint must exceed T_inlet")
        if not self.efficiency <= 1:
            raise ValueError(f"efficiency must be in (0, 1], got {self.efficiency}")
        if not self.loss_coefficient >= 0:
            raise ValueError(f"loss_coefficient must be >= 0, got {self.loss_coefficient}")
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ControlSetting:
    u_p: float  # percent of nominal power

    def __post_init__(self):
        if not 0 < self.u_p <= 100:
            raise ValueError(f"u_p must be in (0, 100], got {self.u_p}")

    @property
    def k_u(self) -> float:
        return self.u_p / 100.0


def heater_life(k_u: float, T_n: float, alpha: float) -> float:
    """Heater life at load ratio ``k_u``: ``T_n * k_u**-alpha``."""
    if not k_u > 0:
        raise ValueError(f"k_u must be > 0, got {k_u}")
    return T_n * k_u ** (-alpha)


def wear_rate(k_u: float, T_n: float, alpha: float) -> float:
    """Fraction of heater life consumed per time unit while energized."""
    return 1.0 / heater_life(k_u, T_n, alpha)


def _transfer_density(volume: float, rate: float, dt: float) -> np.ndarray:
    # Full steps at the nominal rate, remainder spread over one last step.
    exact = volume / (rate * dt)
    n_full = round(exact) if abs(exact - round(exact)) <= TIME_TOL * max(1.0, exact) else math.floor(exact)
    density = np.full(n_full, rate)
    remainder = volume - n_full * rate * dt
    if remainder > TIME_TOL * volume:
        density = np.append(density, remainder / dt)
    return density


def heating_profile(cfg: PlantConfig, u: ControlSetting) -> np.ndarray:
    """Batch temperature at each heating step, ending at the first value >= setpoint."""
    power = u.k_u * cfg.P_nominal
    if not power * cfg.efficiency > cfg.loss_coefficient * (cfg.T_setpoint - cfg.T_ambient):
        raise SimulationError(
            f"setpoint {cfg.T_setpoint} unreachable at u_p={u.u_p}: "
            f"losses at setpoint exceed delivered power"
        )
    capacity = cfg.heat_capacity_volumetric * cfg.batch_volume
    gain = cfg.efficiency * power
    dt = cfg.dt
    T = cfg.T_inlet
    temps = [T]
    while T < cfg.T_setpoint:
        T = T + dt * (gain - cfg.loss_coefficient * (T - cfg.T_ambient)) / capacity
        temps.append(T)
        if len(temps) > MAX_HEATING_STEPS:
            raise SimulationError(f"heating did not finish within {MAX_HEATING_STEPS} steps")
    return np.array(temps)


def run_operation(cfg: PlantConfig, u: ControlSetting, tail: float = 1.0) -> RegistrationModel:
    """Simulate one batch and record its four product channels.

    The grid starts at ``t_s = 0`` and extends ``tail`` time units past
    completion so the model can be deployed directly.
    """
    if not cfg.dt > 0:
        raise ValueError(f"dt must be > 0, got {cfg.dt}")
    dt = cfg.dt
    fill = _transfer_density(cfg.batch_volume, cfg.fill_rate, dt)
    n_heat = len(heating_profile(cfg, u)) - 1
    discharge = _transfer_density(cfg.batch_volume, cfg.discharge_rate, dt)

    n_fill, n_dis = len(fill), len(discharge)
    k_heat = n_fill
    k_dis = n_fill + n_heat
    k_end = k_dis + n_dis
    n_tail = math.ceil(tail / dt - TIME_TOL)
    grid = TimeGrid(0.0, dt, k_end + n_tail + 1)

    def channel(direction, pid, start, values):
        density = np.zeros(grid.n_samples)
        density[start:start + len(values)] = values
        return Channel(ChannelRole(direction, pid), Signal(grid, density))

    power = u.k_u * cfg.P_nominal
    wear = wear_rate(u.k_u, cfg.heater_life_nominal, cfg.alpha)
    channels = (
        channel(Direction.INPUT, COLD_FLUID, 0, fill),
        channel(Direction.INPUT, ENERGY, k_heat, np.full(n_heat, power)),
        channel(Direction.INPUT, WEAR, k_heat, np.full(n_heat, wear)),
        channel(Direction.OUTPUT, HEATED_FLUID, k_dis, discharge),
    )
    return RegistrationModel(channels, t_s=0.0, t_f=grid.time_at(k_end))


def integrated_quantities(reg: RegistrationModel) -> dict[str, float]:
    """Total quantity of each product over ``[t_s, t_f]``.

    Keys are product ids; a product present in both directions is keyed by
    its ``in:``/``out:`` label instead.
    """
    ids = [c.role.product_id for c in reg.channels]
    totals = {}
    for c in reg.channels:
        key = c.role.product_id if ids.count(c.role.product_id) == 1 else c.role.label
        totals[key] = c.signal.integral(reg.t_s, reg.t_f)
    return totals


def heating_duration(reg: RegistrationModel) -> float:
    """Time the heater was energized during the operation."""
    energy = reg.channel(ENERGY).signal
    return float(np.count_nonzero(energy.density > 0)) * reg.grid.dt
