from dataclasses import replace

import numpy as np
import pytest

from opdeploy.errors import SimulationError
from opdeploy.heating_plant import (
    ControlSetting,
    PlantConfig,
    heater_life,
    heating_duration,
    heating_profile,
    integrated_quantities,
    run_operation,
    wear_rate,
)

# Lossless plant whose heating time has a closed form: t = C * V * dT / P.
LOSSLESS = PlantConfig(
    batch_volume=1.0,
    T_inlet=10.0,
    T_setpoint=50.0,
    T_ambient=20.0,
    heat_capacity_volumetric=4.186e6,
    efficiency=1.0,
    loss_coefficient=0.0,
    P_nominal=1e4,
    heater_life_nominal=1000.0,
    alpha=4.0,
    fill_rate=0.01,
    discharge_rate=0.01,
    dt=1.0,
)


def test_heater_life_law():
    assert heater_life(1.0, 1500.0, 4.0) == 1500.0
    assert heater_life(2.0, 1000.0, 2.0) == pytest.approx(250.0)
    for k in (0.3, 1.0, 1.7):
        assert heater_life(k, 800.0, 0.0) == 800.0
    with pytest.raises(ValueError):
        heater_life(0.0, 1000.0, 4.0)


def test_wear_rate():
    assert wear_rate(1.0, 1000.0, 4.0) == pytest.approx(1e-3)
    assert wear_rate(0.8, 1000.0, 3.0) / wear_rate(0.4, 1000.0, 3.0) == pytest.approx(8.0)
    with pytest.raises(ValueError):
        wear_rate(-0.5, 1000.0, 3.0)


def test_control_setting_bounds():
    assert ControlSetting(65).k_u == 0.65
    for bad in (0, -5, 100.5):
        with pytest.raises(ValueError):
            ControlSetting(bad)


def test_plant_config_validation():
    with pytest.raises(ValueError):
        PlantConfig(dt=0.0)
    with pytest.raises(ValueError):
        PlantConfig(T_setpoint=5.0)
    with pytest.raises(ValueError):
        PlantConfig(efficiency=1.2)


def test_lossless_heating_duration_matches_energy_balance():
    reg = run_operation(LOSSLESS, ControlSetting(100))
    analytic = 4.186e6 * 40 / 1e4
    assert analytic == pytest.approx(16744.0)
    assert abs(heating_duration(reg) - analytic) <= LOSSLESS.dt


def test_lossless_half_power_doubles_time_same_energy():
    full = run_operation(LOSSLESS, ControlSetting(100))
    half = run_operation(LOSSLESS, ControlSetting(50))
    assert abs(heating_duration(half) - 2 * heating_duration(full)) <= 2 * LOSSLESS.dt
    q_full, q_half = integrated_quantities(full), integrated_quantities(half)
    assert abs(q_half["energy"] - q_full["energy"]) <= LOSSLESS.dt * LOSSLESS.P_nominal


def test_lossless_energy_independent_of_power():
    energy = [
        integrated_quantities(run_operation(LOSSLESS, ControlSetting(u)))["energy"] for u in (40, 70, 100)
    ]
    assert max(energy) - min(energy) <= LOSSLESS.dt * LOSSLESS.P_nominal


def test_losses_make_slow_heating_costlier():
    cfg = PlantConfig()
    fast = integrated_quantities(run_operation(cfg, ControlSetting(100)))
    slow = integrated_quantities(run_operation(cfg, ControlSetting(50)))
    assert fast["energy"] < slow["energy"]


def test_unreachable_setpoint():
    cfg = PlantConfig(loss_coefficient=1.0)
    with pytest.raises(SimulationError):
        run_operation(cfg, ControlSetting(30))


def test_channels_and_phases():
    cfg = PlantConfig()
    reg = run_operation(cfg, ControlSetting(65))
    labels = [c.role.label for c in reg.channels]
    assert labels == ["in:cold_fluid", "in:energy", "in:mechanism_wear", "out:heated_fluid"]
    fill = np.nonzero(reg.channel("cold_fluid").signal.density)[0]
    heat = np.nonzero(reg.channel("energy").signal.density)[0]
    wear = np.nonzero(reg.channel("mechanism_wear").signal.density)[0]
    out = np.nonzero(reg.channel("heated_fluid").signal.density)[0]
    assert fill[-1] < heat[0] and heat[-1] < out[0]
    np.testing.assert_array_equal(heat, wear)
    assert reg.t_s == 0.0
    assert reg.t_f == pytest.approx(reg.grid.time_at(out[-1] + 1))
    assert reg.grid.t_end >= reg.t_f + 1.0


def test_integrated_quantities():
    cfg = PlantConfig()
    u = ControlSetting(70)
    reg = run_operation(cfg, u)
    q = integrated_quantities(reg)
    assert q["cold_fluid"] == pytest.approx(cfg.batch_volume, rel=1e-9)
    assert q["heated_fluid"] == pytest.approx(cfg.batch_volume, rel=1e-9)
    assert q["cold_fluid"] == pytest.approx(q["heated_fluid"], rel=1e-12)
    assert q["energy"] > 0
    closed = heating_duration(reg) * u.k_u ** cfg.alpha / cfg.heater_life_nominal
    assert q["mechanism_wear"] == pytest.approx(closed, rel=1e-9)


def test_fill_remainder_conserves_volume():
    cfg = replace(PlantConfig(), batch_volume=1.23456, fill_rate=3.7, discharge_rate=2.9)
    q = integrated_quantities(run_operation(cfg, ControlSetting(60)))
    assert q["cold_fluid"] == pytest.approx(1.23456, rel=1e-9)
    assert q["heated_fluid"] == pytest.approx(1.23456, rel=1e-9)


@pytest.mark.parametrize("u_p", [30, 65, 100])
def test_setpoint_honored_within_one_step(u_p):
    cfg = PlantConfig()
    temps = heating_profile(cfg, ControlSetting(u_p))
    capacity = cfg.heat_capacity_volumetric * cfg.batch_volume
    gain = cfg.efficiency * cfg.P_nominal * u_p / 100
    max_rise = cfg.dt * (gain + cfg.loss_coefficient * max(0.0, cfg.T_ambient - cfg.T_inlet)) / capacity
    assert cfg.T_setpoint <= temps[-1] < cfg.T_setpoint + max_rise
    assert np.all(temps[:-1] < cfg.T_setpoint)


def test_default_dt_resolves_fastest_heating():
    reg = run_operation(PlantConfig(), ControlSetting(100))
    assert heating_duration(reg) / PlantConfig().dt >= 1000


def test_monotone_in_power():
    cfg = PlantConfig()
    runs = [run_operation(cfg, ControlSetting(u)) for u in (40, 60, 80, 100)]
    tops = [r.top for r in runs]
    wear = [integrated_quantities(r)["mechanism_wear"] for r in runs]
    energy = [integrated_quantities(r)["energy"] for r in runs]
    assert all(a > b for a, b in zip(tops, tops[1:]))
    assert all(a < b for a, b in zip(wear, wear[1:]))
    assert all(a > b for a, b in zip(energy, energy[1:]))
