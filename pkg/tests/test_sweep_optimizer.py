from dataclasses import replace
from pathlib import Path

import pytest

from opdeploy.cli_io import load_run_config
from opdeploy.errors import SimulationError
from opdeploy.heating_plant import ControlSetting, PlantConfig, run_operation
from opdeploy.operation_model import CostRates
from opdeploy.sweep_optimizer import (
    Criterion,
    SweepRecord,
    evaluate,
    refine,
    select_optimal,
    sweep,
    u_grid,
)

FIXTURE = Path(__file__).parent / "fixtures" / "interior_optimum.json"
COSTS = CostRates(
    {"cold_fluid": 2.0, "energy": 0.15, "mechanism_wear": 2500.0},
    {"heated_fluid": 20.0},
)


def record(u_p, PE=20.0, RE=14.0, Top=5.0):
    R = (PE - RE) / RE
    return SweepRecord(u_p=u_p, RE=RE, PE=PE, Top=Top, R=R, F=R / Top)


def test_u_grid():
    assert u_grid(30, 100, 5)[0] == 30 and u_grid(30, 100, 5)[-1] == 100
    assert len(u_grid(30, 100, 5)) == 15
    assert u_grid(65, 65, 5) == [65.0]


def test_single_setting_matches_direct_run():
    cfg = PlantConfig()
    (rec,) = sweep(cfg, COSTS, [65])
    ev = evaluate(run_operation(cfg, ControlSetting(65)), COSTS)
    assert rec.RE == ev.summary.RE and rec.F == ev.summary.F and rec.Top == ev.summary.Top


def test_record_cost_identities():
    for rec in sweep(PlantConfig(), COSTS, [40, 90]):
        rs = COSTS.input_rates
        assert rec.RE == pytest.approx(
            rs["cold_fluid"] * rec.RQ_w + rs["energy"] * rec.RQ_p + rs["mechanism_wear"] * rec.RQ_m, rel=1e-9
        )
        assert rec.PE == pytest.approx(COSTS.output_rates["heated_fluid"] * rec.PQ_w, rel=1e-9)


def test_top_strictly_decreasing():
    recs = sweep(PlantConfig(), COSTS, u_grid(30, 100, 5))
    tops = [r.Top for r in recs]
    assert all(a > b for a, b in zip(tops, tops[1:]))


@pytest.mark.parametrize("bad", [[], [50, 50], [60, 50], [0, 50], [50, 120]])
def test_sweep_argument_errors(bad):
    with pytest.raises(ValueError):
        sweep(PlantConfig(), COSTS, bad)


def test_failed_settings_are_reported():
    cfg = replace(PlantConfig(), loss_coefficient=0.2)  # 30 % cannot reach the setpoint
    recs = sweep(cfg, COSTS, [30, 80])
    assert not recs[0].ok and "unreachable" in recs[0].error
    assert recs[1].ok
    with pytest.raises(ValueError):
        select_optimal(recs)
    assert select_optimal([r for r in recs if r.ok]).u_p == 80


def test_all_failed_sweep_raises():
    cfg = replace(PlantConfig(), loss_coefficient=5.0)
    with pytest.raises(SimulationError):
        sweep(cfg, COSTS, [30, 40])


def test_select_prefers_shorter_operation_at_equal_totals():
    slow, fast = record(50, Top=7.0), record(70, Top=5.0)
    assert slow.R == fast.R
    assert select_optimal([slow, fast], Criterion.MAX_F) is fast
    # R cannot tell them apart; the tie goes to the smaller setting
    assert select_optimal([slow, fast], Criterion.MAX_R) is slow


def test_select_single_and_empty():
    only = record(60)
    for c in Criterion:
        assert select_optimal([only], c) is only
    with pytest.raises(ValueError):
        select_optimal([])


def test_criteria():
    recs = [record(40, RE=13.0, Top=8.0), record(60, RE=14.0, Top=5.0), record(80, RE=16.0, Top=4.0)]
    assert select_optimal(recs, "min_RE").u_p == 40
    assert select_optimal(recs, "min_Top").u_p == 80
    assert select_optimal(recs, "max_R").u_p == 40
    assert select_optimal(recs, "max_F").u_p == 60


def test_max_r_and_max_f_agree_when_durations_match():
    recs = [record(u, PE=20.0, RE=re, Top=5.0) for u, re in ((40, 15.0), (60, 13.0), (80, 14.0))]
    assert select_optimal(recs, Criterion.MAX_F) is select_optimal(recs, Criterion.MAX_R)


def test_interior_optimum_regression():
    cfg = load_run_config(FIXTURE)
    recs = sweep(cfg.plant, cfg.costs, u_grid(cfg.sweep.u_from, cfg.sweep.u_to, cfg.sweep.u_step))
    best = select_optimal(recs, Criterion.MAX_F)
    assert recs[0].u_p < best.u_p < recs[-1].u_p
    assert best.u_p == 75.0  # frozen from the desk search
    assert select_optimal(recs, Criterion.MIN_RE).u_p == 55.0


@pytest.mark.parametrize("c", [0.1, 7.0, 1000.0])
def test_argmax_invariant_under_cost_scaling(c):
    us = u_grid(50, 100, 10)
    base = sweep(PlantConfig(), COSTS, us)
    scaled = sweep(PlantConfig(), COSTS.scaled(c), us)
    assert select_optimal(base).u_p == select_optimal(scaled).u_p


def test_sweep_is_deterministic():
    us = [45, 75]
    assert sweep(PlantConfig(), COSTS, us) == sweep(PlantConfig(), COSTS, us)


def test_refine_adds_points_around_incumbent():
    cfg = PlantConfig()
    recs = sweep(cfg, COSTS, u_grid(30, 100, 5))
    refined = refine(cfg, COSTS, recs, 5.0)
    added = sorted({r.u_p for r in refined} - {r.u_p for r in recs})
    assert len(added) >= 3
    assert all(abs(u - 75.0) < 5.0 for u in added)
    assert select_optimal(refined).F >= select_optimal(recs).F
    assert [r.u_p for r in refined] == sorted(r.u_p for r in refined)
