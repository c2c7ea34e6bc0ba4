"""Sweep the heater power setting and pick the most efficient operation."""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Iterable, Sequence

from .errors import SimulationError, UndefinedIndexError
from .heating_plant import (
    COLD_FLUID,
    ENERGY,
    HEATED_FLUID,
    WEAR,
    ControlSetting,
    PlantConfig,
    integrated_quantities,
    run_operation,
)
from .indices import OperationSummary, summarize
from .operation_model import (
    CostRates,
    DeployedModel,
    ReducedModel,
    RegistrationModel,
    SimplifiedModel,
    deploy_reduced,
    reduce,
    simplify,
)

log = logging.getLogger(__name__)

NAN = float("nan")


@dataclass(frozen=True)
class Evaluation:
    registration: RegistrationModel
    reduced: ReducedModel
    simplified: SimplifiedModel
    deployed: DeployedModel
    summary: OperationSummary


def evaluate(reg: RegistrationModel, costs: CostRates, unit_interval: float = 1.0) -> Evaluation:
    """Run the full model chain on one recorded operation."""
    red = reduce(reg, costs)
    simp = simplify(red)
    dep = deploy_reduced(red, unit_interval)
    return Evaluation(reg, red, simp, dep, summarize(dep, simp, unit_interval))


@dataclass(frozen=True)
class SweepRecord:
    u_p: float
    RQ_w: float = NAN
    RQ_p: float = NAN
    RQ_m: float = NAN
    PQ_w: float = NAN
    RE: float = NAN
    PE: float = NAN
    Top: float = NAN
    R: float = NAN
    F: float = NAN
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict:
        return asdict(self)


class Criterion(str, Enum):
    MAX_F = "max_F"
    MAX_R = "max_R"
    MIN_RE = "min_RE"
    MIN_TOP = "min_Top"


# Sort key per criterion: smaller is better; ties resolved by smaller u_p.
_KEYS = {
    Criterion.MAX_F: lambda r: -r.F,
    Criterion.MAX_R: lambda r: -r.R,
    Criterion.MIN_RE: lambda r: r.RE,
    Criterion.MIN_TOP: lambda r: r.Top,
}


def run_setting(cfg: PlantConfig, costs: CostRates, u_p: float, unit_interval: float = 1.0) -> SweepRecord:
    try:
        reg = run_operation(cfg, ControlSetting(u_p), tail=unit_interval)
        ev = evaluate(reg, costs, unit_interval)
    except (SimulationError, UndefinedIndexError) as exc:
        log.warning("u_p=%s failed: %s", u_p, exc)
        return SweepRecord(u_p=u_p, error=str(exc))
    q = integrated_quantities(reg)
    s = ev.summary
    return SweepRecord(
        u_p=u_p,
        RQ_w=q[COLD_FLUID],
        RQ_p=q[ENERGY],
        RQ_m=q[WEAR],
        PQ_w=q[HEATED_FLUID],
        RE=s.RE,
        PE=s.PE,
        Top=s.Top,
        R=s.R,
        F=s.F,
    )


def _check_u_values(u_values: Sequence[float]) -> None:
    if not u_values:
        raise ValueError("u_values must be non-empty")
    for u in u_values:
        if not 0 < u <= 100:
            raise ValueError(f"u_p must be in (0, 100], got {u}")
    for a, b in zip(u_values, u_values[1:]):
        if not b > a:
            raise ValueError(f"u_values must be strictly increasing (got {a} then {b})")


def sweep(
    cfg: PlantConfig,
    costs: CostRates,
    u_values: Sequence[float],
    unit_interval: float = 1.0,
) -> list[SweepRecord]:
    _check_u_values(u_values)
    records = [run_setting(cfg, costs, float(u), unit_interval) for u in u_values]
    if not any(r.ok for r in records):
        raise SimulationError("every setting in the sweep failed")
    return records


def u_grid(u_from: float, u_to: float, u_step: float) -> list[float]:
    """Inclusive grid from ``u_from`` to ``u_to``."""
    if u_to < u_from:
        raise ValueError("u_to must be >= u_from")
    if u_to == u_from:
        return [float(u_from)]
    if not u_step > 0:
        raise ValueError("u_step must be > 0")
    n = math.floor((u_to - u_from) / u_step + 1e-9)
    return [round(u_from + k * u_step, 10) for k in range(n + 1)]


def select_optimal(records: Iterable[SweepRecord], criterion: Criterion | str = Criterion.MAX_F) -> SweepRecord:
    records = list(records)
    if not records:
        raise ValueError("no records to select from")
    failed = [r.u_p for r in records if not r.ok]
    if failed:
        raise ValueError(f"records with errors cannot be ranked: u_p={failed}")
    key = _KEYS[Criterion(criterion)]
    return min(records, key=lambda r: (key(r), r.u_p))


def refine(
    cfg: PlantConfig,
    costs: CostRates,
    records: Sequence[SweepRecord],
    u_step: float,
    criterion: Criterion | str = Criterion.MAX_F,
    rounds: int = 3,
    unit_interval: float = 1.0,
) -> list[SweepRecord]:
    """Halve the grid step around the incumbent ``rounds`` times.

    Returns the original and the added records, ordered by ``u_p``.
    """
    by_u = {r.u_p: r for r in records}
    step = u_step
    for _ in range(rounds):
        best = select_optimal([r for r in by_u.values() if r.ok], criterion)
        step /= 2
        for u in (best.u_p - step, best.u_p + step):
            u = round(u, 10)
            if 0 < u <= 100 and u not in by_u:
                by_u[u] = run_setting(cfg, costs, u, unit_interval)
    return [by_u[u] for u in sorted(by_u)]
