"""Configuration, signal-log and report formats.

Run configs and reports are JSON.  Signal logs are CSV: a ``t`` column then
one ``in:<product>`` or ``out:<product>`` column per channel holding flow
densities, optionally preceded by ``# key: value`` metadata lines::

    # t_s: 0
    # t_f: 3
    # rate:in:energy: 0.15
    t,in:energy,out:heated_fluid
    0,0.0,0.0
    ...
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .errors import OpdeployError
from .heating_plant import PlantConfig
from .operation_model import (
    Channel,
    ChannelRole,
    CostRates,
    DeployedModel,
    Direction,
    RegistrationModel,
    detect_completion,
    detect_start,
)
from .signal_core import TIME_TOL, Signal, TimeGrid

SIG_DIGITS = 12
UNIFORM_TOL = 1e-9


class ValidationError(OpdeployError, ValueError):
    """A document does not satisfy its schema or invariants."""


@dataclass(frozen=True)
class SweepSpec:
    u_from: float
    u_to: float
    u_step: float


@dataclass(frozen=True)
class RunConfig:
    plant: PlantConfig
    costs: CostRates
    sweep: SweepSpec | None = None
    f_unit_interval: float = 1.0


def default_costs() -> CostRates:
    return CostRates(
        {"cold_fluid": 2.0, "energy": 0.15, "mechanism_wear": 2500.0},
        {"heated_fluid": 20.0},
    )


def default_run_config() -> RunConfig:
    return RunConfig(PlantConfig(), default_costs(), SweepSpec(30.0, 100.0, 5.0), 1.0)


# -- generic helpers ---------------------------------------------------------


def _reject_unknown(doc: Mapping, allowed: Iterable[str], where: str) -> None:
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        raise ValidationError(f"{where}: unknown key(s) {', '.join(unknown)}")


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ValidationError(f"{where}: must be finite")
    return float(value)


def _mapping(value: Any, where: str) -> Mapping:
    if not isinstance(value, Mapping):
        raise ValidationError(f"{where}: expected an object")
    return value


def fmt(x: float | None) -> float | None:
    """Round to the report precision; NaN becomes None."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return None
    return float(f"{x:.{SIG_DIGITS}g}")


def fmt_str(x: float | None) -> str:
    return "" if x is None or math.isnan(x) else f"{x:.{SIG_DIGITS}g}"


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_json(path: str | os.PathLike) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc


def dump_json(doc: Any) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


# -- run configuration -------------------------------------------------------


def parse_costs(doc: Any, where: str = "costs") -> CostRates:
    doc = _mapping(doc, where)
    _reject_unknown(doc, ("input_rates", "output_rates"), where)
    rates = {}
    for key in ("input_rates", "output_rates"):
        block = _mapping(doc.get(key, {}), f"{where}.{key}")
        parsed = {}
        for pid, v in block.items():
            v = _number(v, f"{where}.{key}.{pid}")
            if v < 0:
                raise ValidationError(f"{where}.{key}.{pid}: must be >= 0")
            parsed[str(pid)] = v
        rates[key] = parsed
    return CostRates(rates["input_rates"], rates["output_rates"])


def costs_to_doc(costs: CostRates) -> dict:
    return {
        "input_rates": {k: fmt(v) for k, v in costs.input_rates.items()},
        "output_rates": {k: fmt(v) for k, v in costs.output_rates.items()},
    }


def parse_plant(doc: Any) -> PlantConfig:
    doc = _mapping(doc, "plant")
    names = [f.name for f in fields(PlantConfig)]
    _reject_unknown(doc, names, "plant")
    values = {k: _number(v, f"plant.{k}") for k, v in doc.items()}
    try:
        return PlantConfig(**values)
    except ValueError as exc:
        raise ValidationError(f"plant: {exc}") from exc


def parse_run_config(doc: Any) -> RunConfig:
    doc = _mapping(doc, "config")
    _reject_unknown(doc, ("plant", "costs", "sweep", "f_unit_interval"), "config")
    plant = parse_plant(doc.get("plant", {}))
    if "costs" not in doc:
        raise ValidationError("config: missing key costs")
    costs = parse_costs(doc["costs"])
    sweep = None
    if "sweep" in doc:
        block = _mapping(doc["sweep"], "sweep")
        _reject_unknown(block, ("u_from", "u_to", "u_step"), "sweep")
        missing = [k for k in ("u_from", "u_to", "u_step") if k not in block]
        if missing:
            raise ValidationError(f"sweep: missing key(s) {', '.join(missing)}")
        sweep = SweepSpec(*(_number(block[k], f"sweep.{k}") for k in ("u_from", "u_to", "u_step")))
        for k in ("u_from", "u_to"):
            if not 0 < getattr(sweep, k) <= 100:
                raise ValidationError(f"sweep.{k}: must be in (0, 100]")
        if sweep.u_to < sweep.u_from:
            raise ValidationError("sweep.u_to: must be >= sweep.u_from")
        if not sweep.u_step > 0:
            raise ValidationError("sweep.u_step: must be > 0")
    unit = _number(doc.get("f_unit_interval", 1.0), "f_unit_interval")
    if not unit > 0:
        raise ValidationError("f_unit_interval: must be > 0")
    return RunConfig(plant, costs, sweep, unit)


def run_config_to_doc(cfg: RunConfig) -> dict:
    doc = {"plant": cfg.plant.to_dict(), "costs": costs_to_doc(cfg.costs)}
    if cfg.sweep is not None:
        doc["sweep"] = {"u_from": cfg.sweep.u_from, "u_to": cfg.sweep.u_to, "u_step": cfg.sweep.u_step}
    doc["f_unit_interval"] = cfg.f_unit_interval
    return doc


def load_run_config(path: str | os.PathLike) -> RunConfig:
    return parse_run_config(read_json(path))


# -- signal logs --------------------------------------------------------------


def format_signal_log(reg: RegistrationModel, costs: CostRates | None = None) -> str:
    """Serialize a registration model; values keep full float precision."""
    out = io.StringIO()
    out.write(f"# t_s: {reg.t_s!r}\n")
    out.write(f"# t_f: {reg.t_f!r}\n")
    if costs is not None:
        for c in reg.channels:
            rates = costs.input_rates if c.role.direction is Direction.INPUT else costs.output_rates
            if c.role.product_id in rates:
                out.write(f"# rate:{c.role.label}: {float(rates[c.role.product_id])!r}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["t"] + [c.role.label for c in reg.channels])
    times = reg.grid.times
    columns = [c.signal.density for c in reg.channels]
    for k, t in enumerate(times):
        writer.writerow([repr(float(t))] + [repr(float(col[k])) for col in columns])
    return out.getvalue()


@dataclass(frozen=True)
class SignalLog:
    registration: RegistrationModel
    rates: CostRates | None


def parse_signal_log(text: str, unit_interval: float = 1.0) -> SignalLog:
    """Parse a CSV signal log into a registration model.

    Without ``t_s``/``t_f`` metadata the operation bounds are detected from
    the first active channel sample and the end of the last active output
    sample.  The grid is padded with idle samples when it ends before
    ``t_f + unit_interval``.
    """
    meta: dict[str, str] = {}
    body = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if line.startswith("#"):
            key, sep, value = line[1:].strip().rpartition(":")
            if not sep or not key:
                raise ValidationError(f"line {lineno}: metadata must read '# key: value'")
            meta[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    if not body:
        raise ValidationError("signal log has no header row")
    rows = list(csv.reader(body))
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "t":
        raise ValidationError("signal log: first column must be 't'")
    roles = []
    for name in header[1:]:
        direction, sep, pid = name.partition(":")
        if not sep or direction not in ("in", "out") or not pid:
            raise ValidationError(f"signal log: column {name!r} must be named in:<id> or out:<id>")
        roles.append(ChannelRole(Direction(direction), pid))
    if len({r.label for r in roles}) != len(roles):
        raise ValidationError("signal log: duplicate channel columns")
    if not roles:
        raise ValidationError("signal log: no channel columns")
    try:
        data = np.array([[float(x) for x in row] for row in rows[1:]], dtype=float)
    except ValueError as exc:
        raise ValidationError(f"signal log: non-numeric value ({exc})") from exc
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != len(header):
        raise ValidationError("signal log: need at least two complete rows")
    if not np.all(np.isfinite(data)):
        raise ValidationError("signal log: values must be finite")

    t = data[:, 0]
    steps = np.diff(t)
    if np.any(steps <= 0):
        raise ValidationError("signal log: column t must be strictly increasing")
    dt = (t[-1] - t[0]) / (len(t) - 1)
    if np.max(np.abs(steps - dt)) > UNIFORM_TOL * dt:
        raise ValidationError("signal log: column t must have a uniform step")
    densities = data[:, 1:]
    negative = np.nonzero(np.any(densities < 0, axis=0))[0]
    if negative.size:
        raise ValidationError(f"signal log: negative density in column {roles[negative[0]].label}")

    def meta_float(key):
        try:
            return float(meta[key])
        except ValueError as exc:
            raise ValidationError(f"metadata {key}: not a number") from exc

    grid = TimeGrid(float(t[0]), float(dt), len(t))
    signals = [Signal(grid, densities[:, j]) for j in range(len(roles))]
    t_s = meta_float("t_s") if "t_s" in meta else detect_start(signals)
    outputs = [s for s, r in zip(signals, roles) if r.direction is Direction.OUTPUT]
    t_f = meta_float("t_f") if "t_f" in meta else detect_completion(outputs)

    needed = t_f + unit_interval
    if grid.t_end < needed - TIME_TOL * dt:
        padded = TimeGrid.spanning(grid.t_start, needed, dt)
        pad = padded.n_samples - grid.n_samples
        signals = [Signal(padded, np.concatenate((s.density, np.zeros(pad)))) for s in signals]

    rates = None
    rate_keys = [k for k in meta if k.startswith("rate:")]
    if rate_keys:
        inputs, outputs_ = {}, {}
        for key in rate_keys:
            _, _, label = key.partition(":")
            direction, _, pid = label.partition(":")
            if direction not in ("in", "out") or not pid:
                raise ValidationError(f"metadata {key}: expected rate:in:<id> or rate:out:<id>")
            value = meta_float(key)
            if value < 0:
                raise ValidationError(f"metadata {key}: must be >= 0")
            (inputs if direction == "in" else outputs_)[pid] = value
        rates = CostRates(inputs, outputs_)

    channels = tuple(Channel(r, s) for r, s in zip(roles, signals))
    try:
        reg = RegistrationModel(channels, t_s, t_f)
    except OpdeployError as exc:
        raise ValidationError(f"signal log: {exc}") from exc
    return SignalLog(reg, rates)


def read_signal_log(path: str | os.PathLike, unit_interval: float = 1.0) -> SignalLog:
    return parse_signal_log(Path(path).read_text(), unit_interval)


def merge_costs(base: CostRates | None, override: CostRates | None) -> CostRates:
    """Rates from ``override`` win over ``base``."""
    inputs = dict(base.input_rates) if base else {}
    outputs = dict(base.output_rates) if base else {}
    if override:
        inputs.update(override.input_rates)
        outputs.update(override.output_rates)
    return CostRates(inputs, outputs)


# -- reports -------------------------------------------------------------------


def summary_doc(summary, **extra) -> dict:
    doc = dict(extra)
    doc["theta"] = {"PE": fmt(summary.PE), "RE": fmt(summary.RE), "Top": fmt(summary.Top)}
    doc["R"] = fmt(summary.R)
    doc["F"] = fmt(summary.F)
    doc["unit_interval"] = fmt(summary.unit_interval)
    return doc


def format_table(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    cells = [[str(h) for h in headers]]
    for row in rows:
        cells.append([fmt_str(v) if isinstance(v, float) else ("" if v is None else str(v)) for v in row])
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def format_series(headers: Sequence[str], columns: Sequence[Sequence[float]]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(headers)
    for row in zip(*columns):
        writer.writerow([fmt_str(float(v)) for v in row])
    return out.getvalue()


def deployed_series(dep: DeployedModel) -> str:
    return format_series(
        ["t", "ire", "ipe", "ice", "ibe", "ide"],
        [dep.grid.times, dep.ire.values, dep.ipe.values, dep.ice.values, dep.ibe.values, dep.ide.values],
    )


def sibling(path: str | os.PathLike, tag: str, suffix: str = ".csv") -> Path:
    """``report.json`` -> ``report.<tag>.csv`` next to it."""
    path = Path(path)
    return path.with_name(f"{path.stem}.{tag}{suffix}")
