"""Command-line entry point.

Exit status: 0 success, 1 I/O error, 2 validation error, 3 a channel has no
cost rate.
"""
from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .cli_io import (
    ValidationError,
    atomic_write_text,
    deployed_series,
    dump_json,
    fmt,
    format_series,
    format_signal_log,
    format_table,
    load_run_config,
    merge_costs,
    parse_costs,
    read_json,
    read_signal_log,
    sibling,
    summary_doc,
)
from .errors import ConfigurationError, OpdeployError
from .heating_plant import ControlSetting, integrated_quantities, run_operation
from .sweep_optimizer import Criterion, evaluate, refine, select_optimal, sweep, u_grid

log = logging.getLogger("opdeploy")

EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_COVERAGE = 3

RECORD_FIELDS = ("u_p", "RQ_w", "RQ_p", "RQ_m", "PQ_w", "RE", "PE", "Top", "R", "F")


def _summary_table(doc: dict) -> str:
    theta = doc["theta"]
    rows = [
        ("PE", theta["PE"]),
        ("RE", theta["RE"]),
        ("Top", theta["Top"]),
        ("R", doc["R"]),
        ("F", doc["F"]),
        ("unit_interval", doc["unit_interval"]),
    ]
    return format_table(["field", "value"], rows)


def _write_report(path, doc: dict, table: str, fmt_name: str) -> None:
    atomic_write_text(path, dump_json(doc) if fmt_name == "structured" else table)


def cmd_simulate(args) -> int:
    cfg = load_run_config(args.config)
    try:
        setting = ControlSetting(args.u_p)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    reg = run_operation(cfg.plant, setting, tail=cfg.f_unit_interval)
    ev = evaluate(reg, cfg.costs, cfg.f_unit_interval)
    atomic_write_text(args.out, format_signal_log(reg, cfg.costs))

    quantities = {k: fmt(v) for k, v in integrated_quantities(reg).items()}
    doc = summary_doc(
        ev.summary,
        command="simulate",
        u_p=fmt(args.u_p),
        t_s=fmt(reg.t_s),
        t_f=fmt(reg.t_f),
        quantities=quantities,
    )
    table = _summary_table(doc)
    report = args.report or sibling(args.out, "report", ".json" if args.format == "structured" else ".txt")
    _write_report(report, doc, table, args.format)
    sys.stdout.write(table)
    return 0


def cmd_sweep(args) -> int:
    cfg = load_run_config(args.config)
    if cfg.sweep is None:
        raise ValidationError("config: sweep block is required for the sweep command")
    spec = cfg.sweep
    unit = cfg.f_unit_interval
    records = sweep(cfg.plant, cfg.costs, u_grid(spec.u_from, spec.u_to, spec.u_step), unit)
    if args.refine:
        records = refine(cfg.plant, cfg.costs, records, spec.u_step, Criterion.MAX_F, unit_interval=unit)
    good = [r for r in records if r.ok]
    optima = {c.value: select_optimal(good, c).u_p for c in Criterion}

    doc = {
        "command": "sweep",
        "unit_interval": fmt(unit),
        "optima": {k: fmt(v) for k, v in optima.items()},
        "records": [
            {**{f: fmt(getattr(r, f)) for f in RECORD_FIELDS}, "error": r.error} for r in records
        ],
    }
    rows = [[getattr(r, f) for f in RECORD_FIELDS] + [r.error] for r in records]
    table = format_table(list(RECORD_FIELDS) + ["error"], rows)
    _write_report(args.report, doc, table, args.format)

    u = [r.u_p for r in records]
    for quantity in ("RQ_w", "RQ_p", "RQ_m", "PQ_w"):
        series = format_series(["u_p", quantity], [u, [getattr(r, quantity) for r in records]])
        atomic_write_text(sibling(args.report, quantity), series)
    theta = format_series(
        ["u_p", "RE", "PE", "Top"],
        [u, [r.RE for r in records], [r.PE for r in records], [r.Top for r in records]],
    )
    atomic_write_text(sibling(args.report, "theta"), theta)

    sys.stdout.write(table)
    for name, u_best in optima.items():
        sys.stdout.write(f"{name}: u_p = {u_best:g}\n")
    return 0


def cmd_analyze(args) -> int:
    signal_log = read_signal_log(args.signals, args.unit_interval)
    file_costs = parse_costs(read_json(args.costs)) if args.costs else None
    if signal_log.rates is None and file_costs is None:
        raise ValidationError("costs: pass --costs or embed rate metadata in the signal log")
    costs = merge_costs(signal_log.rates, file_costs)
    reg = signal_log.registration
    ev = evaluate(reg, costs, args.unit_interval)

    doc = summary_doc(
        ev.summary,
        command="analyze",
        t_s=fmt(reg.t_s),
        t_f=fmt(reg.t_f),
        quantities={c.role.label: fmt(c.signal.integral(reg.t_s, reg.t_f)) for c in reg.channels},
    )
    table = _summary_table(doc)
    _write_report(args.report, doc, table, args.format)
    atomic_write_text(sibling(args.report, "deployed"), deployed_series(ev.deployed))
    sys.stdout.write(table)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opdeploy", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate one batch and write its signal log")
    p.add_argument("--config", required=True)
    p.add_argument("--u-p", dest="u_p", type=float, required=True, help="heater power, percent of nominal")
    p.add_argument("--out", required=True, help="signal log (CSV) to write")
    p.add_argument("--report", help="summary report path (default: next to --out)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="sweep u_p and select the optimal operation")
    p.add_argument("--config", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--refine", action="store_true", help="halve the step around the max-F setting, 3 rounds")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("analyze", help="analyze a logged operation")
    p.add_argument("--signals", required=True)
    p.add_argument("--costs", help="JSON cost rates; overrides rates embedded in the log")
    p.add_argument("--report", required=True)
    p.add_argument("--unit-interval", dest="unit_interval", type=float, default=1.0)
    p.set_defaults(func=cmd_analyze)

    for p in sub.choices.values():
        p.add_argument("--format", choices=("table", "structured"), default="structured")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COVERAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (OpdeployError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
