"""Command-line front end.

Every command writes its results as files under ``--out``; stdout only gets
a short ``key: value`` summary.  Exit codes: 0 ok, 1 bad input or flags,
2 no usable solution, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import traceback
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from . import __version__
from .config import ConfigError, ModelConfig, apply_overrides, default_config, dumps, load, validate
from .dr_events import identify_events
from .ingest import ARCHETYPES, DayProfile, IngestError, aggregate, parse_day, serialize_day, synth_day
from .lp_core import ModelError, build_lp, emit_mps
from .scenarios import StageError, VerificationError, run_batch, run_day, table_csv
from .schedule import report_json, schedule_csv

EXIT_OK, EXIT_DATA, EXIT_SOLVER, EXIT_INTERNAL = 0, 1, 2, 3
CONFIG_ENV = "GRIDPLAN_CONFIG"
NO_SOLUTION = ("infeasible", "unbounded", "soft-infeasible")

log = logging.getLogger("gridplan")


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _Usage(message)


def _config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE",
                   help=f"key = value config file (fallback: ${CONFIG_ENV})")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="K=V",
                   help="override one config key; repeatable")


def _day_flags(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--in", dest="input", metavar="CSV", help="day profile CSV")
    src.add_argument("--archetype", choices=ARCHETYPES, help="use a synthetic day instead")
    p.add_argument("--seed", type=int, default=1, help="seed for --archetype (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gridplan", description="Demand-response day-ahead scheduling.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("optimize", help="schedule one day")
    _day_flags(p)
    _config_flags(p)
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--no-timestamp", action="store_true", help="omit generated_at from report.json")

    p = sub.add_parser("batch", help="schedule several days and tabulate them")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--in", dest="input", metavar="DIR", help="directory of day CSVs")
    src.add_argument("--archetypes", default=",".join(ARCHETYPES),
                     help="comma-separated archetypes (default: all)")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    _config_flags(p)
    p.add_argument("--out", required=True, metavar="DIR")

    p = sub.add_parser("events", help="detect DR events only")
    _day_flags(p)
    _config_flags(p)
    p.add_argument("--out", required=True, metavar="DIR")

    p = sub.add_parser("export-mps", help="write the day's model as fixed-format MPS")
    _day_flags(p)
    _config_flags(p)
    p.add_argument("--out", required=True, metavar="DIR")

    p = sub.add_parser("synth", help="generate a synthetic day profile")
    p.add_argument("--archetype", choices=ARCHETYPES, required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True, metavar="PATH",
                   help="CSV file, or a directory to hold <archetype>-s<seed>.csv")

    p = sub.add_parser("validate-config", help="check a configuration")
    _config_flags(p)
    p.add_argument("--out", metavar="DIR", help="also write the effective config.txt")
    return parser


# ------------------------------------------------------------------ helpers

def _load_config(args: argparse.Namespace) -> ModelConfig:
    path = args.config or os.environ.get(CONFIG_ENV)
    cfg = load(path) if path else default_config()
    pairs = []
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        pairs.append((k.strip(), v.strip()))
    return apply_overrides(cfg, pairs)


def _load_day(args: argparse.Namespace) -> DayProfile:
    if args.archetype:
        return synth_day(args.seed, args.archetype)
    path = Path(args.input)
    return parse_day(path.read_text(encoding="utf-8"), label=path.stem)


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, obj: object) -> None:
    path.write_text(json.dumps(obj, indent=2, allow_nan=False) + "\n", encoding="utf-8")


def _summary(**items: object) -> None:
    for k, v in items.items():
        if isinstance(v, float):
            v = f"{v:.6g}"
        print(f"{k}: {v}")


# ------------------------------------------------------------------ commands

def _cmd_optimize(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    profile = _load_day(args)
    out = _out_dir(args.out)
    day = run_day(profile, cfg)
    res = day.solve
    _write_json(out / "events.json", [ev.to_json() for ev in day.events])

    report: dict = {"scenario": profile.label, "status": res.status}
    report["solver"] = {
        "objective": res.objective if res.has_solution else None,
        "iterations": res.iterations,
        "nodes": res.nodes,
        "gap": res.gap if res.gap == res.gap and abs(res.gap) != float("inf") else None,
        "message": res.message,
    }
    report["events"] = len(day.events)
    if day.report is not None:
        report.update(report_json(day.report))
    if day.schedule is not None:
        report["warnings"] = list(day.schedule.warnings)
        (out / "schedule.csv").write_text(schedule_csv(day.schedule, profile), encoding="utf-8")
    if not args.no_timestamp:
        report["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    _write_json(out / "report.json", report)

    summary: dict = {"scenario": profile.label, "status": res.status, "events": len(day.events)}
    if day.report is not None:
        rep = day.report
        summary.update(objective=res.objective,
                       peak_reduction_pct=round(rep.peak_reduction_pct, 4),
                       energy_cost_savings_pct=round(rep.energy_cost_savings_pct, 4),
                       total_cost_savings_pct=round(rep.total_cost_savings_pct, 4))
    summary["output"] = str(out)
    _summary(**summary)
    if res.status in NO_SOLUTION or day.schedule is None:
        return EXIT_SOLVER
    return EXIT_OK


def _batch_profiles(args: argparse.Namespace) -> list[DayProfile]:
    if args.input:
        folder = Path(args.input)
        if not folder.is_dir():
            raise IngestError(f"{folder}: not a directory")
        files = sorted(folder.glob("*.csv"))
        if not files:
            raise IngestError(f"{folder}: no .csv files")
        return [parse_day(f.read_text(encoding="utf-8"), label=f.stem) for f in files]
    names = [a.strip() for a in args.archetypes.split(",") if a.strip()]
    bad = [a for a in names if a not in ARCHETYPES]
    if bad:
        raise IngestError(f"unknown archetype(s): {', '.join(bad)}")
    return [synth_day(args.seed, a) for a in names]


def _cmd_batch(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    problems = validate(cfg)
    if problems:
        raise ConfigError("; ".join(problems))
    profiles = _batch_profiles(args)
    out = _out_dir(args.out)
    rows = run_batch(profiles, cfg, workers=args.workers)
    (out / "table.csv").write_text(table_csv(rows), encoding="utf-8")
    ok = sum(r.status == "optimal" for r in rows)
    _summary(days=len(rows), optimal=ok, failed=len(rows) - ok, output=str(out))
    for r in rows:
        print(f"{r.scenario}: {r.status}")
    return EXIT_OK if ok == len(rows) else EXIT_SOLVER


def _cmd_events(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    problems = validate(cfg)
    if problems:
        raise ConfigError("; ".join(problems))
    profile = _load_day(args)
    events = identify_events(aggregate(profile), cfg)
    out = _out_dir(args.out)
    _write_json(out / "events.json", [ev.to_json() for ev in events])
    windows = ", ".join(f"{e.start_hour}-{e.end_hour}" for e in events) or "none"
    _summary(scenario=profile.label, events=len(events), windows=windows, output=str(out))
    return EXIT_OK


def _cmd_export_mps(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    problems = validate(cfg)
    if problems:
        raise ConfigError("; ".join(problems))
    profile = _load_day(args)
    events = identify_events(aggregate(profile), cfg)
    lp, _ = build_lp(profile, events, cfg)
    exp = emit_mps(lp)
    out = _out_dir(args.out)
    (out / "model.mps").write_text(exp.text, encoding="utf-8")
    _write_json(out / "model.names.json", exp.name_map())
    _summary(scenario=profile.label, columns=lp.n, rows=lp.m, output=str(out / "model.mps"))
    return EXIT_OK


def _cmd_synth(args: argparse.Namespace) -> int:
    profile = synth_day(args.seed, args.archetype)
    target = Path(args.out)
    if target.suffix.lower() != ".csv":
        target = _out_dir(args.out) / f"{profile.label}.csv"
    else:
        target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(serialize_day(profile), encoding="utf-8")
    _summary(scenario=profile.label, energy_mwh=aggregate(profile).energy, output=str(target))
    return EXIT_OK


def _cmd_validate_config(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    problems = validate(cfg)
    if args.out:
        (_out_dir(args.out) / "config.txt").write_text(dumps(cfg), encoding="utf-8")
    _summary(valid="yes" if not problems else "no", problems=len(problems))
    for msg in problems:
        print(f"problem: {msg}")
    return EXIT_DATA if problems else EXIT_OK


COMMANDS = {
    "optimize": _cmd_optimize,
    "batch": _cmd_batch,
    "events": _cmd_events,
    "export-mps": _cmd_export_mps,
    "synth": _cmd_synth,
    "validate-config": _cmd_validate_config,
}

_DATA_STAGES = ("config", "events", "model")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _Usage:
        return EXIT_DATA
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except VerificationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA if exc.stage in _DATA_STAGES else EXIT_INTERNAL
    except (ConfigError, IngestError, ModelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
