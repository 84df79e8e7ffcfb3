"""End-to-end runs: one day, or a batch of days compared side by side."""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from .config import ModelConfig, validate
from .dr_events import DrEvent, DrSignal, identify_events, signal
from .ingest import DayProfile, aggregate
from .lp_core import LinearProgram, VariableTable, build_lp
from .schedule import CostReport, Schedule, apply_slack_status, cost_report, extract, verify
from .solver import SolveResult, solve_bnb

log = logging.getLogger(__name__)

TABLE_SCHEMA = "gridplan-scenario-table/1"


class StageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names which one."""

    def __init__(self, stage: str, message: str) -> None:
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


class VerificationError(StageError):
    def __init__(self, violations: list[str]) -> None:
        head = "; ".join(violations[:5])
        more = f" (+{len(violations) - 5} more)" if len(violations) > 5 else ""
        super().__init__("verify", f"optimal schedule fails checks: {head}{more}")
        self.violations = violations


@dataclass(frozen=True, eq=False)
class DayResult:
    profile: DayProfile
    signal: DrSignal
    events: list[DrEvent]
    lp: LinearProgram
    variables: VariableTable
    solve: SolveResult
    schedule: Schedule | None
    report: CostReport | None
    violations: list[str]

    @property
    def status(self) -> str:
        return self.solve.status


def run_day(profile: DayProfile, cfg: ModelConfig) -> DayResult:
    problems = validate(cfg)
    if problems:
        raise StageError("config", "; ".join(problems))
    agg = aggregate(profile)
    try:
        sig = signal(agg, cfg)
        events = identify_events(agg, cfg)
    except ValueError as exc:
        raise StageError("events", str(exc)) from exc
    try:
        lp, vt = build_lp(profile, events, cfg)
    except ValueError as exc:
        raise StageError("model", str(exc)) from exc
    try:
        res = solve_bnb(lp, settings=cfg.solver)
    except RuntimeError as exc:
        raise StageError("solve", str(exc)) from exc
    res = apply_slack_status(res, vt, cfg.solver.feasibility_tol)
    log.info("%s: %s objective=%.6g iterations=%d %.3fs", profile.label, res.status,
             res.objective, res.iterations, res.wall_time)
    if not res.has_solution or res.status in ("infeasible", "unbounded"):
        return DayResult(profile, sig, events, lp, vt, res, None, None, [])
    schedule = extract(res, vt, profile, cfg, events)
    violations = verify(schedule, profile, cfg)
    if res.status == "optimal" and violations:
        raise VerificationError(violations)
    report = cost_report(schedule, profile, cfg)
    return DayResult(profile, sig, events, lp, vt, res, schedule, report, violations)


# ------------------------------------------------------------------ batches

@dataclass(frozen=True)
class ScenarioRow:
    scenario: str
    status: str
    total_mwh: float
    critical_mwh: float
    flexible_mwh: float
    curtailable_mwh: float
    solar_mwh: float
    events: int
    peak_reduction_pct: float
    energy_cost_savings_pct: float
    total_cost_savings_pct: float
    load_reduction_pct: float
    error: str = ""


TABLE_COLUMNS = tuple(f.name for f in fields(ScenarioRow))


def _row(profile: DayProfile, cfg: ModelConfig) -> ScenarioRow:
    agg = aggregate(profile)
    base = dict(
        scenario=profile.label,
        total_mwh=agg.energy,
        critical_mwh=float(agg.by_class["critical"].sum()),
        flexible_mwh=float(agg.by_class["flexible"].sum()),
        curtailable_mwh=float(agg.by_class["curtailable"].sum()),
        solar_mwh=float(profile.avail.sum()),
    )
    nan = math.nan
    try:
        day = run_day(profile, cfg)
    except Exception as exc:  # noqa: BLE001 - batch records failures and continues
        return ScenarioRow(status="failed", events=0, peak_reduction_pct=nan,
                           energy_cost_savings_pct=nan, total_cost_savings_pct=nan,
                           load_reduction_pct=nan, error=str(exc), **base)
    rep = day.report
    if rep is None:
        return ScenarioRow(status=day.status, events=len(day.events), peak_reduction_pct=nan,
                           energy_cost_savings_pct=nan, total_cost_savings_pct=nan,
                           load_reduction_pct=nan, error=day.solve.message, **base)
    return ScenarioRow(
        status=day.status,
        events=len(day.events),
        peak_reduction_pct=rep.peak_reduction_pct,
        energy_cost_savings_pct=rep.energy_cost_savings_pct,
        total_cost_savings_pct=rep.total_cost_savings_pct,
        load_reduction_pct=rep.load_reduction_pct,
        **base,
    )


def run_batch(profiles: list[DayProfile], cfg: ModelConfig, workers: int = 1) -> list[ScenarioRow]:
    """One table row per profile, in input order."""
    if not profiles:
        raise ValueError("no profiles")
    if workers <= 1 or len(profiles) == 1:
        return [_row(p, cfg) for p in profiles]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_row, profiles, [cfg] * len(profiles)))


def _fmt(v: object, digits: int) -> str:
    if isinstance(v, float):
        return "nan" if not np.isfinite(v) else f"{v:.{digits}f}"
    return str(v)


def table_csv(rows: list[ScenarioRow]) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: {TABLE_SCHEMA}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c), 4) for c in TABLE_COLUMNS])
    return buf.getvalue()


def table_text(rows: list[ScenarioRow]) -> str:
    cols = [c for c in TABLE_COLUMNS if c != "error"]
    cells = [[_fmt(getattr(r, c), 2) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for row in cells:
        lines.append("  ".join(v.ljust(w) if i < 2 else v.rjust(w)
                               for i, (v, w) in enumerate(zip(row, widths))))
    for r in rows:
        if r.error:
            lines.append(f"! {r.scenario}: {r.error}")
    return "\n".join(lines) + "\n"
