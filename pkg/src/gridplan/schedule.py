"""Turning a solve into a physical schedule, costing it, and checking it.

:func:`verify` re-derives every model constraint from the schedule arrays
alone.  It deliberately shares no code with the LP row assembly so that a
bug in either shows up as a disagreement.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass

import numpy as np

from .config import HORIZON, ModelConfig
from .dr_events import DrEvent
from .ingest import DayProfile
from .lp_core.model import VariableTable, shift_benefit
from .solver import SolveResult

VERIFY_TOL = 1e-6
SHIFT_TOL = 1e-9


class ScheduleError(RuntimeError):
    """No schedule can be extracted (e.g. the solve was infeasible)."""


@dataclass(frozen=True, eq=False)
class Schedule:
    grid: np.ndarray  # (L, T) MW
    solar: np.ndarray  # (S, L, T)
    charge: np.ndarray  # (B, L, T)
    discharge: np.ndarray  # (B, L, T)
    soc: np.ndarray  # (B, T) MWh
    reduce: np.ndarray  # (L, T)
    shift: np.ndarray  # (L, T, T) from t1 to t2
    shift_in: np.ndarray  # (L, T) delivered after losses
    served: np.ndarray  # (L, T)
    slack_pos: np.ndarray  # (L, T)
    slack_neg: np.ndarray
    peak: float  # billed peak, MW
    events: tuple[DrEvent, ...]
    p_peak_orig: float
    status: str
    warnings: tuple[str, ...] = ()

    @property
    def import_total(self) -> np.ndarray:
        return self.grid.sum(axis=0)

    def shift_flows(self) -> list[tuple[int, int, int, float]]:
        idx = np.argwhere(self.shift > 0.0)
        return [(int(l), int(a), int(b), float(self.shift[l, a, b])) for l, a, b in idx]


def apply_slack_status(result: SolveResult, vt: VariableTable, tol: float) -> SolveResult:
    """Downgrade an optimal result that leans on balance slacks."""
    if result.status != "optimal" or result.x is None:
        return result
    cols = [r.col for r in vt.refs if r.family in ("slack_pos", "slack_neg")]
    worst = float(np.max(result.x[cols], initial=0.0))
    if worst > tol:
        return result.with_status("soft-infeasible", f"balance slack up to {worst:.3g} MW")
    return result


def extract(result: SolveResult, vt: VariableTable, profile: DayProfile, cfg: ModelConfig,
            events: list[DrEvent] | tuple[DrEvent, ...] = ()) -> Schedule:
    if result.x is None or result.status not in ("optimal", "soft-infeasible", "time-limit"):
        raise ScheduleError(f"no schedule: solve status {result.status} ({result.message})")
    x = result.x
    L, S, B = vt.n_loads, vt.n_solar, vt.n_batteries
    grid = np.zeros((L, HORIZON))
    solar = np.zeros((S, L, HORIZON))
    charge = np.zeros((B, L, HORIZON))
    discharge = np.zeros((B, L, HORIZON))
    soc = np.zeros((B, HORIZON))
    reduce = np.zeros((L, HORIZON))
    shift = np.zeros((L, HORIZON, HORIZON))
    slack_pos = np.zeros((L, HORIZON))
    slack_neg = np.zeros((L, HORIZON))
    peak = 0.0
    targets = {"grid": grid, "solar_alloc": solar, "charge": charge, "discharge": discharge,
               "soc": soc, "reduce": reduce, "shift": shift, "slack_pos": slack_pos,
               "slack_neg": slack_neg}
    for ref in vt.refs:
        v = float(x[ref.col])
        if abs(v) < 1e-12:
            v = 0.0
        arr = targets.get(ref.family)
        if arr is not None:
            arr[ref.index] = v
        elif ref.family == "peak":
            peak = v

    demand = profile.demand
    shift_in = cfg.eta_shift * shift.sum(axis=1)
    served = demand - reduce - shift.sum(axis=2) + shift_in
    warnings = []
    for l, t in np.argwhere((slack_pos > cfg.solver.feasibility_tol)
                            | (slack_neg > cfg.solver.feasibility_tol)):
        warnings.append(f"balance slack at load {profile.loads[l].id} hour {t}: "
                        f"+{slack_pos[l, t]:.6g} / -{slack_neg[l, t]:.6g} MW")
    return Schedule(grid, solar, charge, discharge, soc, reduce, shift, shift_in, served,
                    slack_pos, slack_neg, peak, tuple(events), vt.p_peak_orig,
                    result.status, tuple(warnings))


# ------------------------------------------------------------------ costs

@dataclass(frozen=True)
class CostReport:
    j_energy: float
    j_peak: float
    j_dr: float
    j_shift: float
    j_penalty: float
    j_slack: float
    original_energy_cost: float
    original_peak_charge: float
    original_total_cost: float
    optimized_energy_cost: float
    optimized_peak_charge: float
    optimized_total_cost: float
    peak_before_mw: float
    peak_after_mw: float
    max_import_mw: float
    served_energy_before_mwh: float
    served_energy_after_mwh: float
    grid_energy_after_mwh: float
    reduced_energy_mwh: float
    shifted_energy_mwh: float
    peak_reduction_pct: float
    import_peak_reduction_pct: float
    energy_cost_savings_pct: float
    peak_charge_savings_pct: float
    total_cost_savings_pct: float
    load_reduction_pct: float
    grid_import_reduction_pct: float

    @property
    def objective(self) -> float:
        """Model objective rebuilt from the schedule, penalties included."""
        return self.j_energy + self.j_peak - self.j_dr - self.j_shift + self.j_penalty + self.j_slack

    def to_json(self) -> dict:
        return asdict(self)


def _pct(before: float, after: float) -> float:
    return 100.0 * (before - after) / before if before else 0.0


def billed_peak(import_total: np.ndarray, p_peak_orig: float, cfg: ModelConfig) -> float:
    floor = cfg.delta_peak * p_peak_orig if cfg.demand_ratchet else 0.0
    return max(float(import_total.max()), floor)


def ramp_penalty_base(import_total: np.ndarray, demand_hour0: float) -> np.ndarray:
    prev = np.concatenate([[demand_hour0], import_total[:-1]])
    return np.abs(import_total - prev)


def cost_report(schedule: Schedule, profile: DayProfile, cfg: ModelConfig) -> CostReport:
    price = profile.prices
    demand = profile.demand
    imp = schedule.import_total
    peak_hours = list(cfg.periods.peak)

    j_energy = float(price @ imp)
    billed = billed_peak(imp, schedule.p_peak_orig, cfg)
    j_peak = cfg.c_p * billed
    j_dr = cfg.c_dr * float(schedule.reduce.sum())
    j_shift = 0.0
    for _, t1, t2, v in schedule.shift_flows():
        j_shift += shift_benefit(t1, t2, cfg) * v
    j_penalty = (cfg.lambda_p * float(imp[peak_hours].sum())
                 + cfg.lambda_r * float(ramp_penalty_base(imp, float(demand[:, 0].sum())).sum()))
    j_slack = cfg.slack_penalty * float(schedule.slack_pos.sum() + schedule.slack_neg.sum())

    total_demand = demand.sum(axis=0)
    p_orig = float(total_demand.max())
    orig_energy = float(price @ total_demand)
    orig_peak = cfg.c_p * p_orig
    opt_total = j_energy + j_peak - j_dr - j_shift
    served_before = float(demand.sum())  # same summation order as served_after
    served_after = float(schedule.served.sum())
    grid_after = float(imp.sum())
    return CostReport(
        j_energy=j_energy,
        j_peak=j_peak,
        j_dr=j_dr,
        j_shift=j_shift,
        j_penalty=j_penalty,
        j_slack=j_slack,
        original_energy_cost=orig_energy,
        original_peak_charge=orig_peak,
        original_total_cost=orig_energy + orig_peak,
        optimized_energy_cost=j_energy,
        optimized_peak_charge=j_peak,
        optimized_total_cost=opt_total,
        peak_before_mw=p_orig,
        peak_after_mw=billed,
        max_import_mw=float(imp.max()),
        served_energy_before_mwh=served_before,
        served_energy_after_mwh=served_after,
        grid_energy_after_mwh=grid_after,
        reduced_energy_mwh=float(schedule.reduce.sum()),
        shifted_energy_mwh=float(schedule.shift.sum()),
        peak_reduction_pct=_pct(p_orig, billed),
        import_peak_reduction_pct=_pct(p_orig, float(imp.max())),
        energy_cost_savings_pct=_pct(orig_energy, j_energy),
        peak_charge_savings_pct=_pct(orig_peak, j_peak),
        total_cost_savings_pct=_pct(orig_energy + orig_peak, opt_total),
        load_reduction_pct=_pct(served_before, served_after),
        grid_import_reduction_pct=_pct(served_before, grid_after),
    )


# ------------------------------------------------------------ verification

def verify(schedule: Schedule, profile: DayProfile, cfg: ModelConfig,
           tol: float = VERIFY_TOL) -> list[str]:
    """Check the realised schedule against every model constraint."""
    out: list[str] = []

    def flag(family: str, where: str, margin: float) -> None:
        out.append(f"{family} violated at ({where}): margin {margin:.3g}")

    sc = schedule
    demand = profile.demand
    avail = profile.avail
    L = demand.shape[0]
    ev_hours = {h for ev in sc.events for h in range(ev.start_hour, ev.end_hour + 1)}
    peak = set(cfg.periods.peak)

    for name, arr in (("grid", sc.grid), ("solar", sc.solar), ("charge", sc.charge),
                      ("discharge", sc.discharge), ("reduce", sc.reduce), ("shift", sc.shift)):
        if arr.size and arr.min() < -tol:
            idx = tuple(int(i) for i in np.unravel_index(np.argmin(arr), arr.shape))
            flag("nonnegativity", f"{name}{list(idx)}", float(-arr.min()))

    # which loads may curtail / shift, and where to
    for l in range(L):
        kind = profile.loads[l].kind
        for t in range(HORIZON):
            if sc.reduce[l, t] > tol and (kind != "curtailable" or t not in ev_hours):
                flag("reduction_scope", f"l={l}, t={t}", float(sc.reduce[l, t]))
    for l, t1, t2, v in sc.shift_flows():
        if v <= tol:
            continue
        ok = (profile.loads[l].kind == "flexible" and t1 in ev_hours and t2 != t1
              and abs(t2 - t1) <= cfg.tau_max and t2 not in peak)
        if not ok:
            flag("shift_scope", f"l={l}, t1={t1}, t2={t2}", v)

    out_flow = sc.shift.sum(axis=2)
    in_flow = sc.shift.sum(axis=1)
    arrivals = cfg.eta_shift * in_flow
    for l in range(L):
        delivered = float(sc.shift_in[l].sum())
        sent = float(out_flow[l].sum())
        if abs(delivered - cfg.eta_shift * sent) > SHIFT_TOL:
            flag("shift_conservation", f"l={l}", abs(delivered - cfg.eta_shift * sent))

    # power balance with DR-adjusted demand
    for l in range(L):
        for t in range(HORIZON):
            supply = (sc.grid[l, t] + sc.solar[:, l, t].sum()
                      + sc.discharge[:, l, t].sum() - sc.charge[:, l, t].sum())
            need = demand[l, t] - sc.reduce[l, t] - out_flow[l, t] + arrivals[l, t]
            if abs(supply - need) > tol:
                flag("balance", f"l={l}, t={t}", abs(supply - need))

    for s in range(avail.shape[0]):
        for t in range(HORIZON):
            used = sc.solar[s, :, t].sum()
            if used > avail[s, t] + tol:
                flag("solar_capacity", f"s={s}, t={t}", used - avail[s, t])

    for b, bat in enumerate(cfg.batteries):
        level = bat.soc_init * bat.capacity
        lo, hi = bat.soc_min * bat.capacity, bat.soc_max * bat.capacity
        for t in range(HORIZON):
            ch = sc.charge[b, :, t].sum()
            dis = sc.discharge[b, :, t].sum()
            level = level + bat.eta_b * ch - dis / bat.eta_b
            if abs(sc.soc[b, t] - level) > tol:
                flag("soc_dynamics", f"b={b}, t={t}", abs(sc.soc[b, t] - level))
            level = sc.soc[b, t]
            if sc.soc[b, t] < lo - tol or sc.soc[b, t] > hi + tol:
                flag("soc_bounds", f"b={b}, t={t}", max(lo - sc.soc[b, t], sc.soc[b, t] - hi))
            if ch > bat.p_max + tol or sc.charge[b, :, t].max(initial=0.0) > bat.p_max + tol:
                flag("charge_rating", f"b={b}, t={t}", ch - bat.p_max)
            if dis > bat.p_max + tol or sc.discharge[b, :, t].max(initial=0.0) > bat.p_max + tol:
                flag("discharge_rating", f"b={b}, t={t}", dis - bat.p_max)
            if t in peak and ch > cfg.eps_peak * bat.p_max + tol:
                flag("peak_charge_cap", f"b={b}, t={t}", ch - cfg.eps_peak * bat.p_max)
        if cfg.terminal_soc and sc.soc[b, -1] < bat.soc_init * bat.capacity - tol:
            flag("terminal_soc", f"b={b}", bat.soc_init * bat.capacity - sc.soc[b, -1])

    for l in range(L):
        for t in range(HORIZON):
            cap = cfg.alpha_max * demand[l, t]
            if sc.reduce[l, t] > cap + tol:
                flag("reduction_cap", f"l={l}, t={t}", sc.reduce[l, t] - cap)
            cap = cfg.beta_max * demand[l, t]
            if out_flow[l, t] > cap + tol:
                flag("shift_cap", f"l={l}, t={t}", out_flow[l, t] - cap)

    imp = sc.grid.sum(axis=0)
    total_demand = demand.sum(axis=0)
    p_orig = float(total_demand.max())
    ramp_cap = cfg.gamma_ramp * p_orig
    prev = float(total_demand[0])
    for t in range(HORIZON):
        if imp[t] > sc.peak + tol:
            flag("peak_definition", f"t={t}", imp[t] - sc.peak)
        step = abs(imp[t] - prev)
        if step > ramp_cap + tol:
            flag("ramp", f"t={t}", step - ramp_cap)
        prev = imp[t]
        if t in peak and imp[t] > cfg.delta_peak * p_orig + tol:
            flag("peak_period_cap", f"t={t}", imp[t] - cfg.delta_peak * p_orig)
        if imp[t] < cfg.phi_min * total_demand[t] - tol:
            flag("min_service", f"t={t}", cfg.phi_min * total_demand[t] - imp[t])
    return out


# ------------------------------------------------------------------ export

SCHEDULE_CSV_COLUMNS = ("series", "entity", "hour", "value")


def _clean(v: float) -> float:
    v = float(v)
    return 0.0 if abs(v) < 1e-12 else v


def schedule_rows(schedule: Schedule, profile: DayProfile) -> list[tuple[str, str, int, float]]:
    """Tidy rows ``(series, entity, hour, value)`` in a fixed order."""
    sc = schedule
    load_ids = [ld.id for ld in profile.loads]
    unit_ids = [su.id for su in profile.solar]
    rows: list[tuple[str, str, int, float]] = []

    def per_load(series: str, arr: np.ndarray) -> None:
        for l, lid in enumerate(load_ids):
            rows.extend((series, lid, t, _clean(arr[l, t])) for t in range(HORIZON))

    rows.extend(("price", "", t, _clean(profile.price[t])) for t in range(HORIZON))
    per_load("demand", profile.demand)
    per_load("grid", sc.grid)
    for s, sid in enumerate(unit_ids):
        for l, lid in enumerate(load_ids):
            rows.extend(("solar", f"{sid}>{lid}", t, _clean(sc.solar[s, l, t]))
                        for t in range(HORIZON))
    for b in range(sc.soc.shape[0]):
        for l, lid in enumerate(load_ids):
            rows.extend(("charge", f"bess{b}>{lid}", t, _clean(sc.charge[b, l, t]))
                        for t in range(HORIZON))
            rows.extend(("discharge", f"bess{b}>{lid}", t, _clean(sc.discharge[b, l, t]))
                        for t in range(HORIZON))
        rows.extend(("soc", f"bess{b}", t, _clean(sc.soc[b, t])) for t in range(HORIZON))
    per_load("reduce", sc.reduce)
    per_load("shift_out", sc.shift.sum(axis=2))
    per_load("shift_in", sc.shift_in)
    per_load("served", sc.served)
    per_load("slack", sc.slack_pos - sc.slack_neg)
    rows.extend(("import_total", "", t, _clean(v)) for t, v in enumerate(sc.import_total))
    return rows


def schedule_csv(schedule: Schedule, profile: DayProfile) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCHEDULE_CSV_COLUMNS)
    for series, entity, hour, value in schedule_rows(schedule, profile):
        w.writerow([series, entity, hour, repr(value)])
    return buf.getvalue()


def schedule_json(schedule: Schedule, profile: DayProfile) -> dict:
    sc = schedule

    def lst(a: np.ndarray) -> list:
        return np.vectorize(_clean)(a).tolist() if a.size else a.tolist()

    return {
        "status": sc.status,
        "loads": [ld.id for ld in profile.loads],
        "solar_units": [su.id for su in profile.solar],
        "grid": lst(sc.grid),
        "solar": lst(sc.solar),
        "charge": lst(sc.charge),
        "discharge": lst(sc.discharge),
        "soc": lst(sc.soc),
        "reduce": lst(sc.reduce),
        "shifts": [{"load": profile.loads[l].id, "from": a, "to": b, "mw": v}
                   for l, a, b, v in sc.shift_flows()],
        "served": lst(sc.served),
        "billed_peak_mw": sc.peak,
        "warnings": list(sc.warnings),
    }


def _finite(d: dict) -> dict:
    return {k: (v if not isinstance(v, float) or math.isfinite(v) else None) for k, v in d.items()}


def report_json(report: CostReport) -> dict:
    return _finite(report.to_json())
