"""Variables, objective and constraints of the day-ahead DR scheduling model.

Index conventions: ``l`` load, ``s`` solar unit, ``b`` battery, ``t`` hour;
shifts move flexible demand from an event hour ``t1`` to a target ``t2``.
Grid import terms in the ramp, peak and minimum-service rows always use the
aggregate over loads.

Shift losses are charged in the balance rows: a shift of ``x`` MW out of
``t1`` delivers ``eta_shift * x`` MW at ``t2``.  No separate conservation
row is emitted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..config import HORIZON, ModelConfig
from ..dr_events import DrEvent, event_hours
from ..ingest import DayProfile
from .program import LinearProgram, LPBuilder, ModelError

FAMILIES = (
    "grid", "solar_alloc", "charge", "discharge", "soc", "reduce", "shift",
    "peak", "ramp_aux_pos", "ramp_aux_neg", "slack_pos", "slack_neg",
)

# Row label -> what the row family enforces.
ROW_FAMILIES = {
    "balance": "per-load power balance with shift arrivals scaled by eta_shift",
    "solar_capacity": "solar allocation within availability",
    "soc_dynamics": "battery state-of-charge recursion",
    "charge_rating": "battery charge power rating",
    "discharge_rating": "battery discharge power rating",
    "peak_charge_cap": "derated charging during peak period",
    "reduction_cap": "curtailment within alpha_max of demand",
    "shift_cap": "shift-out within beta_max of demand",
    "peak_definition": "peak variable bounds every hour's import",
    "ramp": "hour-to-hour import change split into ramp auxiliaries",
    "peak_period_cap": "import cap during peak period",
    "min_service": "minimum grid service fraction",
}

_SHORT = {
    "grid": "G", "solar_alloc": "S", "charge": "C", "discharge": "D", "soc": "E",
    "reduce": "R", "shift": "H", "peak": "PK", "ramp_aux_pos": "RP",
    "ramp_aux_neg": "RN", "slack_pos": "SP", "slack_neg": "SN",
}


@dataclass(frozen=True)
class VarRef:
    family: str
    index: tuple[int, ...]
    col: int


@dataclass(frozen=True)
class Row:
    name: str
    label: str
    terms: list[tuple[int, float]]
    sense: str
    rhs: float


@dataclass
class VariableTable:
    n_loads: int
    n_solar: int
    n_batteries: int
    event_hours: tuple[int, ...]
    shift_index: tuple[tuple[int, int, int], ...]
    p_peak_orig: float
    refs: list[VarRef] = field(default_factory=list)
    names: list[str] = field(default_factory=list)
    lb: list[float] = field(default_factory=list)
    ub: list[float] = field(default_factory=list)
    _cols: dict[tuple[str, tuple[int, ...]], int] = field(default_factory=dict)

    def add(self, family: str, index: tuple[int, ...], lb: float, ub: float) -> int:
        key = (family, index)
        if key in self._cols:
            raise ModelError(f"duplicate variable {family}{list(index)}")
        col = len(self.refs)
        self.refs.append(VarRef(family, index, col))
        self.names.append(_SHORT[family] + "_".join(map(str, index)))
        self.lb.append(lb)
        self.ub.append(ub)
        self._cols[key] = col
        return col

    def col(self, family: str, *index: int) -> int:
        return self._cols[(family, tuple(index))]

    def get(self, family: str, *index: int) -> int | None:
        return self._cols.get((family, tuple(index)))

    def family(self, family: str) -> list[VarRef]:
        return [r for r in self.refs if r.family == family]

    def count(self, family: str) -> int:
        return sum(1 for r in self.refs if r.family == family)

    @property
    def n(self) -> int:
        return len(self.refs)


def shift_targets(t1: int, cfg: ModelConfig) -> list[int]:
    """Admissible target hours for moving load out of hour ``t1``."""
    peak = set(cfg.periods.peak)
    return [t2 for t2 in range(max(0, t1 - cfg.tau_max), min(HORIZON, t1 + cfg.tau_max + 1))
            if t2 != t1 and t2 not in peak]


def shift_benefit(t1: int, t2: int, cfg: ModelConfig) -> float:
    """Incentive rate for moving load from ``t1`` to ``t2`` ($/MWh)."""
    src, dst = cfg.periods.kind(t1), cfg.periods.kind(t2)
    if src == "peak" and dst == "off_peak":
        return cfg.b_po
    if src == "peak" and dst == "shoulder":
        return cfg.b_ps
    if src == "shoulder" and dst == "off_peak":
        return cfg.b_so
    return 0.0


def build_variables(profile: DayProfile, events: list[DrEvent], cfg: ModelConfig) -> VariableTable:
    L, S, B = len(profile.loads), len(profile.solar), len(cfg.batteries)
    ev_hours = tuple(event_hours(events))
    if len(set(ev_hours)) != len(ev_hours):
        raise ModelError("DR events overlap")
    flexible = profile.loads_of("flexible")
    curtailable = profile.loads_of("curtailable")
    shifts = tuple((l, t1, t2) for l in flexible for t1 in ev_hours
                   for t2 in shift_targets(t1, cfg))
    p_orig = float(profile.demand.sum(axis=0).max())
    vt = VariableTable(L, S, B, ev_hours, shifts, p_orig)
    inf = math.inf

    for l in range(L):
        for t in range(HORIZON):
            vt.add("grid", (l, t), 0.0, inf)
    for s in range(S):
        for l in range(L):
            for t in range(HORIZON):
                vt.add("solar_alloc", (s, l, t), 0.0, inf)
    for b, bat in enumerate(cfg.batteries):
        for fam in ("charge", "discharge"):
            for l in range(L):
                for t in range(HORIZON):
                    vt.add(fam, (b, l, t), 0.0, bat.p_max)
    for b, bat in enumerate(cfg.batteries):
        for t in range(HORIZON):
            lo = bat.soc_min * bat.capacity
            if t == HORIZON - 1 and cfg.terminal_soc:
                lo = max(lo, bat.soc_init * bat.capacity)
            vt.add("soc", (b, t), lo, bat.soc_max * bat.capacity)
    for l in curtailable:
        for t in ev_hours:
            vt.add("reduce", (l, t), 0.0, inf)
    for idx in shifts:
        vt.add("shift", idx, 0.0, inf)
    floor = cfg.delta_peak * p_orig if cfg.demand_ratchet else 0.0
    vt.add("peak", (), floor, inf)
    ramp_cap = cfg.gamma_ramp * p_orig
    for t in range(HORIZON):
        vt.add("ramp_aux_pos", (t,), 0.0, ramp_cap)
        vt.add("ramp_aux_neg", (t,), 0.0, ramp_cap)
    for l in range(L):
        for t in range(HORIZON):
            vt.add("slack_pos", (l, t), 0.0, inf)
            vt.add("slack_neg", (l, t), 0.0, inf)
    return vt


def build_objective(vt: VariableTable, profile: DayProfile, events: list[DrEvent],
                    cfg: ModelConfig) -> np.ndarray:
    c = np.zeros(vt.n)
    price = profile.prices
    peak = set(cfg.periods.peak)
    for r in vt.refs:
        fam = r.family
        if fam == "grid":
            t = r.index[1]
            c[r.col] = price[t] + (cfg.lambda_p if t in peak else 0.0)
        elif fam == "peak":
            c[r.col] = cfg.c_p
        elif fam == "reduce":
            c[r.col] = -cfg.c_dr
        elif fam == "shift":
            _, t1, t2 = r.index
            c[r.col] = -shift_benefit(t1, t2, cfg)
        elif fam in ("ramp_aux_pos", "ramp_aux_neg"):
            c[r.col] = cfg.lambda_r
        elif fam in ("slack_pos", "slack_neg"):
            c[r.col] = cfg.slack_penalty
    return c


def _check_scope(vt: VariableTable, profile: DayProfile) -> None:
    ev = set(vt.event_hours)
    for r in vt.refs:
        if r.family == "reduce":
            l, t = r.index
            if profile.loads[l].kind != "curtailable":
                raise ModelError(f"reduce variable on {profile.loads[l].kind} load {l}")
            if t not in ev:
                raise ModelError(f"reduce variable outside DR events at hour {t}")
        elif r.family == "shift":
            l, t1, t2 = r.index
            if profile.loads[l].kind != "flexible":
                raise ModelError(f"shift variable on {profile.loads[l].kind} load {l}")
            if t1 not in ev:
                raise ModelError(f"shift variable leaving non-event hour {t1}")


def build_constraints(vt: VariableTable, profile: DayProfile, events: list[DrEvent],
                      cfg: ModelConfig) -> list[Row]:
    _check_scope(vt, profile)
    L, S, B = vt.n_loads, vt.n_solar, vt.n_batteries
    demand = profile.demand
    avail = profile.avail
    p_orig = vt.p_peak_orig
    peak_hours = set(cfg.periods.peak)
    rows: list[Row] = []

    out_flows: dict[tuple[int, int], list[int]] = {}
    in_flows: dict[tuple[int, int], list[int]] = {}
    for l, t1, t2 in vt.shift_index:
        col = vt.col("shift", l, t1, t2)
        out_flows.setdefault((l, t1), []).append(col)
        in_flows.setdefault((l, t2), []).append(col)

    # balance: supply side = demand after DR actions
    for l in range(L):
        for t in range(HORIZON):
            terms = [(vt.col("grid", l, t), 1.0)]
            terms += [(vt.col("solar_alloc", s, l, t), 1.0) for s in range(S)]
            for b in range(B):
                terms.append((vt.col("discharge", b, l, t), 1.0))
                terms.append((vt.col("charge", b, l, t), -1.0))
            terms.append((vt.col("slack_pos", l, t), 1.0))
            terms.append((vt.col("slack_neg", l, t), -1.0))
            red = vt.get("reduce", l, t)
            if red is not None:
                terms.append((red, 1.0))
            terms += [(c, 1.0) for c in out_flows.get((l, t), [])]
            terms += [(c, -cfg.eta_shift) for c in in_flows.get((l, t), [])]
            rows.append(Row(f"BAL{l}_{t}", "balance", terms, "E", float(demand[l, t])))

    for s in range(S):
        for t in range(HORIZON):
            terms = [(vt.col("solar_alloc", s, l, t), 1.0) for l in range(L)]
            rows.append(Row(f"SOL{s}_{t}", "solar_capacity", terms, "L", float(avail[s, t])))

    for b, bat in enumerate(cfg.batteries):
        for t in range(HORIZON):
            terms = [(vt.col("soc", b, t), 1.0)]
            rhs = 0.0
            if t == 0:
                rhs = bat.soc_init * bat.capacity
            else:
                terms.append((vt.col("soc", b, t - 1), -1.0))
            terms += [(vt.col("charge", b, l, t), -bat.eta_b) for l in range(L)]
            terms += [(vt.col("discharge", b, l, t), 1.0 / bat.eta_b) for l in range(L)]
            rows.append(Row(f"SOC{b}_{t}", "soc_dynamics", terms, "E", rhs))
        for t in range(HORIZON):
            ch = [(vt.col("charge", b, l, t), 1.0) for l in range(L)]
            dis = [(vt.col("discharge", b, l, t), 1.0) for l in range(L)]
            rows.append(Row(f"CHR{b}_{t}", "charge_rating", ch, "L", bat.p_max))
            rows.append(Row(f"DHR{b}_{t}", "discharge_rating", dis, "L", bat.p_max))
            if t in peak_hours:
                rows.append(Row(f"PCC{b}_{t}", "peak_charge_cap", list(ch), "L",
                                cfg.eps_peak * bat.p_max))

    for r in vt.family("reduce"):
        l, t = r.index
        rows.append(Row(f"RED{l}_{t}", "reduction_cap", [(r.col, 1.0)], "L",
                        cfg.alpha_max * float(demand[l, t])))
    for (l, t1), cols in sorted(out_flows.items()):
        rows.append(Row(f"SHF{l}_{t1}", "shift_cap", [(c, 1.0) for c in cols], "L",
                        cfg.beta_max * float(demand[l, t1])))

    peak_col = vt.col("peak")
    for t in range(HORIZON):
        imp = [(vt.col("grid", l, t), 1.0) for l in range(L)]
        rows.append(Row(f"PKD{t}", "peak_definition", imp + [(peak_col, -1.0)], "L", 0.0))
    for t in range(HORIZON):
        terms = [(vt.col("grid", l, t), 1.0) for l in range(L)]
        rhs = 0.0
        if t == 0:
            rhs = float(demand[:, 0].sum())
        else:
            terms += [(vt.col("grid", l, t - 1), -1.0) for l in range(L)]
        terms += [(vt.col("ramp_aux_pos", t), -1.0), (vt.col("ramp_aux_neg", t), 1.0)]
        rows.append(Row(f"RMP{t}", "ramp", terms, "E", rhs))
    for t in sorted(peak_hours):
        imp = [(vt.col("grid", l, t), 1.0) for l in range(L)]
        rows.append(Row(f"PPC{t}", "peak_period_cap", imp, "L", cfg.delta_peak * p_orig))
    for t in range(HORIZON):
        imp = [(vt.col("grid", l, t), 1.0) for l in range(L)]
        rows.append(Row(f"MIN{t}", "min_service", imp, "G",
                        cfg.phi_min * float(demand[:, t].sum())))
    return rows


def build_lp(profile: DayProfile, events: list[DrEvent],
             cfg: ModelConfig) -> tuple[LinearProgram, VariableTable]:
    vt = build_variables(profile, events, cfg)
    cost = build_objective(vt, profile, events, cfg)
    rows = build_constraints(vt, profile, events, cfg)
    builder = LPBuilder(name=(profile.label or "day")[:32].replace(" ", "_"))
    for name, lo, hi, c in zip(vt.names, vt.lb, vt.ub, cost):
        builder.add_var(name, lo, hi, float(c))
    for row in rows:
        builder.add_row(row.name, row.label, row.terms, row.sense, row.rhs)
    return builder.build(), vt
