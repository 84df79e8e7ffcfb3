"""Price/load thresholds, the DR score and grouping of candidate hours."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .config import HORIZON, ModelConfig
from .ingest import DayProfile, LoadAggregates


@dataclass(frozen=True)
class DrEvent:
    start_hour: int
    end_hour: int  # inclusive
    avg_price: float
    avg_load: float
    trigger: str  # "price", "load" or "both"

    @property
    def hours(self) -> range:
        return range(self.start_hour, self.end_hour + 1)

    @property
    def duration(self) -> int:
        return self.end_hour - self.start_hour + 1

    def to_json(self) -> dict:
        d = asdict(self)
        return {"start": d["start_hour"], "end": d["end_hour"], "avg_price": d["avg_price"],
                "avg_load": d["avg_load"], "trigger": d["trigger"]}


@dataclass(frozen=True)
class DrSignal:
    pi_th: float
    p_th: float
    score: np.ndarray
    price_hit: np.ndarray
    load_hit: np.ndarray

    @property
    def candidate(self) -> np.ndarray:
        return self.price_hit | self.load_hit


def thresholds(agg: LoadAggregates, cfg: ModelConfig) -> tuple[float, float]:
    pi_th = max(cfg.beta * agg.pi_bar, cfg.pi_base)
    p_th = cfg.gamma * agg.p_peak
    return pi_th, p_th


def score(agg: LoadAggregates, t: int) -> float:
    """Price ratio to the daily mean times load ratio to the daily peak."""
    if agg.pi_bar == 0 or agg.p_peak == 0:
        raise ValueError("undefined score: mean price or peak load is zero")
    return float(agg.price[t] / agg.pi_bar * agg.p_total[t] / agg.p_peak)


def signal(agg: LoadAggregates, cfg: ModelConfig) -> DrSignal:
    pi_th, p_th = thresholds(agg, cfg)
    if agg.pi_bar > 0 and agg.p_peak > 0:
        scores = np.array([score(agg, t) for t in range(HORIZON)])
    else:
        scores = np.zeros(HORIZON)
    return DrSignal(
        pi_th=pi_th,
        p_th=p_th,
        score=np.maximum(scores, 0.0),  # negative prices score as 0
        price_hit=agg.price > pi_th,
        load_hit=agg.p_total > p_th,
    )


def split_run(start: int, length: int, t_min: int, t_max: int) -> list[tuple[int, int]]:
    """Split a run of consecutive hours into chunks with lengths in [t_min, t_max].

    Chunks are cut left to right at ``t_max``.  A final remainder shorter
    than ``t_min`` is merged into the previous chunk when that stays within
    ``t_max``; otherwise the previous chunk gives up hours to it.  If
    neither works the remainder hours are left out.
    """
    if length < t_min:
        return []
    lengths = [t_max] * (length // t_max)
    rem = length % t_max
    if rem:
        lengths.append(rem)
    if lengths[-1] < t_min and len(lengths) > 1:
        short = lengths.pop()
        if lengths[-1] + short <= t_max:
            lengths[-1] += short
        else:
            need = t_min - short
            if lengths[-1] - need >= t_min:
                lengths[-1] -= need
                lengths.append(t_min)
    chunks = []
    pos = start
    for n in lengths:
        chunks.append((pos, pos + n - 1))
        pos += n
    return chunks


def group_hours(candidate: np.ndarray, t_min: int, t_max: int) -> list[tuple[int, int]]:
    chunks: list[tuple[int, int]] = []
    t = 0
    while t < HORIZON:
        if not candidate[t]:
            t += 1
            continue
        start = t
        while t < HORIZON and candidate[t]:
            t += 1
        chunks.extend(split_run(start, t - start, t_min, t_max))
    return chunks


def events_from_signal(agg: LoadAggregates, sig: DrSignal, cfg: ModelConfig) -> list[DrEvent]:
    events = []
    for a, b in group_hours(sig.candidate, cfg.t_min, cfg.t_max):
        hours = slice(a, b + 1)
        price_any = bool(sig.price_hit[hours].any())
        load_any = bool(sig.load_hit[hours].any())
        trigger = "both" if price_any and load_any else ("price" if price_any else "load")
        events.append(DrEvent(
            start_hour=a,
            end_hour=b,
            avg_price=float(agg.price[hours].mean()),
            avg_load=float(agg.p_total[hours].mean()),
            trigger=trigger,
        ))
    return events


def identify_events(agg: LoadAggregates, cfg: ModelConfig) -> list[DrEvent]:
    if not cfg.dr_enabled:
        return []
    return events_from_signal(agg, signal(agg, cfg), cfg)


def event_hours(events: list[DrEvent]) -> list[int]:
    return sorted(h for ev in events for h in ev.hours)


def dr_capacity(profile: DayProfile, cfg: ModelConfig, t: int) -> float:
    """Upper bound on DR power at hour ``t`` (MW): shiftable plus curtailable share."""
    demand = profile.demand
    flex = demand[profile.loads_of("flexible"), t].sum()
    curt = demand[profile.loads_of("curtailable"), t].sum()
    return float(cfg.delta_f * flex + cfg.alpha_max * curt)
