"""Hourly day profiles: CSV parsing/serialisation, aggregation, synthesis.

CSV dialect (UTF-8, comma separated, dot decimal)::

    # date: 2015-09-15
    hour,price,load:h1:critical,load:h2:flexible,solar:pv1
    0,82.5,0.05,0.12,0.0
    ...

The optional ``# date:`` line carries the profile label.  Column roles come
from the header; ``load:<id>:<class>`` with class one of ``critical``,
``flexible``, ``curtailable`` and ``solar:<id>``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .config import HORIZON

LOAD_CLASSES = ("critical", "flexible", "curtailable")


class IngestError(ValueError):
    """Bad input data; the message carries the row/column location."""


@dataclass(frozen=True)
class Load:
    id: str
    kind: str
    demand: tuple[float, ...]


@dataclass(frozen=True)
class SolarUnit:
    id: str
    avail: tuple[float, ...]


@dataclass(frozen=True)
class DayProfile:
    label: str
    price: tuple[float, ...]
    loads: tuple[Load, ...]
    solar: tuple[SolarUnit, ...] = ()

    def __post_init__(self) -> None:
        if len(self.price) != HORIZON:
            raise IngestError(f"price: expected {HORIZON} values, got {len(self.price)}")
        if not all(math.isfinite(p) for p in self.price):
            raise IngestError("price: non-finite value")
        ids = set()
        for ld in self.loads:
            if ld.kind not in LOAD_CLASSES:
                raise IngestError(f"load {ld.id}: unknown class {ld.kind!r}")
            if len(ld.demand) != HORIZON:
                raise IngestError(f"load {ld.id}: expected {HORIZON} values")
            if any(not math.isfinite(d) or d < 0 for d in ld.demand):
                raise IngestError(f"load {ld.id}: demand must be finite and >= 0")
            if ld.id in ids:
                raise IngestError(f"duplicate load id {ld.id!r}")
            ids.add(ld.id)
        for su in self.solar:
            if len(su.avail) != HORIZON:
                raise IngestError(f"solar {su.id}: expected {HORIZON} values")
            if any(not math.isfinite(a) or a < 0 for a in su.avail):
                raise IngestError(f"solar {su.id}: availability must be finite and >= 0")
        if not any(d > 0 for ld in self.loads for d in ld.demand):
            raise IngestError("total demand is zero in every hour")

    @property
    def prices(self) -> np.ndarray:
        return np.asarray(self.price, dtype=float)

    @property
    def demand(self) -> np.ndarray:
        """Demand matrix, shape (loads, 24), MW."""
        return np.array([ld.demand for ld in self.loads], dtype=float).reshape(-1, HORIZON)

    @property
    def avail(self) -> np.ndarray:
        """Solar availability, shape (units, 24), MW."""
        return np.array([su.avail for su in self.solar], dtype=float).reshape(-1, HORIZON)

    def loads_of(self, kind: str) -> list[int]:
        return [i for i, ld in enumerate(self.loads) if ld.kind == kind]


@dataclass(frozen=True)
class LoadAggregates:
    p_total: np.ndarray
    p_peak: float
    pi_bar: float
    price: np.ndarray
    by_class: dict[str, np.ndarray]

    @property
    def energy(self) -> float:
        return float(self.p_total.sum())


def aggregate(profile: DayProfile) -> LoadAggregates:
    demand = profile.demand
    by_class = {
        kind: demand[profile.loads_of(kind)].sum(axis=0) if profile.loads_of(kind)
        else np.zeros(HORIZON)
        for kind in LOAD_CLASSES
    }
    p_total = demand.sum(axis=0)
    return LoadAggregates(
        p_total=p_total,
        p_peak=float(p_total.max()),
        pi_bar=float(profile.prices.mean()),
        price=profile.prices,
        by_class=by_class,
    )


# ------------------------------------------------------------------- CSV

def _parse_header(header: list[str]) -> tuple[int, int, list[tuple[int, str, str]], list[tuple[int, str]]]:
    hour_col = price_col = -1
    loads: list[tuple[int, str, str]] = []
    solar: list[tuple[int, str]] = []
    seen: set[str] = set()
    for col, raw in enumerate(header, start=1):
        name = raw.strip()
        if name in seen:
            raise IngestError(f"header column {col}: duplicate column {name!r}")
        seen.add(name)
        parts = name.split(":")
        if name == "hour":
            hour_col = col
        elif name == "price":
            price_col = col
        elif parts[0] == "load" and len(parts) == 3 and parts[1]:
            if parts[2] not in LOAD_CLASSES:
                raise IngestError(
                    f"header column {col}: unknown load class {parts[2]!r} in {name!r}")
            loads.append((col, parts[1], parts[2]))
        elif parts[0] == "solar" and len(parts) == 2 and parts[1]:
            solar.append((col, parts[1]))
        else:
            raise IngestError(f"header column {col}: unrecognised column {name!r}")
    if hour_col < 0:
        raise IngestError("header: missing 'hour' column")
    if price_col < 0:
        raise IngestError("header: missing 'price' column")
    return hour_col, price_col, loads, solar


def parse_day(csv_text: str, label: str | None = None) -> DayProfile:
    """Parse one day of hourly data into a :class:`DayProfile`."""
    lines = csv_text.splitlines()
    file_label = ""
    body = []
    for line in lines:
        stripped = line.strip()
        if stripped.startswith("#"):
            comment = stripped[1:].strip()
            if comment.lower().startswith("date:"):
                file_label = comment[5:].strip()
            continue
        if stripped:
            body.append(line)
    if not body:
        raise IngestError("empty file")
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    hour_col, price_col, load_cols, solar_cols = _parse_header(rows[0])
    data = rows[1:]
    if len(data) != HORIZON:
        raise IngestError(f"expected {HORIZON} rows, got {len(data)}")

    width = len(rows[0])
    table: dict[int, list[float]] = {}
    for rowno, row in enumerate(data, start=2):
        if len(row) != width:
            raise IngestError(f"row {rowno}: expected {width} cells, got {len(row)}")
        values = []
        for col, cell in enumerate(row, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise IngestError(f"row {rowno}, column {col}: non-numeric cell {cell!r}") from None
            if not math.isfinite(v):
                raise IngestError(f"row {rowno}, column {col}: non-finite value {cell!r}")
            if col != hour_col and col != price_col and v < 0:
                raise IngestError(f"row {rowno}, column {col}: negative value {cell!r}")
            values.append(v)
        hv = values[hour_col - 1]
        if hv != int(hv) or not 0 <= hv < HORIZON:
            raise IngestError(f"row {rowno}, column {hour_col}: invalid hour {row[hour_col - 1]!r}")
        hour = int(hv)
        if hour in table:
            raise IngestError(f"row {rowno}, column {hour_col}: duplicate hour {hour}")
        table[hour] = values
    # 24 distinct in-range hours means every hour is present.

    ordered = [table[h] for h in range(HORIZON)]
    col_series = lambda c: tuple(r[c - 1] for r in ordered)  # noqa: E731
    profile_label = label if label is not None else file_label
    return DayProfile(
        label=profile_label,
        price=col_series(price_col),
        loads=tuple(Load(i, k, col_series(c)) for c, i, k in load_cols),
        solar=tuple(SolarUnit(i, col_series(c)) for c, i in solar_cols),
    )


def serialize_day(profile: DayProfile) -> str:
    out = io.StringIO()
    if profile.label:
        out.write(f"# date: {profile.label}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["hour", "price"]
                    + [f"load:{ld.id}:{ld.kind}" for ld in profile.loads]
                    + [f"solar:{su.id}" for su in profile.solar])
    for t in range(HORIZON):
        writer.writerow([t, repr(profile.price[t])]
                        + [repr(ld.demand[t]) for ld in profile.loads]
                        + [repr(su.avail[t]) for su in profile.solar])
    return out.getvalue()


# ------------------------------------------------------------- synthesis

ARCHETYPES = (
    "high-price",
    "high-demand",
    "high-solar-low-price",
    "low-solar-high-price",
    "high-variability",
    "weekday",
    "weekend",
)

# Daily energy per class (MWh) and solar energy (MWh), after the
# reference scenario table.  high-variability shares the
# high-solar-low-price data: the reference rows are identical.
_ENERGY = {
    "high-price": (2.70, 6.20, 7.38, 1.67),
    "high-demand": (2.06, 7.69, 9.52, 0.07),
    "high-solar-low-price": (1.19, 2.91, 4.15, 5.05),
    "low-solar-high-price": (3.37, 6.32, 7.64, 0.27),
    "weekday": (2.03, 5.58, 7.12, 0.12),
    "weekend": (2.24, 5.74, 8.20, 0.10),
}
_ALIAS = {"high-variability": "high-solar-low-price"}

_H = np.arange(HORIZON, dtype=float)


def _bump(center: float, width: float) -> np.ndarray:
    return np.exp(-0.5 * ((_H - center) / width) ** 2)


def _shapes(kind: str) -> dict[str, np.ndarray]:
    if kind == "weekend":
        crit = 0.8 + 0.2 * _bump(13, 5)
        flex = 0.35 + 0.6 * _bump(12, 3.5) + 0.7 * _bump(19, 2.5)
        curt = 0.4 + 0.7 * _bump(14, 4) + 0.6 * _bump(19, 2.5)
    elif kind == "high-solar-low-price":
        crit = 0.8 + 0.2 * _bump(13, 5)
        flex = 0.3 + 0.8 * _bump(9, 2) + 0.9 * _bump(18, 2.5)
        curt = 0.35 + 0.6 * _bump(13, 3) + 0.8 * _bump(19, 2.5)
    else:
        crit = 0.8 + 0.2 * _bump(12, 5)
        flex = 0.3 + 0.9 * _bump(8.5, 1.8) + 1.0 * _bump(18, 2.2)
        curt = 0.35 + 0.7 * _bump(9, 2) + 0.9 * _bump(18.5, 2.2)
    return {"critical": crit, "flexible": flex, "curtailable": curt}


def _price_curve(kind: str) -> np.ndarray:
    # $/MWh
    if kind == "high-price":
        return 120 + 60 * _bump(7.5, 1.5) + 80 * _bump(14, 1.5) + 210 * _bump(18.5, 1.8)
    if kind == "high-solar-low-price":
        return 55 + 25 * _bump(8, 2) + 75 * _bump(19, 2) - 20 * _bump(13, 2.5)
    if kind == "low-solar-high-price":
        return 225 + 20 * _bump(8.5, 2.5) + 30 * _bump(18.5, 3)
    if kind == "weekend":
        return 70 + 50 * _bump(13, 3) + 110 * _bump(19, 2.2)
    # weekday, high-demand
    return 65 + 80 * _bump(8, 1.6) + 35 * _bump(13, 3) + 150 * _bump(18.5, 1.8)


def synth_day(seed: int, archetype: str) -> DayProfile:
    """Deterministic synthetic day for one of :data:`ARCHETYPES`."""
    if archetype not in ARCHETYPES:
        raise ValueError(f"unknown archetype {archetype!r}; expected one of {', '.join(ARCHETYPES)}")
    kind = _ALIAS.get(archetype, archetype)
    rng = np.random.default_rng([int(seed), ARCHETYPES.index(kind)])
    e_crit, e_flex, e_curt, e_solar = _ENERGY[kind]

    loads = []
    for cls, energy in zip(("critical", "flexible", "curtailable"), (e_crit, e_flex, e_curt)):
        shape = _shapes(kind)[cls] * (1.0 + 0.04 * rng.standard_normal(HORIZON))
        series = np.clip(shape, 0.0, None)
        series *= energy * rng.uniform(0.97, 1.03) / series.sum()
        loads.append(Load(f"{cls[:4]}1", cls, tuple(round(float(v), 5) for v in series)))

    solar = []
    daylight = np.clip(np.sin(np.pi * (_H - 6) / 13), 0.0, None)
    for unit, share in (("pv1", 0.6), ("pv2", 0.4)):
        cloud = np.clip(1.0 - 0.15 * rng.random(HORIZON), 0.0, 1.0)
        series = daylight * cloud
        series *= e_solar * share * rng.uniform(0.97, 1.03) / series.sum()
        solar.append(SolarUnit(unit, tuple(round(float(v), 5) for v in series)))

    price = _price_curve(kind) * (1.0 + 0.03 * rng.standard_normal(HORIZON))
    return DayProfile(
        label=f"{archetype}-s{seed}",
        price=tuple(round(float(p), 2) for p in price),
        loads=tuple(loads),
        solar=tuple(solar),
    )
