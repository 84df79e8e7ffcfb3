"""Model parameters, defaults, validation and the key-value config file.

The horizon is 24 one-hour steps, so a power in MW held for one step is the
same number as an energy in MWh.  Formulas throughout the package rely on
that and never carry an explicit ``dt``.

Config file format: one ``key = value`` per line, ``#`` starts a comment,
nested fields use dotted names (``solver.time_budget``,
``battery.0.capacity``, ``periods.peak``).  Unknown keys are errors.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

HORIZON = 24
HOURS = tuple(range(HORIZON))


class ConfigError(ValueError):
    """Malformed config text or an unknown / uncoercible key."""


@dataclass(frozen=True)
class BatterySpec:
    capacity: float = 1.0  # MWh
    p_max: float = 0.25  # MW, applies to charge and discharge separately
    eta_b: float = 0.95  # one-way efficiency; round trip is eta_b**2
    soc_min: float = 0.2  # fractions of capacity
    soc_max: float = 0.95
    soc_init: float = 0.5


@dataclass(frozen=True)
class SolverSettings:
    time_budget: float = 600.0  # seconds
    rel_gap: float = 0.01
    feasibility_tol: float = 1e-7
    optimality_tol: float = 1e-7


@dataclass(frozen=True)
class Periods:
    off_peak: tuple[int, ...] = (0, 1, 2, 3, 4, 5, 22, 23)
    shoulder: tuple[int, ...] = (6, 7, 8, 9, 13, 14, 15, 16, 20, 21)
    peak: tuple[int, ...] = (10, 11, 12, 17, 18, 19)

    def kind(self, hour: int) -> str:
        if hour in self.peak:
            return "peak"
        if hour in self.shoulder:
            return "shoulder"
        if hour in self.off_peak:
            return "off_peak"
        raise ValueError(f"hour {hour} is not in any period")


@dataclass(frozen=True)
class ModelConfig:
    """Every tunable coefficient of the scheduling model.

    Monetary rates are in $, $/MW or $/MWh; factors are dimensionless.
    ``c_p`` and ``c_dr`` were back-solved from the reference last-day
    figures (0.70 MW peak billed at $6,084.75; $73.80 for 0.37 MWh of
    curtailment).  ``delta_peak = 0.9`` encodes the 10 % peak target.
    """

    # event detection
    beta: float = 1.2
    pi_base: float = 150.0
    gamma: float = 0.8
    alpha_max: float = 0.2
    tau_max: int = 4
    t_min: int = 2
    t_max: int = 4
    delta_f: float = 0.3
    dr_enabled: bool = True

    # objective
    c_p: float = 8700.0
    c_dr: float = 200.0
    b_po: float = 90.0
    b_ps: float = 60.0
    b_so: float = 30.0
    lambda_p: float = 20.0
    lambda_r: float = 10.0
    slack_penalty: float = 1e5
    # Bill demand no lower than delta_peak * original peak (contract target).
    demand_ratchet: bool = True

    # constraints
    eps_peak: float = 0.2
    beta_max: float = 0.3
    eta_shift: float = 0.95
    gamma_ramp: float = 0.3
    delta_peak: float = 0.9
    phi_min: float = 0.5
    terminal_soc: bool = True

    batteries: tuple[BatterySpec, ...] = (BatterySpec(), BatterySpec())
    solver: SolverSettings = field(default_factory=SolverSettings)
    periods: Periods = field(default_factory=Periods)


def default_config() -> ModelConfig:
    return ModelConfig()


def validate(cfg: ModelConfig) -> list[str]:
    """Return human-readable invariant violations; empty means valid."""
    out: list[str] = []

    def open_unit(name: str, value: float) -> None:
        if not 0.0 < value < 1.0:
            out.append(f"{name} out of (0,1)")

    def half_open_unit(name: str, value: float) -> None:
        if not 0.0 < value <= 1.0:
            out.append(f"{name} out of (0,1]")

    open_unit("alpha_max", cfg.alpha_max)
    half_open_unit("beta_max", cfg.beta_max)
    half_open_unit("eta_shift", cfg.eta_shift)
    if cfg.t_min > cfg.t_max:
        out.append("t_min greater than t_max")
    if cfg.t_min < 1:
        out.append("t_min must be at least 1")
    if cfg.tau_max < 1:
        out.append("tau_max must be at least 1")
    if not 0.0 < cfg.phi_min < cfg.delta_peak <= 1.0:
        out.append("phi_min/delta_peak must satisfy 0 < phi_min < delta_peak <= 1")

    for name in ("beta", "pi_base", "gamma", "delta_f", "c_p", "c_dr", "b_po",
                 "b_ps", "b_so", "lambda_p", "lambda_r", "slack_penalty",
                 "eps_peak", "gamma_ramp"):
        value = getattr(cfg, name)
        if not math.isfinite(value) or value < 0:
            out.append(f"{name} must be finite and non-negative")

    for i, bat in enumerate(cfg.batteries):
        half_open_unit(f"battery.{i}.eta_b", bat.eta_b)
        if not 0.0 <= bat.soc_min < bat.soc_init < bat.soc_max <= 1.0:
            out.append(f"battery.{i} requires soc_min < soc_init < soc_max <= 1")
        if bat.capacity <= 0 or bat.p_max <= 0:
            out.append(f"battery.{i} capacity and p_max must be positive")

    s = cfg.solver
    if s.time_budget <= 0:
        out.append("solver.time_budget must be positive")
    if not 0.0 <= s.rel_gap < 1.0:
        out.append("solver.rel_gap out of [0,1)")
    if s.feasibility_tol <= 0 or s.optimality_tol <= 0:
        out.append("solver tolerances must be positive")

    seen: dict[int, str] = {}
    for kind in ("off_peak", "shoulder", "peak"):
        for h in getattr(cfg.periods, kind):
            if not 0 <= h < HORIZON:
                out.append(f"periods.{kind} hour {h} outside 0..23")
            elif h in seen:
                out.append(f"periods overlap at hour {h}")
            else:
                seen[h] = kind
    missing = [h for h in HOURS if h not in seen]
    if missing:
        out.append("periods do not cover hours " + ",".join(map(str, missing)))
    return out


# ---------------------------------------------------------------- file I/O

def _format(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return repr(value)


def _coerce(key: str, kind: Any, text: str) -> Any:
    text = text.strip()
    try:
        if kind is bool or kind == "bool":
            low = text.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(text)
        if kind is int or kind == "int":
            return int(text)
        if kind is float or kind == "float":
            return float(text)
        if kind == "tuple[int, ...]":
            return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as {kind}") from None
    raise ConfigError(f"{key}: unsupported field type {kind}")


def _field_types(cls: type) -> dict[str, Any]:
    return {f.name: f.type for f in fields(cls)}


_TOP = {k: v for k, v in _field_types(ModelConfig).items()
        if k not in ("batteries", "solver", "periods")}
_BATTERY = _field_types(BatterySpec)
_SOLVER = _field_types(SolverSettings)
_PERIODS = _field_types(Periods)


def to_items(cfg: ModelConfig) -> list[tuple[str, str]]:
    items = [(k, _format(getattr(cfg, k))) for k in _TOP]
    items += [(f"solver.{k}", _format(getattr(cfg.solver, k))) for k in _SOLVER]
    items += [(f"periods.{k}", _format(getattr(cfg.periods, k))) for k in _PERIODS]
    items.append(("battery.count", str(len(cfg.batteries))))
    for i, bat in enumerate(cfg.batteries):
        items += [(f"battery.{i}.{k}", _format(getattr(bat, k))) for k in _BATTERY]
    return items


def dumps(cfg: ModelConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in to_items(cfg))


def apply_overrides(cfg: ModelConfig, pairs: list[tuple[str, str]]) -> ModelConfig:
    """Apply ``(key, text)`` pairs in order; ``battery.count`` resizes first."""
    pairs = sorted(pairs, key=lambda kv: kv[0].strip() != "battery.count")
    top: dict[str, Any] = {}
    solver: dict[str, Any] = {}
    periods: dict[str, Any] = {}
    batteries = [dataclasses.asdict(b) for b in cfg.batteries]
    for raw_key, text in pairs:
        key = raw_key.strip()
        parts = key.split(".")
        if len(parts) == 1 and key in _TOP:
            top[key] = _coerce(key, _TOP[key], text)
        elif len(parts) == 2 and parts[0] == "solver" and parts[1] in _SOLVER:
            solver[parts[1]] = _coerce(key, _SOLVER[parts[1]], text)
        elif len(parts) == 2 and parts[0] == "periods" and parts[1] in _PERIODS:
            periods[parts[1]] = _coerce(key, _PERIODS[parts[1]], text)
        elif key == "battery.count":
            n = _coerce(key, int, text)
            if n < 0:
                raise ConfigError("battery.count must be >= 0")
            batteries = batteries[:n] + [dataclasses.asdict(BatterySpec())
                                         for _ in range(n - len(batteries))]
        elif len(parts) == 3 and parts[0] == "battery" and parts[2] in _BATTERY:
            try:
                idx = int(parts[1])
            except ValueError:
                raise ConfigError(f"unknown key {key!r}") from None
            if not 0 <= idx < len(batteries):
                raise ConfigError(f"{key}: battery index out of range "
                                  f"(battery.count = {len(batteries)})")
            batteries[idx][parts[2]] = _coerce(key, _BATTERY[parts[2]], text)
        else:
            raise ConfigError(f"unknown key {key!r}")
    return replace(
        cfg,
        **top,
        solver=replace(cfg.solver, **solver),
        periods=replace(cfg.periods, **periods),
        batteries=tuple(BatterySpec(**b) for b in batteries),
    )


def parse_pairs(text: str) -> list[tuple[str, str]]:
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        pairs.append((key.strip(), value.strip()))
    return pairs


def loads(text: str, base: ModelConfig | None = None) -> ModelConfig:
    return apply_overrides(base or default_config(), parse_pairs(text))


def load(path: str | Path) -> ModelConfig:
    return loads(Path(path).read_text(encoding="utf-8"))


def save(cfg: ModelConfig, path: str | Path) -> None:
    Path(path).write_text(dumps(cfg), encoding="utf-8")
