from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridplan.config import (
    HORIZON,
    BatterySpec,
    ConfigError,
    Periods,
    apply_overrides,
    default_config,
    dumps,
    load,
    loads,
    save,
    validate,
)


def test_defaults_match_reference_parameters():
    cfg = default_config()
    assert (cfg.alpha_max, cfg.tau_max, cfg.t_min, cfg.t_max, cfg.delta_f) == (0.2, 4, 2, 4, 0.3)
    assert set(cfg.periods.peak) == {10, 11, 12, 17, 18, 19}
    assert (cfg.pi_base, cfg.beta) == (150.0, 1.2)
    assert cfg.solver.time_budget == 600.0
    assert cfg.solver.rel_gap == 0.01


def test_default_config_is_valid():
    assert validate(default_config()) == []


def test_alpha_out_of_range():
    assert validate(replace(default_config(), alpha_max=1.5)) == ["alpha_max out of (0,1)"]


def test_period_overlap_named():
    cfg = default_config()
    periods = replace(cfg.periods, peak=cfg.periods.peak + (13,))
    assert validate(replace(cfg, periods=periods)) == ["periods overlap at hour 13"]


def test_period_gap_and_out_of_range():
    cfg = default_config()
    periods = Periods(off_peak=(0, 1, 2, 3, 4, 5, 22, 24), shoulder=cfg.periods.shoulder,
                      peak=cfg.periods.peak)
    msgs = validate(replace(cfg, periods=periods))
    assert any("outside 0..23" in m for m in msgs)
    assert any("do not cover hours 23" in m for m in msgs)


@pytest.mark.parametrize("changes, field", [
    (dict(beta_max=0.0), "beta_max"),
    (dict(eta_shift=1.2), "eta_shift"),
    (dict(t_min=5), "t_min"),
    (dict(tau_max=0), "tau_max"),
    (dict(phi_min=0.95), "phi_min"),
    (dict(delta_peak=1.1), "delta_peak"),
    (dict(batteries=(BatterySpec(soc_init=0.1),)), "battery"),
    (dict(batteries=(BatterySpec(eta_b=0.0),)), "eta_b"),
])
def test_each_violation_names_its_field(changes, field):
    msgs = validate(replace(default_config(), **changes))
    assert msgs and any(field in m for m in msgs)


def test_periods_kind():
    p = default_config().periods
    assert [p.kind(h) for h in (0, 7, 11, 22)] == ["off_peak", "shoulder", "peak", "off_peak"]
    assert sorted(p.off_peak + p.shoulder + p.peak) == list(range(HORIZON))


def test_overrides_and_battery_resize():
    cfg = apply_overrides(default_config(), [("delta_peak", "0.85"), ("battery.count", "3"),
                                             ("battery.2.capacity", "2.5"),
                                             ("solver.time_budget", "30"),
                                             ("periods.peak", "17,18,19"),
                                             ("dr_enabled", "false")])
    assert cfg.delta_peak == 0.85
    assert len(cfg.batteries) == 3 and cfg.batteries[2].capacity == 2.5
    assert cfg.solver.time_budget == 30.0
    assert cfg.periods.peak == (17, 18, 19)
    assert cfg.dr_enabled is False
    assert apply_overrides(default_config(), [("battery.count", "0")]).batteries == ()


@pytest.mark.parametrize("pairs, text", [
    ([("nope", "1")], "unknown key"),
    ([("alpha_max", "abc")], "cannot parse"),
    ([("battery.5.capacity", "1")], "out of range"),
    ([("battery.x.capacity", "1")], "unknown key"),
    ([("dr_enabled", "maybe")], "cannot parse"),
])
def test_override_errors(pairs, text):
    with pytest.raises(ConfigError, match=text):
        apply_overrides(default_config(), pairs)


def test_file_roundtrip(tmp_path):
    cfg = apply_overrides(default_config(), [("c_p", "9000.5"), ("battery.count", "1")])
    path = tmp_path / "cfg.txt"
    save(cfg, path)
    assert load(path) == cfg


def test_comments_and_malformed_lines():
    assert loads("# header\nalpha_max = 0.1  # tighter\n\n").alpha_max == 0.1
    with pytest.raises(ConfigError, match="line 2"):
        loads("alpha_max = 0.1\nbogus line\n")


floats01 = st.floats(0.01, 0.99, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(alpha=floats01, delta=st.floats(0.6, 1.0), cp=st.floats(0, 1e5),
       tau=st.integers(1, 8), nbat=st.integers(0, 3), cap=st.floats(0.1, 10),
       ratchet=st.booleans())
def test_dumps_loads_roundtrip(alpha, delta, cp, tau, nbat, cap, ratchet):
    cfg = replace(default_config(), alpha_max=alpha, delta_peak=delta, c_p=cp, tau_max=tau,
                  demand_ratchet=ratchet,
                  batteries=tuple(BatterySpec(capacity=cap) for _ in range(nbat)))
    assert loads(dumps(cfg)) == cfg
