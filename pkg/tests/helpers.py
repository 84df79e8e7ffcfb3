"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import itertools
import math
from dataclasses import replace

import numpy as np

from gridplan.config import HORIZON, ModelConfig, SolverSettings, default_config
from gridplan.ingest import DayProfile, Load, SolarUnit
from gridplan.lp_core import LinearProgram, LPBuilder

H = np.arange(HORIZON, dtype=float)


def bump(center: float, width: float) -> np.ndarray:
    return np.exp(-0.5 * ((H - center) / width) ** 2)


def quick_config(**kw) -> ModelConfig:
    """Default config with the short solver budget used in tests."""
    cfg = default_config()
    cfg = replace(cfg, solver=SolverSettings(time_budget=30.0))
    return replace(cfg, **kw)



def make_profile(price, loads, solar=(), label="t") -> DayProfile:
    """``loads`` is a list of (kind, series) pairs; series may be scalars."""
    def series(v):
        arr = np.broadcast_to(np.asarray(v, dtype=float), (HORIZON,))
        return tuple(float(x) for x in arr)

    return DayProfile(
        label=label,
        price=series(price),
        loads=tuple(Load(f"{k[:4]}{i}", k, series(s)) for i, (k, s) in enumerate(loads)),
        solar=tuple(SolarUnit(f"pv{i}", series(s)) for i, s in enumerate(solar)),
    )


def _scaled(shape: np.ndarray, energy: float) -> np.ndarray:
    return shape * energy / shape.sum()


def last_day_profile() -> DayProfile:
    """Day shaped after the reference last-day table.

    Class energies in the ratio 1.63 : 5.67 : 5.13 totalling 12.42 MWh, solar 2.43 MWh peaking at
    0.43 MW and a system peak of exactly 0.70 MW.
    """
    k = 12.42 / (1.63 + 5.67 + 5.13)  # table rows sum to 12.43 after rounding
    crit = _scaled(0.9 + 0.1 * bump(13, 5), 1.63 * k)
    flat = np.ones(HORIZON)
    flex_peaky = 0.3 + 0.8 * bump(8.5, 1.8) + 1.0 * bump(18, 2.0)
    curt_peaky = 0.2 + bump(18.5, 1.6) + 0.4 * bump(9, 1.5)

    def shapes(w):
        flex = _scaled((1 - w) * flat + w * flex_peaky, 5.67 * k)
        curt = _scaled((1 - w) * flat + w * curt_peaky, 5.13 * k)
        return float((crit + flex + curt).max()), flex, curt

    lo, hi = 0.0, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if shapes(mid)[0] < 0.70:
            lo = mid
        else:
            hi = mid
    _, flex, curt = shapes(0.5 * (lo + hi))
    daylight = np.clip(np.sin(np.pi * (H - 6) / 13), 0.0, None)
    # bisection on a sharpening exponent to hit the stated solar peak
    lo, hi = 0.1, 10.0
    for _ in range(80):
        k = 0.5 * (lo + hi)
        sol = _scaled(daylight ** k, 2.43)
        if sol.max() < 0.43:
            lo = k
        else:
            hi = k
    sol = _scaled(daylight ** (0.5 * (lo + hi)), 2.43)
    price = 70 + 80 * bump(8, 1.6) + 40 * bump(13, 3) + 160 * bump(18.5, 1.8)
    return make_profile(price, [("critical", crit), ("flexible", flex), ("curtailable", curt)],
                        solar=[0.6 * sol, 0.4 * sol], label="last-day")


# ------------------------------------------------------------------ LP oracles

def random_lp(rng: np.random.Generator, n: int, m: int, box: float = 10.0,
              feasible_bias: bool = True, n_int: int = 0) -> LinearProgram:
    """Small dense LP with box bounds; rhs built around a random point."""
    b = LPBuilder(name="rand")
    c = np.round(rng.uniform(-5, 5, n), 1)
    for j in range(n):
        b.add_var(f"x{j}", 0.0, box, float(c[j]), integral=j < n_int)
    x0 = rng.uniform(0, box, n)
    for i in range(m):
        a = np.round(rng.uniform(-4, 4, n), 1)
        a[rng.random(n) < 0.25] = 0.0
        sense = rng.choice(["L", "G", "E"], p=[0.45, 0.35, 0.2])
        act = float(a @ x0)
        if feasible_bias:
            off = float(rng.uniform(0, 5))
            rhs = act + off if sense == "L" else act - off if sense == "G" else act
        else:
            rhs = float(rng.uniform(-20, 20))
        b.add_row(f"r{i}", "rand", [(j, float(a[j])) for j in range(n) if a[j] != 0.0],
                  str(sense), round(rhs, 3))
    return b.build()


def mixed_instance(rng: np.random.Generator) -> LinearProgram:
    """Small packing MIP whose first three columns are integer in [0, 2]."""
    n = int(rng.integers(3, 6))
    b = LPBuilder(name="mip")
    for j in range(n):
        b.add_var(f"x{j}", 0.0, 2.0 if j < 3 else 5.0,
                  float(np.round(rng.uniform(-6, 3), 1)), integral=j < 3)
    for i in range(int(rng.integers(1, 4))):
        a = np.round(rng.uniform(0.5, 4, n), 1)
        b.add_row(f"r{i}", "t", [(j, float(a[j])) for j in range(n)], "L",
                  float(np.round(rng.uniform(3, 12), 1)))
    return b.build()


def vertex_enumeration(lp: LinearProgram, tol: float = 1e-7) -> float:
    """Optimum of a bounded LP by enumerating every basic solution.

    Returns ``inf`` when no feasible vertex exists.  Each candidate fixes
    ``n`` constraints (rows at equality, variables at a bound) and solves
    the square system; feasibility is then checked against every row.
    """
    n, m = lp.n, lp.m
    A = lp.A.toarray()
    best = math.inf
    mats, rhss = [], []
    for r in range(0, min(m, n) + 1):
        for rows in itertools.combinations(range(m), r):
            k = n - r
            for vars_ in itertools.combinations(range(n), k):
                for sides in itertools.product((0, 1), repeat=k):
                    M = np.zeros((n, n))
                    v = np.zeros(n)
                    M[:r] = A[list(rows)]
                    v[:r] = lp.rhs[list(rows)]
                    for q, (j, s) in enumerate(zip(vars_, sides)):
                        M[r + q, j] = 1.0
                        v[r + q] = lp.ub[j] if s else lp.lb[j]
                    mats.append(M)
                    rhss.append(v)
    if not mats:
        return best
    M = np.array(mats)
    V = np.array(rhss)
    ok = np.abs(np.linalg.det(M)) > 1e-9
    if not ok.any():
        return best
    X = np.linalg.solve(M[ok], V[ok][..., None])[..., 0]
    for x in X:
        if lp.max_violation(x) <= tol:
            best = min(best, lp.objective(x))
    return best


def integer_enumeration(lp: LinearProgram, int_cols: list[int]) -> float:
    """Best objective over every integer assignment, remaining columns by HiGHS."""
    from scipy.optimize import linprog

    ranges = [range(int(math.ceil(lp.lb[j])), int(math.floor(lp.ub[j])) + 1) for j in int_cols]
    A = lp.A.toarray()
    ub_rows = [i for i in range(lp.m) if lp.sense[i] != "E"]
    eq_rows = [i for i in range(lp.m) if lp.sense[i] == "E"]
    sign = np.array([1.0 if lp.sense[i] == "L" else -1.0 for i in ub_rows])
    best = math.inf
    for combo in itertools.product(*ranges):
        lb = lp.lb.copy()
        ub = lp.ub.copy()
        lb[int_cols] = combo
        ub[int_cols] = combo
        res = linprog(
            lp.c,
            A_ub=(A[ub_rows] * sign[:, None]) if ub_rows else None,
            b_ub=(lp.rhs[ub_rows] * sign) if ub_rows else None,
            A_eq=A[eq_rows] if eq_rows else None,
            b_eq=lp.rhs[eq_rows] if eq_rows else None,
            bounds=list(zip(lb, ub)),
            method="highs",
        )
        if res.status == 0:
            best = min(best, float(res.fun) + lp.obj_offset)
    return best


def highs_objective(lp: LinearProgram) -> tuple[int, float]:
    """(status, objective) from scipy's HiGHS on the same arrays."""
    from scipy.optimize import linprog

    A = lp.A.toarray()
    ub_rows = [i for i in range(lp.m) if lp.sense[i] != "E"]
    eq_rows = [i for i in range(lp.m) if lp.sense[i] == "E"]
    sign = np.array([1.0 if lp.sense[i] == "L" else -1.0 for i in ub_rows])
    res = linprog(
        lp.c,
        A_ub=(A[ub_rows] * sign[:, None]) if ub_rows else None,
        b_ub=(lp.rhs[ub_rows] * sign) if ub_rows else None,
        A_eq=A[eq_rows] if eq_rows else None,
        b_eq=lp.rhs[eq_rows] if eq_rows else None,
        bounds=list(zip(lp.lb, lp.ub)),
        method="highs",
    )
    return res.status, (float(res.fun) + lp.obj_offset if res.status == 0 else math.nan)
