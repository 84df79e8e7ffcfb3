"""Best-first branch and bound over the LP relaxation."""

from __future__ import annotations

import heapq
import math
import time

import numpy as np

from ..config import SolverSettings
from ..lp_core.program import LinearProgram
from .result import SolveResult

INT_TOL = 1e-6


def solve_bnb(lp: LinearProgram, integral: np.ndarray | list[int] | None = None,
              settings: SolverSettings | None = None) -> SolveResult:
    """Minimise ``lp`` with the given columns restricted to integers.

    ``integral`` is a boolean mask or a list of column indices; ``None`` uses
    ``lp.integral``.  Nodes are explored in order of their parent's LP
    bound, ties broken by creation order.  A node is pruned once its bound
    is within ``rel_gap`` of the incumbent.
    """
    from . import solve_lp

    settings = settings or SolverSettings()
    if integral is None:
        mask = lp.integral.copy()
    else:
        integral = np.asarray(integral)
        if integral.dtype == bool:
            mask = integral.copy()
        else:
            mask = np.zeros(lp.n, dtype=bool)
            mask[integral.astype(int)] = True
    if not mask.any():
        return solve_lp(lp, settings)

    start = time.perf_counter()
    lb0 = lp.lb.copy()
    ub0 = lp.ub.copy()
    lb0[mask] = np.ceil(lb0[mask] - INT_TOL)
    ub0[mask] = np.floor(ub0[mask] + INT_TOL)

    incumbent: np.ndarray | None = None
    inc_obj = math.inf
    iterations = 0
    nodes = 0
    counter = 0
    heap: list[tuple[float, int, np.ndarray, np.ndarray]] = [(-math.inf, 0, lb0, ub0)]
    best_bound = -math.inf
    timed_out = False

    def cutoff() -> float:
        return inc_obj - settings.rel_gap * abs(inc_obj) if math.isfinite(inc_obj) else math.inf

    while heap:
        bound, _, lb, ub = heapq.heappop(heap)
        if bound >= cutoff():
            continue
        remaining = settings.time_budget - (time.perf_counter() - start)
        if remaining <= 0:
            heapq.heappush(heap, (bound, counter, lb, ub))
            timed_out = True
            break
        node_settings = SolverSettings(remaining, settings.rel_gap,
                                       settings.feasibility_tol, settings.optimality_tol)
        res = solve_lp(lp.with_bounds(lb, ub), node_settings)
        nodes += 1
        iterations += res.iterations
        if res.status == "unbounded" and incumbent is None:
            return SolveResult("unbounded", -math.inf, None, iterations=iterations,
                               wall_time=time.perf_counter() - start, nodes=nodes,
                               message="LP relaxation unbounded")
        if res.status == "time-limit":
            heapq.heappush(heap, (bound, counter, lb, ub))
            timed_out = True
            break
        if res.status != "optimal" or res.objective >= cutoff():
            continue
        x = res.x
        frac = np.abs(x - np.round(x))
        frac[~mask] = 0.0
        j = int(np.argmax(frac))
        if frac[j] <= INT_TOL:
            xr = x.copy()
            xr[mask] = np.round(xr[mask])
            inc_obj = lp.objective(xr)
            incumbent = xr
            continue
        for child_lb, child_ub in (
            (lb, _set(ub, j, math.floor(x[j]))),
            (_set(lb, j, math.ceil(x[j])), ub),
        ):
            counter += 1
            heapq.heappush(heap, (res.objective, counter, child_lb, child_ub))

    open_bounds = [b for b, *_ in heap]
    best_bound = min(open_bounds + [inc_obj]) if open_bounds else inc_obj
    wall = time.perf_counter() - start
    if incumbent is None:
        status = "time-limit" if timed_out else "infeasible"
        return SolveResult(status, math.nan, None, iterations=iterations, wall_time=wall,
                           nodes=nodes, gap=math.inf)
    gap = 0.0
    if math.isfinite(best_bound) and best_bound < inc_obj:
        gap = (inc_obj - best_bound) / max(abs(inc_obj), 1e-10)
    return SolveResult("time-limit" if timed_out else "optimal", inc_obj, incumbent,
                       iterations=iterations, wall_time=wall, gap=gap, nodes=nodes)


def _set(arr: np.ndarray, j: int, v: float) -> np.ndarray:
    out = arr.copy()
    out[j] = v
    return out
