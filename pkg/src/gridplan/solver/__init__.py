"""LP/MILP solving: presolve, revised simplex, branch and bound."""

from __future__ import annotations

import math
import time
from dataclasses import replace

from ..config import SolverSettings
from ..lp_core.program import LinearProgram
from .presolve import PresolveResult, PresolveUndo, presolve
from .result import STATUSES, SolveResult, SolverError
from .simplex import RevisedSimplex, dual_bound


def solve_lp(lp: LinearProgram, settings: SolverSettings | None = None,
             *, use_presolve: bool = True) -> SolveResult:
    """Solve the continuous relaxation of ``lp`` (integrality is ignored)."""
    settings = settings or SolverSettings()
    start = time.perf_counter()
    if not use_presolve:
        return RevisedSimplex(lp, settings).solve()

    pre = presolve(lp)
    if pre.status == "infeasible":
        return SolveResult("infeasible", math.nan, None, message=pre.message,
                           wall_time=time.perf_counter() - start)
    reduced, undo = pre.lp, pre.undo
    res = RevisedSimplex(reduced, settings).solve()
    x = undo.expand(res.x) if res.x is not None else None
    duals = None
    if res.duals is not None and x is not None:
        duals = undo.expand_duals(lp, reduced, res.x, res.duals)
    objective = lp.objective(x) if x is not None and res.status != "infeasible" else res.objective
    return replace(res, x=x, duals=duals, objective=objective,
                   wall_time=time.perf_counter() - start)


from .bnb import solve_bnb  # noqa: E402

__all__ = [
    "STATUSES", "SolveResult", "SolverError", "RevisedSimplex", "dual_bound",
    "presolve", "PresolveResult", "PresolveUndo", "solve_lp", "solve_bnb",
]
