"""Bounded-variable primal revised simplex.

Every row ``i`` gets a logical variable ``r_i = a_i . x`` whose bounds carry
the row sense, so the working system is ``A x - r = 0`` with box bounds on
all ``n + m`` variables.  Phase 1 minimises the sum of bound violations of
the basic variables, phase 2 the true objective; both run on the same basis.

The basis inverse is a dense LU factorisation followed by a list of
product-form eta updates, refactorised every ``REFACTOR_EVERY`` pivots.
Pricing is Dantzig's rule, switching to Bland's rule after
``STALL_LIMIT`` iterations without objective progress.
"""

from __future__ import annotations

import math
import time

import numpy as np
import scipy.linalg as la

from ..config import SolverSettings
from ..lp_core.program import LinearProgram
from .result import SolveResult, SolverError

REFACTOR_EVERY = 50
STALL_LIMIT = 1000
PIVOT_TOL = 1e-9

_LOWER, _UPPER, _FREE, _BASIC = 0, 1, 2, 3


def _row_bounds(lp: LinearProgram) -> tuple[np.ndarray, np.ndarray]:
    lo = np.full(lp.m, -math.inf)
    hi = np.full(lp.m, math.inf)
    for i, s in enumerate(lp.sense):
        if s in ("G", "E"):
            lo[i] = lp.rhs[i]
        if s in ("L", "E"):
            hi[i] = lp.rhs[i]
    return lo, hi


class _Basis:
    """LU of the basis matrix plus product-form eta updates."""

    def __init__(self, lu: tuple, m: int) -> None:
        self.lu = lu
        self.m = m
        self.etas: list[tuple[int, np.ndarray]] = []

    def ftran(self, a: np.ndarray) -> np.ndarray:
        z = la.lu_solve(self.lu, a, check_finite=False) if self.m else a.copy()
        for r, alpha in self.etas:
            zr = z[r] / alpha[r]
            z -= zr * alpha
            z[r] = zr
        return z

    def btran(self, c: np.ndarray) -> np.ndarray:
        v = c.astype(float, copy=True)
        for r, alpha in reversed(self.etas):
            v[r] = (v[r] - (alpha @ v - alpha[r] * v[r])) / alpha[r]
        return la.lu_solve(self.lu, v, trans=1, check_finite=False) if self.m else v


class RevisedSimplex:
    def __init__(self, lp: LinearProgram, settings: SolverSettings | None = None) -> None:
        self.lp = lp
        self.settings = settings or SolverSettings()
        self.n, self.m = lp.n, lp.m
        self.A = lp.A.tocsc()
        self.AT = lp.A.T.tocsr() if self.m else None
        rlo, rhi = _row_bounds(lp)
        self.lo = np.concatenate([lp.lb, rlo])
        self.hi = np.concatenate([lp.ub, rhi])
        self.cost = np.concatenate([lp.c, np.zeros(self.m)])
        self.iterations = 0

    # ---------------------------------------------------------- helpers
    def _column(self, j: int) -> np.ndarray:
        if j < self.n:
            col = np.zeros(self.m)
            lo, hi = self.A.indptr[j], self.A.indptr[j + 1]
            col[self.A.indices[lo:hi]] = self.A.data[lo:hi]
            return col
        col = np.zeros(self.m)
        col[j - self.n] = -1.0
        return col

    def _factor(self) -> None:
        B = np.zeros((self.m, self.m))
        for k, j in enumerate(self.basis):
            if j < self.n:
                lo, hi = self.A.indptr[j], self.A.indptr[j + 1]
                B[self.A.indices[lo:hi], k] = self.A.data[lo:hi]
            else:
                B[j - self.n, k] = -1.0
        if self.m:
            lu = la.lu_factor(B, check_finite=False)
            diag = np.abs(np.diag(lu[0]))
            if diag.size and diag.min() <= 1e-13 * max(1.0, diag.max()):
                raise SolverError(f"singular basis at iteration {self.iterations}")
        else:
            lu = None
        self.B = _Basis(lu, self.m)

    def _recompute_basics(self) -> None:
        x = self.x.copy()
        x[self.basis] = 0.0
        v = (self.A @ x[: self.n]) - x[self.n:] if self.m else np.zeros(0)
        self.x[self.basis] = -self.B.ftran(v)

    def _reduced_costs(self, cb: np.ndarray, cfull: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        y = self.B.btran(cb)
        d = np.empty(self.n + self.m)
        d[: self.n] = cfull[: self.n] - (self.AT @ y if self.m else 0.0)
        d[self.n:] = cfull[self.n:] + y
        return d, y

    def _infeasibility(self) -> tuple[np.ndarray, float]:
        tol = self.settings.feasibility_tol
        xb = self.x[self.basis]
        lo = self.lo[self.basis]
        hi = self.hi[self.basis]
        below = xb < lo - tol
        above = xb > hi + tol
        cb = np.where(below, -1.0, np.where(above, 1.0, 0.0))
        total = float(np.sum(np.where(below, lo - xb, 0.0)) + np.sum(np.where(above, xb - hi, 0.0)))
        return cb, total

    # ------------------------------------------------------------- main
    def solve(self) -> SolveResult:
        start = time.perf_counter()
        s = self.settings
        n, m = self.n, self.m
        N = n + m
        lo, hi = self.lo, self.hi

        if np.any(lo > hi + s.feasibility_tol):
            j = int(np.argmax(lo - hi))
            return SolveResult("infeasible", math.nan, None, message=f"crossed bounds on variable {j}",
                               wall_time=time.perf_counter() - start)

        self.status = np.empty(N, dtype=np.int8)
        self.x = np.zeros(N)
        for j in range(n):
            if math.isfinite(lo[j]):
                self.status[j], self.x[j] = _LOWER, lo[j]
            elif math.isfinite(hi[j]):
                self.status[j], self.x[j] = _UPPER, hi[j]
            else:
                self.status[j], self.x[j] = _FREE, 0.0
        self.basis = np.arange(n, N)
        self.status[n:] = _BASIC
        self.pos = np.full(N, -1)
        self.pos[self.basis] = np.arange(m)
        self._factor()
        self._recompute_basics()

        max_iter = max(10000, 50 * (n + m))
        best_obj = math.inf
        stall = 0
        bland = False
        phase = last_phase = 1
        verified = False

        while True:
            if time.perf_counter() - start > s.time_budget:
                return self._finish("time-limit", phase, start, "time budget exhausted")
            if self.iterations >= max_iter:
                return self._finish("time-limit", phase, start, "iteration limit reached")

            cb1, infeas = self._infeasibility()
            if infeas > 0.0:
                phase = 1
                cfull = np.zeros(N)
                cb = cb1
            else:
                phase = 2
                cfull = self.cost
                cb = self.cost[self.basis]
            d, _ = self._reduced_costs(cb, cfull)

            q, direction = self._price(d, bland)
            if q < 0:
                # confirm on a fresh factorisation before concluding
                if not verified and self.B.etas:
                    self._factor()
                    self._recompute_basics()
                    verified = True
                    continue
                if phase == 1:
                    return self._finish("infeasible", 1, start,
                                        f"phase 1 ended with infeasibility {infeas:.3g}")
                return self._finish("optimal", 2, start, "")
            verified = False

            alpha = self.B.ftran(self._column(q))
            r, theta, flip, leave_upper = self._ratio_test(alpha, q, direction, phase, bland)
            if r < 0 and not flip:
                if phase == 2:
                    return self._finish("unbounded", 2, start, f"unbounded ray along variable {q}")
                raise SolverError(f"phase 1 ray without breakpoint at iteration {self.iterations}")

            if not flip and abs(alpha[r]) < PIVOT_TOL:
                self._factor()
                self._recompute_basics()
                alpha = self.B.ftran(self._column(q))
                r, theta, flip, leave_upper = self._ratio_test(alpha, q, direction, phase, bland)
                if not flip and (r < 0 or abs(alpha[r]) < PIVOT_TOL):
                    raise SolverError(
                        f"pivot element {alpha[r] if r >= 0 else 0.0:.3g} too small at "
                        f"iteration {self.iterations} (entering variable {q})")

            step = direction * theta
            self.x[self.basis] -= step * alpha
            self.x[q] += step
            self.iterations += 1

            if flip:
                self.status[q] = _UPPER if direction > 0 else _LOWER
                self.x[q] = hi[q] if direction > 0 else lo[q]
            else:
                p = self.basis[r]
                if leave_upper:
                    self.status[p], self.x[p] = _UPPER, hi[p]
                else:
                    self.status[p], self.x[p] = _LOWER, lo[p]
                self.basis[r] = q
                self.pos[p], self.pos[q] = -1, r
                self.status[q] = _BASIC
                self.B.etas.append((r, alpha))
                if len(self.B.etas) >= REFACTOR_EVERY:
                    self._factor()
                    self._recompute_basics()

            if phase != last_phase:
                best_obj, stall, bland, last_phase = math.inf, 0, False, phase
            obj = self._infeasibility()[1] if phase == 1 else float(self.cost @ self.x)
            if obj < best_obj - 1e-12 * max(1.0, abs(best_obj)):
                best_obj = obj
                stall = 0
                bland = False
            else:
                stall += 1
                if stall >= STALL_LIMIT:
                    bland = True

    def _price(self, d: np.ndarray, bland: bool) -> tuple[int, int]:
        tol = self.settings.optimality_tol
        st = self.status
        movable = self.lo < self.hi
        up = ((st == _LOWER) | (st == _FREE)) & (d < -tol) & movable
        down = ((st == _UPPER) | (st == _FREE)) & (d > tol) & movable
        eligible = up | down
        if not eligible.any():
            return -1, 0
        if bland:
            q = int(np.flatnonzero(eligible)[0])
        else:
            score = np.where(eligible, np.abs(d), -1.0)
            q = int(np.argmax(score))
        return q, (1 if d[q] < 0 else -1)

    def _ratio_test(self, alpha: np.ndarray, q: int, direction: int, phase: int,
                    bland: bool) -> tuple[int, float, bool, bool]:
        """Return (leaving row, step, bound flip, leaving variable ends at upper)."""
        tol = self.settings.feasibility_tol
        idx = self.basis
        xb = self.x[idx]
        lo = self.lo[idx]
        hi = self.hi[idx]
        rate = -direction * alpha
        big = np.abs(alpha) > PIVOT_TOL

        # Target bound each basic variable runs into, if any.
        with np.errstate(invalid="ignore"):
            dec = big & (rate < 0)
            inc = big & (rate > 0)
            target = np.full(len(idx), np.nan)
            if phase == 1:
                below = xb < lo - tol
                above = xb > hi + tol
                feas = ~below & ~above
                target = np.where(dec & feas, lo, target)
                target = np.where(inc & feas, hi, target)
                target = np.where(inc & below, lo, target)
                target = np.where(dec & above, hi, target)
            else:
                target = np.where(dec, lo, target)
                target = np.where(inc, hi, target)
            has = ~np.isnan(target) & np.isfinite(target)
            exact = np.where(has, (target - xb) / np.where(has, rate, 1.0), np.inf)
            exact = np.maximum(exact, 0.0)
            relaxed = np.where(has, (target - xb + np.sign(rate) * tol) / np.where(has, rate, 1.0),
                               np.inf)
            relaxed = np.maximum(relaxed, 0.0)

        flip_dist = self.hi[q] - self.lo[q]
        if bland:
            theta = float(exact.min()) if len(exact) else math.inf
            if math.isfinite(flip_dist) and flip_dist <= theta:
                return -1, float(flip_dist), True, False
            if not math.isfinite(theta):
                return -1, math.inf, False, False
            ties = np.flatnonzero(exact <= theta + 1e-12)
            r = int(ties[np.argmin(idx[ties])])
            return r, theta, False, bool(target[r] == hi[r])

        theta_max = float(relaxed.min()) if len(relaxed) else math.inf
        if math.isfinite(flip_dist) and flip_dist <= theta_max:
            return -1, float(flip_dist), True, False
        if not math.isfinite(theta_max):
            return -1, math.inf, False, False
        cand = np.flatnonzero(exact <= theta_max)
        r = int(cand[np.argmax(np.abs(alpha[cand]))])
        return r, float(exact[r]), False, bool(target[r] == hi[r])

    def _finish(self, status: str, phase: int, start: float, message: str) -> SolveResult:
        wall = time.perf_counter() - start
        if status == "time-limit" and phase == 1:
            return SolveResult(status, math.nan, None, iterations=self.iterations,
                               wall_time=wall, message=message + " before a feasible point")
        x = self.x[: self.n].copy()
        # nonbasic structurals sit exactly on their bounds
        duals = None
        if status == "optimal":
            _, y = self._reduced_costs(self.cost[self.basis], self.cost)
            duals = y
        obj = float(self.lp.c @ x + self.lp.obj_offset) if status != "infeasible" else math.nan
        if status in ("infeasible", "unbounded"):
            x = None if status == "infeasible" else x
        return SolveResult(status, obj, x, duals, self.iterations, wall, message=message)


def dual_bound(lp: LinearProgram, y: np.ndarray, tol: float = 1e-9) -> float:
    """Lagrangian lower bound on the optimum implied by row multipliers ``y``.

    A reduced cost within ``tol`` of zero against an infinite bound is taken
    as round-off and skipped instead of sending the bound to ``-inf``.
    """
    rlo, rhi = _row_bounds(lp)
    d_struct = lp.c - (lp.A.T @ y if lp.m else 0.0)
    total = lp.obj_offset
    for d, lo, hi in zip(np.concatenate([d_struct, y]),
                         np.concatenate([lp.lb, rlo]), np.concatenate([lp.ub, rhi])):
        bound = lo if d > 0 else hi
        if d == 0:
            continue
        if math.isfinite(bound):
            total += d * bound
        elif abs(d) > tol:
            return -math.inf
    return total
