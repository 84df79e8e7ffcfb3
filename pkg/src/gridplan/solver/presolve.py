"""Simple presolve: fixed columns, empty rows and singleton rows.

Singleton rows are folded into column bounds.  The undo transform puts
removed columns back at their fixed values and recovers the multipliers of
folded rows from the reduced costs of the columns whose bounds they set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..lp_core.program import LinearProgram


@dataclass
class PresolveUndo:
    n: int
    m: int
    kept_cols: np.ndarray
    kept_rows: np.ndarray
    fixed_values: dict[int, float]
    # column -> (row, coefficient) that produced its current lower / upper bound
    lb_row: dict[int, tuple[int, float]] = field(default_factory=dict)
    ub_row: dict[int, tuple[int, float]] = field(default_factory=dict)

    def expand(self, x_red: np.ndarray) -> np.ndarray:
        x = np.zeros(self.n)
        x[self.kept_cols] = x_red
        for j, v in self.fixed_values.items():
            x[j] = v
        return x

    def restrict(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x)[self.kept_cols]

    def expand_duals(self, lp: LinearProgram, reduced: LinearProgram, x_red: np.ndarray,
                     y_red: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        y = np.zeros(self.m)
        y[self.kept_rows] = y_red
        d = reduced.c - (reduced.A.T @ y_red if reduced.m else 0.0)
        for k, j in enumerate(self.kept_cols):
            if d[k] > tol and j in self.lb_row and abs(x_red[k] - reduced.lb[k]) <= 1e-7:
                row, a = self.lb_row[j]
                y[row] = d[k] / a
            elif d[k] < -tol and j in self.ub_row and abs(x_red[k] - reduced.ub[k]) <= 1e-7:
                row, a = self.ub_row[j]
                y[row] = d[k] / a
        # rows touching fixed columns had their multipliers folded into the
        # fixed columns' costs; those stay zero here.
        return y


@dataclass
class PresolveResult:
    status: str  # "reduced" or "infeasible"
    lp: LinearProgram | None
    undo: PresolveUndo | None
    message: str = ""


def presolve(lp: LinearProgram, tol: float = 1e-9) -> PresolveResult:
    n, m = lp.n, lp.m
    A = lp.A.tocsr().copy()
    lb = lp.lb.astype(float).copy()
    ub = lp.ub.astype(float).copy()
    rhs = lp.rhs.astype(float).copy()
    col_alive = np.ones(n, dtype=bool)
    row_alive = np.ones(m, dtype=bool)
    fixed: dict[int, float] = {}
    offset = lp.obj_offset
    lb_row: dict[int, tuple[int, float]] = {}
    ub_row: dict[int, tuple[int, float]] = {}

    rows_of = A.tocsc()
    changed = True
    while changed:
        changed = False
        # fixed columns
        for j in np.flatnonzero(col_alive & (lb == ub)):
            v = lb[j]
            lo, hi = rows_of.indptr[j], rows_of.indptr[j + 1]
            for i, a in zip(rows_of.indices[lo:hi], rows_of.data[lo:hi]):
                if row_alive[i]:
                    rhs[i] -= a * v
            offset += lp.c[j] * v
            fixed[int(j)] = float(v)
            col_alive[j] = False
            changed = True

        for i in np.flatnonzero(row_alive):
            lo, hi = A.indptr[i], A.indptr[i + 1]
            cols = A.indices[lo:hi]
            vals = A.data[lo:hi]
            live = col_alive[cols] & (vals != 0.0)
            cols, vals = cols[live], vals[live]
            s = lp.sense[i]
            if len(cols) == 0:
                r = rhs[i]
                bad = (s == "L" and r < -tol) or (s == "G" and r > tol) or (s == "E" and abs(r) > tol)
                if bad:
                    return PresolveResult("infeasible", None, None,
                                          f"row {lp.row_names[i]} cannot hold: 0 {s} {r:g}")
                row_alive[i] = False
                changed = True
                continue
            if len(cols) != 1:
                continue
            j, a = int(cols[0]), float(vals[0])
            bound = rhs[i] / a
            sets_upper = (s == "L") == (a > 0)
            if s in ("L", "G"):
                if sets_upper:
                    if bound < ub[j]:
                        ub[j], ub_row[j] = bound, (int(i), a)
                else:
                    if bound > lb[j]:
                        lb[j], lb_row[j] = bound, (int(i), a)
            else:
                if bound < ub[j]:
                    ub[j], ub_row[j] = bound, (int(i), a)
                if bound > lb[j]:
                    lb[j], lb_row[j] = bound, (int(i), a)
            if lp.integral[j]:
                lb[j] = math.ceil(lb[j] - 1e-9) if math.isfinite(lb[j]) else lb[j]
                ub[j] = math.floor(ub[j] + 1e-9) if math.isfinite(ub[j]) else ub[j]
            if lb[j] > ub[j] + tol:
                return PresolveResult("infeasible", None, None,
                                      f"row {lp.row_names[i]} crosses bounds of column "
                                      f"{lp.col_names[j]} ({lb[j]:g} > {ub[j]:g})")
            if lb[j] > ub[j]:
                lb[j] = ub[j]
            row_alive[i] = False
            changed = True

    kept_cols = np.flatnonzero(col_alive)
    kept_rows = np.flatnonzero(row_alive)
    A_red = A[kept_rows][:, kept_cols] if len(kept_rows) else sp.csr_matrix((0, len(kept_cols)))
    reduced = LinearProgram(
        col_names=tuple(lp.col_names[j] for j in kept_cols),
        lb=lb[kept_cols],
        ub=ub[kept_cols],
        c=lp.c[kept_cols].copy(),
        A=sp.csr_matrix(A_red),
        sense=tuple(lp.sense[i] for i in kept_rows),
        rhs=rhs[kept_rows],
        row_names=tuple(lp.row_names[i] for i in kept_rows),
        row_labels=tuple(lp.row_labels[i] for i in kept_rows),
        integral=lp.integral[kept_cols].copy(),
        name=lp.name,
        obj_offset=offset,
    )
    undo = PresolveUndo(n, m, kept_cols, kept_rows, fixed,
                        {j: r for j, r in lb_row.items() if col_alive[j]},
                        {j: r for j, r in ub_row.items() if col_alive[j]})
    return PresolveResult("reduced", reduced, undo,
                          f"removed {n - len(kept_cols)} columns, {m - len(kept_rows)} rows")
