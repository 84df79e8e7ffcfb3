"""Sparse linear program container and an incremental builder."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

SENSES = ("L", "E", "G")  # <=, =, >=
_SENSE_TEXT = {"L": "<=", "E": "=", "G": ">="}


class ModelError(ValueError):
    """Inconsistent model construction."""


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """``min c.x + offset`` subject to ``A x (sense) rhs`` and ``lb <= x <= ub``."""

    col_names: tuple[str, ...]
    lb: np.ndarray
    ub: np.ndarray
    c: np.ndarray
    A: sp.csr_matrix
    sense: tuple[str, ...]
    rhs: np.ndarray
    row_names: tuple[str, ...]
    row_labels: tuple[str, ...]
    integral: np.ndarray
    name: str = "gridplan"
    obj_offset: float = 0.0

    @property
    def n(self) -> int:
        return len(self.col_names)

    @property
    def m(self) -> int:
        return len(self.row_names)

    def objective(self, x: np.ndarray) -> float:
        return float(self.c @ x + self.obj_offset)

    def row_activity(self, x: np.ndarray) -> np.ndarray:
        return self.A @ x if self.m else np.zeros(0)

    def max_violation(self, x: np.ndarray) -> float:
        """Largest row or bound violation of ``x`` (0 when feasible)."""
        worst = 0.0
        if self.n:
            worst = max(worst, float(np.max(self.lb - x, initial=0.0)),
                        float(np.max(x - self.ub, initial=0.0)))
        act = self.row_activity(x)
        for i, s in enumerate(self.sense):
            gap = act[i] - self.rhs[i]
            if s == "L":
                worst = max(worst, gap)
            elif s == "G":
                worst = max(worst, -gap)
            else:
                worst = max(worst, abs(gap))
        return worst

    def with_bounds(self, lb: np.ndarray, ub: np.ndarray) -> LinearProgram:
        return LinearProgram(self.col_names, lb, ub, self.c, self.A, self.sense, self.rhs,
                             self.row_names, self.row_labels, self.integral, self.name,
                             self.obj_offset)

    def check(self) -> None:
        """Raise :class:`ModelError` if the instance is malformed."""
        n, m = self.n, self.m
        if self.A.shape != (m, n):
            raise ModelError(f"matrix shape {self.A.shape} != ({m}, {n})")
        for arr, what in ((self.lb, "lb"), (self.ub, "ub"), (self.c, "c"),
                          (self.integral, "integral")):
            if len(arr) != n:
                raise ModelError(f"{what} has length {len(arr)}, expected {n}")
        if len(self.rhs) != m or len(self.sense) != m or len(self.row_labels) != m:
            raise ModelError("row arrays disagree in length")
        if not np.all(np.isfinite(self.A.data)):
            raise ModelError("non-finite matrix coefficient")
        if not np.all(np.isfinite(self.c)) or not np.all(np.isfinite(self.rhs)):
            raise ModelError("non-finite objective or rhs")
        if np.any(np.isnan(self.lb)) or np.any(np.isnan(self.ub)):
            raise ModelError("NaN bound")
        if any(s not in SENSES for s in self.sense):
            raise ModelError("unknown row sense")
        if len(set(self.col_names)) != n or len(set(self.row_names)) != m:
            raise ModelError("duplicate row or column name")

    def to_json(self) -> dict:
        """Debug dump: one entry per row with its label and named terms."""
        A = self.A.tocsr()
        rows = []
        for i in range(self.m):
            lo, hi = A.indptr[i], A.indptr[i + 1]
            rows.append({
                "name": self.row_names[i],
                "label": self.row_labels[i],
                "terms": [[self.col_names[j], float(v)]
                          for j, v in zip(A.indices[lo:hi], A.data[lo:hi])],
                "sense": _SENSE_TEXT[self.sense[i]],
                "rhs": float(self.rhs[i]),
            })
        cols = [{"name": nm, "lb": _json_num(l), "ub": _json_num(u), "cost": float(c)}
                for nm, l, u, c in zip(self.col_names, self.lb, self.ub, self.c)]
        return {"name": self.name, "objective_offset": self.obj_offset,
                "columns": cols, "rows": rows}

    def dumps_json(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def _json_num(v: float) -> float | str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return float(v)


@dataclass
class LPBuilder:
    name: str = "gridplan"
    _cols: list[str] = field(default_factory=list)
    _lb: list[float] = field(default_factory=list)
    _ub: list[float] = field(default_factory=list)
    _c: list[float] = field(default_factory=list)
    _int: list[bool] = field(default_factory=list)
    _rows: list[str] = field(default_factory=list)
    _labels: list[str] = field(default_factory=list)
    _sense: list[str] = field(default_factory=list)
    _rhs: list[float] = field(default_factory=list)
    _ri: list[int] = field(default_factory=list)
    _ci: list[int] = field(default_factory=list)
    _v: list[float] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self._cols)

    def add_var(self, name: str, lb: float = 0.0, ub: float = math.inf,
                cost: float = 0.0, integral: bool = False) -> int:
        if lb > ub:
            raise ModelError(f"column {name}: lb {lb} > ub {ub}")
        self._cols.append(name)
        self._lb.append(lb)
        self._ub.append(ub)
        self._c.append(cost)
        self._int.append(integral)
        return len(self._cols) - 1

    def set_cost(self, col: int, cost: float) -> None:
        self._c[col] = cost

    def add_row(self, name: str, label: str, terms: list[tuple[int, float]],
                sense: str, rhs: float) -> int:
        if sense not in SENSES:
            raise ModelError(f"row {name}: bad sense {sense!r}")
        i = len(self._rows)
        for j, v in terms:
            if not 0 <= j < self.n:
                raise ModelError(f"row {name}: column {j} does not exist")
            if not math.isfinite(v):
                raise ModelError(f"row {name}: non-finite coefficient")
            self._ri.append(i)
            self._ci.append(j)
            self._v.append(float(v))
        self._rows.append(name)
        self._labels.append(label)
        self._sense.append(sense)
        self._rhs.append(float(rhs))
        return i

    def build(self) -> LinearProgram:
        n, m = self.n, len(self._rows)
        A = sp.csr_matrix((self._v, (self._ri, self._ci)), shape=(m, n), dtype=float)
        A.sum_duplicates()
        lp = LinearProgram(
            col_names=tuple(self._cols),
            lb=np.asarray(self._lb, dtype=float),
            ub=np.asarray(self._ub, dtype=float),
            c=np.asarray(self._c, dtype=float),
            A=A,
            sense=tuple(self._sense),
            rhs=np.asarray(self._rhs, dtype=float),
            row_names=tuple(self._rows),
            row_labels=tuple(self._labels),
            integral=np.asarray(self._int, dtype=bool),
            name=self.name,
        )
        lp.check()
        return lp
