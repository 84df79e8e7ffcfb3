from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

STATUSES = ("optimal", "soft-infeasible", "infeasible", "unbounded", "time-limit")


class SolverError(RuntimeError):
    """Numerical breakdown inside the simplex iterations."""


@dataclass(frozen=True, eq=False)
class SolveResult:
    status: str
    objective: float
    x: np.ndarray | None
    duals: np.ndarray | None = None
    iterations: int = 0
    wall_time: float = 0.0
    gap: float = 0.0
    message: str = ""
    nodes: int = 0

    @property
    def has_solution(self) -> bool:
        return self.x is not None

    def with_status(self, status: str, message: str = "") -> SolveResult:
        return replace(self, status=status, message=message or self.message)
