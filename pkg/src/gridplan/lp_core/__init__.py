from .model import (
    FAMILIES,
    ROW_FAMILIES,
    Row,
    VariableTable,
    VarRef,
    build_constraints,
    build_lp,
    build_objective,
    build_variables,
    shift_benefit,
    shift_targets,
)
from .mps import MpsError, MpsExport, emit_mps, parse_mps, rename_back, same_instance
from .program import LinearProgram, LPBuilder, ModelError

__all__ = [
    "FAMILIES", "ROW_FAMILIES", "Row", "VariableTable", "VarRef", "build_constraints",
    "build_lp", "build_objective", "build_variables", "shift_benefit", "shift_targets",
    "MpsError", "MpsExport", "emit_mps", "parse_mps", "rename_back", "same_instance",
    "LinearProgram", "LPBuilder", "ModelError",
]
