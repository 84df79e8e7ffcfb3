"""Fixed-format MPS export and a matching reader.

Names are limited to 8 characters.  Longer or colliding names are renamed
deterministically (``prefix~k``) and the mapping back to the original names
is returned with the text.  Numbers are written in shortest round-trip form,
which may run past the classic 12-character field; readers that split on
whitespace (and this module's reader) handle that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .program import LinearProgram, LPBuilder

OBJ_ROW = "COST"
_POS = (1, 4, 14, 24, 39, 49)


class MpsError(ValueError):
    pass


@dataclass
class MpsExport:
    text: str
    col_map: dict[str, str] = field(default_factory=dict)  # mps name -> original
    row_map: dict[str, str] = field(default_factory=dict)

    def name_map(self) -> dict:
        return {"columns": self.col_map, "rows": self.row_map}


def _line(*fields: str) -> str:
    out = ""
    for pos, f in zip(_POS, fields):
        if not f:
            continue
        out = out.ljust(pos) if len(out) < pos else out + " "
        out += f
    return out.rstrip()


def _num(v: float) -> str:
    return repr(float(v))


def _short_names(names: tuple[str, ...], reserved: set[str]) -> tuple[list[str], dict[str, str]]:
    out: list[str] = []
    mapping: dict[str, str] = {}
    used = set(reserved)
    for name in names:
        short = name if len(name) <= 8 and " " not in name else name.replace(" ", "_")[:8]
        k = 0
        while short in used:
            k += 1
            suffix = f"~{k}"
            short = name.replace(" ", "_")[: 8 - len(suffix)] + suffix
        used.add(short)
        out.append(short)
        if short != name:
            mapping[short] = name
    return out, mapping


def emit_mps(lp: LinearProgram) -> MpsExport:
    cols, col_map = _short_names(lp.col_names, set())
    rows, row_map = _short_names(lp.row_names, {OBJ_ROW})
    lines = [f"NAME          {lp.name[:8] or 'LP'}"]
    for short, label in zip(rows, lp.row_labels):
        if label:
            lines.append(f"* LABEL {short} {label}")
    lines.append("ROWS")
    lines.append(_line("N", OBJ_ROW))
    for short, s in zip(rows, lp.sense):
        lines.append(_line(s, short))

    lines.append("COLUMNS")
    A = lp.A.tocsc()
    in_int = False
    for j, name in enumerate(cols):
        if lp.integral[j] and not in_int:
            lines.append(_line("", "MARKER", "'MARKER'", "", "'INTORG'"))
            in_int = True
        elif not lp.integral[j] and in_int:
            lines.append(_line("", "MARKER", "'MARKER'", "", "'INTEND'"))
            in_int = False
        entries = []
        if lp.c[j] != 0.0:
            entries.append((OBJ_ROW, lp.c[j]))
        lo, hi = A.indptr[j], A.indptr[j + 1]
        entries += [(rows[i], v) for i, v in zip(A.indices[lo:hi], A.data[lo:hi])]
        if not entries:
            # keep the column declared so the reader sees it
            entries.append((OBJ_ROW, 0.0))
        for row, v in entries:
            lines.append(_line("", name, row, _num(v)))
    if in_int:
        lines.append(_line("", "MARKER", "'MARKER'", "", "'INTEND'"))

    lines.append("RHS")
    if lp.obj_offset != 0.0:
        lines.append(_line("", "RHS", OBJ_ROW, _num(-lp.obj_offset)))
    for short, v in zip(rows, lp.rhs):
        if v != 0.0:
            lines.append(_line("", "RHS", short, _num(v)))
    lines.append("RANGES")

    lines.append("BOUNDS")
    for name, lb, ub, is_int in zip(cols, lp.lb, lp.ub, lp.integral):
        if lb == ub:
            lines.append(_line("FX", "BND", name, _num(lb)))
            continue
        if lb == -math.inf and ub == math.inf:
            lines.append(_line("FR", "BND", name))
            continue
        if lb == -math.inf:
            lines.append(_line("MI", "BND", name))
        elif lb != 0.0 or ub < 0.0:
            lines.append(_line("LO", "BND", name, _num(lb)))
        if ub != math.inf:
            lines.append(_line("UP", "BND", name, _num(ub)))
        elif is_int:
            lines.append(_line("PL", "BND", name))
    lines.append("ENDATA")
    return MpsExport("\n".join(lines) + "\n", col_map, row_map)


def parse_mps(text: str) -> LinearProgram:
    """Read MPS text (fixed or free spacing) back into a :class:`LinearProgram`."""
    section = None
    name = "LP"
    labels: dict[str, str] = {}
    row_order: list[str] = []
    sense: dict[str, str] = {}
    obj_row: str | None = None
    col_order: list[str] = []
    coef: dict[str, list[tuple[str, float]]] = {}
    integral: dict[str, bool] = {}
    rhs: dict[str, float] = {}
    bounds: dict[str, list[float]] = {}
    in_int = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        if raw.startswith("*"):
            parts = raw[1:].split()
            if len(parts) == 3 and parts[0] == "LABEL":
                labels[parts[1]] = parts[2]
            continue
        if not raw[0].isspace():
            parts = raw.split()
            section = parts[0]
            if section == "NAME" and len(parts) > 1:
                name = parts[1]
            elif section not in ("NAME", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA"):
                raise MpsError(f"line {lineno}: unknown section {section!r}")
            continue
        parts = raw.split()
        try:
            if section == "ROWS":
                kind, rname = parts
                if kind == "N":
                    if obj_row is None:
                        obj_row = rname
                    continue
                if kind not in ("L", "E", "G"):
                    raise MpsError(f"line {lineno}: bad row type {kind!r}")
                row_order.append(rname)
                sense[rname] = kind
            elif section == "COLUMNS":
                if len(parts) >= 3 and parts[1] == "'MARKER'":
                    in_int = parts[2] == "'INTORG'"
                    continue
                cname = parts[0]
                if cname not in coef:
                    col_order.append(cname)
                    coef[cname] = []
                    integral[cname] = in_int
                for k in range(1, len(parts), 2):
                    coef[cname].append((parts[k], float(parts[k + 1])))
            elif section == "RHS":
                entries = parts[1:] if len(parts) % 2 == 1 else parts
                for k in range(0, len(entries), 2):
                    rhs[entries[k]] = float(entries[k + 1])
            elif section == "RANGES":
                raise MpsError(f"line {lineno}: RANGES entries are not supported")
            elif section == "BOUNDS":
                kind, _, cname = parts[:3]
                val = float(parts[3]) if len(parts) > 3 else 0.0
                b = bounds.setdefault(cname, [0.0, math.inf])
                if kind == "UP":
                    b[1] = val
                elif kind == "LO":
                    b[0] = val
                elif kind == "FX":
                    b[0] = b[1] = val
                elif kind == "FR":
                    b[0], b[1] = -math.inf, math.inf
                elif kind == "MI":
                    b[0] = -math.inf
                elif kind == "PL":
                    b[1] = math.inf
                elif kind == "BV":
                    b[0], b[1] = 0.0, 1.0
                    integral[cname] = True
                else:
                    raise MpsError(f"line {lineno}: bound type {kind!r} not supported")
            elif section in (None, "NAME", "ENDATA"):
                raise MpsError(f"line {lineno}: data outside a section")
        except (ValueError, IndexError) as exc:
            if isinstance(exc, MpsError):
                raise
            raise MpsError(f"line {lineno}: cannot parse {raw.strip()!r}") from None

    builder = LPBuilder(name=name)
    row_index = {r: i for i, r in enumerate(row_order)}
    costs = {}
    for cname in col_order:
        lo, hi = bounds.get(cname, [0.0, math.inf])
        j = builder.add_var(cname, lo, hi, 0.0, integral[cname])
        for rname, v in coef[cname]:
            if rname == obj_row:
                costs[j] = costs.get(j, 0.0) + v
    for j, v in costs.items():
        builder.set_cost(j, v)
    terms: list[list[tuple[int, float]]] = [[] for _ in row_order]
    for j, cname in enumerate(col_order):
        for rname, v in coef[cname]:
            if rname == obj_row:
                continue
            if rname not in row_index:
                raise MpsError(f"column {cname} references unknown row {rname!r}")
            terms[row_index[rname]].append((j, v))
    for rname, t in zip(row_order, terms):
        builder.add_row(rname, labels.get(rname, ""), t, sense[rname], rhs.get(rname, 0.0))
    lp = builder.build()
    offset = -rhs.get(obj_row, 0.0) if obj_row else 0.0
    if offset:
        lp = LinearProgram(lp.col_names, lp.lb, lp.ub, lp.c, lp.A, lp.sense, lp.rhs,
                           lp.row_names, lp.row_labels, lp.integral, lp.name, offset)
    return lp


def rename_back(lp: LinearProgram, export: MpsExport) -> LinearProgram:
    """Restore original names on an LP parsed from ``export.text``."""
    cols = tuple(export.col_map.get(c, c) for c in lp.col_names)
    rows = tuple(export.row_map.get(r, r) for r in lp.row_names)
    return LinearProgram(cols, lp.lb, lp.ub, lp.c, lp.A, lp.sense, lp.rhs, rows,
                         lp.row_labels, lp.integral, lp.name, lp.obj_offset)


def same_instance(a: LinearProgram, b: LinearProgram) -> bool:
    """True if ``a`` and ``b`` are the same LP up to row/column order."""
    if sorted(a.col_names) != sorted(b.col_names) or sorted(a.row_names) != sorted(b.row_names):
        return False
    cp = [b.col_names.index(n) for n in a.col_names]
    rp = [b.row_names.index(n) for n in a.row_names]
    if not (np.array_equal(a.lb, b.lb[cp]) and np.array_equal(a.ub, b.ub[cp])
            and np.array_equal(a.c, b.c[cp]) and np.array_equal(a.integral, b.integral[cp])):
        return False
    if [a.sense[i] for i in range(a.m)] != [b.sense[i] for i in rp]:
        return False
    if not np.array_equal(a.rhs, b.rhs[rp]) or a.obj_offset != b.obj_offset:
        return False
    Ab = b.A.tocsr()[rp][:, cp] if a.m and a.n else b.A
    return (a.A != Ab).nnz == 0 if a.m and a.n else True
