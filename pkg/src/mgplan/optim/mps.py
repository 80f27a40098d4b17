"""Fixed-format MPS serialization.

The writer pads every name field to one common width so the column layout is
identical for identical programs.  Integer columns are wrapped in
INTORG/INTEND marker pairs.  Bounds are written explicitly for every variable
because reader defaults for integer columns differ between solvers.  The
reader accepts the same dialect back (token-based, so free-format files parse
too) and exists mainly to round-trip what the writer emits.
"""
from __future__ import annotations

import numpy as np

from .program import MixedIntegerProgram, ProgramError

_SENSE_TO_TAG = {"<=": "L", ">=": "G", "=": "E"}
_TAG_TO_SENSE = {v: k for k, v in _SENSE_TO_TAG.items()}


def _fmt(value: float) -> str:
    for digits in range(10, 0, -1):
        text = f"{value:.{digits}g}"
        if len(text) <= 12:
            return text
    return f"{value:.1g}"


def export_mps(program: MixedIntegerProgram, path) -> None:
    """Write the program to `path` in fixed-format MPS."""
    names = list(program.var_names) + [row.name for row in program.rows]
    for name in names:
        if len(name) > 255:
            raise ProgramError(f"name too long for MPS: {name!r}")
        if " " in name or "'" in name:
            raise ProgramError(f"name not MPS-safe: {name!r}")
    width = max([8] + [len(n) for n in names])

    def rec(f1, f2, f3="", f4="", f5="", f6=""):
        line = f" {f1:<3}{f2:<{width}}  {f3:<{width}}  {f4:<12}"
        if f5:
            line += f"  {f5:<{width}}  {f6:<12}"
        return line.rstrip()

    lines = [f"NAME          {getattr(program, 'name', 'PROGRAM')}", "ROWS",
             rec("N", "COST")]
    for row in program.rows:
        lines.append(rec(_SENSE_TO_TAG[row.sense], row.name))

    # column-major coefficient table
    by_col: dict[int, list[tuple[str, float]]] = {j: [] for j in range(program.num_vars)}
    for j, cost in sorted(program.obj.items()):
        if cost != 0.0:
            by_col[j].append(("COST", cost))
    for row in program.rows:
        for j, coeff in sorted(row.coeffs.items()):
            by_col[j].append((row.name, coeff))

    lines.append("COLUMNS")
    in_int = False
    marker = 0
    for j in range(program.num_vars):
        want_int = program.is_integer[j]
        if want_int and not in_int:
            lines.append(rec("", f"M{marker}", "'MARKER'", "", "'INTORG'", ""))
            marker += 1
            in_int = True
        elif not want_int and in_int:
            lines.append(rec("", f"M{marker}", "'MARKER'", "", "'INTEND'", ""))
            marker += 1
            in_int = False
        col = program.var_names[j]
        entries = by_col[j]
        if not entries:
            entries = [("COST", 0.0)]  # keep empty columns visible to readers
        for k in range(0, len(entries), 2):
            pair = entries[k:k + 2]
            if len(pair) == 2:
                (r1, v1), (r2, v2) = pair
                lines.append(rec("", col, r1, _fmt(v1), r2, _fmt(v2)))
            else:
                lines.append(rec("", col, pair[0][0], _fmt(pair[0][1])))
    if in_int:
        lines.append(rec("", f"M{marker}", "'MARKER'", "", "'INTEND'", ""))

    lines.append("RHS")
    if program.obj_offset != 0.0:
        lines.append(rec("", "RHS1", "COST", _fmt(-program.obj_offset)))
    for row in program.rows:
        if row.rhs != 0.0:
            lines.append(rec("", "RHS1", row.name, _fmt(row.rhs)))
    lines.append("RANGES")
    lines.append("BOUNDS")
    for j in range(program.num_vars):
        col = program.var_names[j]
        lo, up = program.lower[j], program.upper[j]
        if lo == up:
            lines.append(rec("FX", "BND1", col, _fmt(lo)))
            continue
        if not np.isfinite(lo) and not np.isfinite(up):
            lines.append(rec("FR", "BND1", col))
            continue
        if np.isfinite(lo):
            lines.append(rec("LO", "BND1", col, _fmt(lo)))
        else:
            lines.append(rec("MI", "BND1", col))
        if np.isfinite(up):
            lines.append(rec("UP", "BND1", col, _fmt(up)))
    lines.append("ENDATA")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mps(path) -> MixedIntegerProgram:
    """Parse an MPS file written by export_mps (or any token-clean file)."""
    program = MixedIntegerProgram()
    section = None
    obj_row = None
    senses: dict[str, str] = {}
    rows_seen: dict[str, dict[str, float]] = {}
    rhs: dict[str, float] = {}
    ranges: dict[str, float] = {}
    integer_mode = False
    columns: dict[str, list[tuple[str, float]]] = {}
    int_cols: set[str] = set()
    explicit_lo: set[str] = set()
    bounds: dict[str, list[float]] = {}

    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip() or raw.lstrip().startswith("*"):
                continue
            if raw[0] not in " \t":
                head = raw.split()
                section = head[0].upper()
                if section == "ENDATA":
                    break
                continue
            tok = raw.split()
            if section == "ROWS":
                tag, name = tok[0].upper(), tok[1]
                if tag == "N":
                    if obj_row is None:
                        obj_row = name
                    continue
                if tag not in _TAG_TO_SENSE:
                    raise ProgramError(f"line {lineno}: unknown row tag {tag}")
                senses[name] = _TAG_TO_SENSE[tag]
                rows_seen[name] = {}
            elif section == "COLUMNS":
                if len(tok) >= 3 and tok[1] == "'MARKER'":
                    integer_mode = tok[2] == "'INTORG'"
                    continue
                if "'MARKER'" in tok:
                    integer_mode = "'INTORG'" in tok
                    continue
                col = tok[0]
                if col not in columns:
                    columns[col] = []
                    if integer_mode:
                        int_cols.add(col)
                for k in range(1, len(tok) - 1, 2):
                    columns[col].append((tok[k], float(tok[k + 1])))
            elif section == "RHS":
                for k in range(1, len(tok) - 1, 2):
                    rhs[tok[k]] = float(tok[k + 1])
            elif section == "RANGES":
                for k in range(1, len(tok) - 1, 2):
                    ranges[tok[k]] = float(tok[k + 1])
            elif section == "BOUNDS":
                btype = tok[0].upper()
                col = tok[2]
                entry = bounds.setdefault(col, [0.0, np.inf])
                if btype in ("LO", "UP", "FX"):
                    val = float(tok[3])
                    if btype in ("LO", "FX"):
                        entry[0] = val
                        explicit_lo.add(col)
                    if btype in ("UP", "FX"):
                        entry[1] = val
                        if val < 0 and col not in explicit_lo:
                            entry[0] = -np.inf
                elif btype == "FR":
                    entry[0], entry[1] = -np.inf, np.inf
                elif btype == "MI":
                    entry[0] = -np.inf
                elif btype == "PL":
                    entry[1] = np.inf
                elif btype == "BV":
                    entry[0], entry[1] = 0.0, 1.0
                    int_cols.add(col)
                else:
                    raise ProgramError(f"line {lineno}: unknown bound {btype}")

    if obj_row is None:
        raise ProgramError("no objective row")
    for col, entries in columns.items():
        lo, up = bounds.get(col, [0.0, np.inf])
        if col in int_cols and col not in bounds:
            up = 1.0  # classic reader default inside INTORG
        obj = sum(v for r, v in entries if r == obj_row)
        program.add_var(col, lb=lo, ub=up, integer=col in int_cols, obj=obj)
        for row_name, coeff in entries:
            if row_name == obj_row:
                continue
            if row_name not in rows_seen:
                raise ProgramError(f"column {col} references unknown row {row_name}")
            rows_seen[row_name][col] = rows_seen[row_name].get(col, 0.0) + coeff
    program.obj_offset = -rhs.get(obj_row, 0.0)
    for name, sense in senses.items():
        b = rhs.get(name, 0.0)
        if name in ranges:
            raise ProgramError("ranged rows not supported")
        program.add_row(rows_seen[name], sense, b, name=name)
    return program
