"""Problem-file ingestion (native JSON and an MPS subset) and solution files.

Native format: a JSON object with keys
    name      optional string
    minimize  objective coefficients (list of numbers)
    ineq      optional {"G": <matrix>, "h": [..]}   meaning G x >= h
    eq        optional {"K": <matrix>, "b": [..]}   meaning K x = b
    bounds    optional {"lb": [..], "ub": [..]}     default lb=0, ub="inf"
    offset    optional objective constant
A <matrix> is either a dense list of rows or a coordinate form
{"shape": [m, n], "entries": [[i, j, value], ...]}. Infinities are written
as the strings "inf" / "-inf" (never as large magic numbers).

MPS subset: NAME / OBJSENSE / ROWS / COLUMNS / RHS / RANGES / BOUNDS /
ENDATA, fixed or free field layout (both tokenize on whitespace; names with
embedded blanks are not supported). Integrality markers and BV/LI/UI bounds
are parsed and ignored: instances load as their LP relaxations.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .problem import LpProblem, ProblemError


class ParseError(ProblemError):
    """Malformed problem file; message carries line/column context."""


_INF_STRINGS = {"inf": math.inf, "+inf": math.inf, "infinity": math.inf,
                "-inf": -math.inf, "-infinity": -math.inf}


def _scalar(v, where: str) -> float:
    if isinstance(v, str):
        key = v.strip().lower()
        if key in _INF_STRINGS:
            return _INF_STRINGS[key]
        raise ParseError(f"{where}: bad numeric value {v!r}")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"{where}: bad numeric value {v!r}")
    return float(v)


def _vector(v, where: str) -> np.ndarray:
    if not isinstance(v, list):
        raise ParseError(f"{where}: expected a list")
    return np.array([_scalar(x, where) for x in v], dtype=float)


def _matrix(spec, where: str) -> np.ndarray:
    if isinstance(spec, dict):
        try:
            m, n = spec["shape"]
            entries = spec["entries"]
        except (KeyError, TypeError, ValueError):
            raise ParseError(f"{where}: coordinate matrix needs 'shape' and 'entries'")
        A = np.zeros((int(m), int(n)))
        for e in entries:
            if len(e) != 3:
                raise ParseError(f"{where}: entry {e!r} is not [row, col, value]")
            i, j, v = int(e[0]), int(e[1]), _scalar(e[2], where)
            if not (0 <= i < A.shape[0] and 0 <= j < A.shape[1]):
                raise ParseError(f"{where}: entry ({i},{j}) outside shape {A.shape}")
            A[i, j] = v
        return A
    if not isinstance(spec, list):
        raise ParseError(f"{where}: expected dense rows or a coordinate object")
    rows = [_vector(r, where) for r in spec]
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise ParseError(f"{where}: ragged rows")
    return np.array(rows, dtype=float) if rows else np.zeros((0, 0))


def load_native_json(path: str) -> LpProblem:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ParseError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be an object")
    if "minimize" not in doc:
        raise ParseError(f"{path}: missing 'minimize' objective")
    c = _vector(doc["minimize"], "minimize")
    n = len(c)

    G = np.zeros((0, n))
    h = np.zeros(0)
    if "ineq" in doc:
        G = _matrix(doc["ineq"].get("G"), "ineq.G")
        h = _vector(doc["ineq"].get("h"), "ineq.h")
        if G.size == 0:
            G = G.reshape((len(h), n)) if len(h) == 0 else G
    Keq = np.zeros((0, n))
    b = np.zeros(0)
    if "eq" in doc:
        Keq = _matrix(doc["eq"].get("K"), "eq.K")
        b = _vector(doc["eq"].get("b"), "eq.b")

    lb = np.zeros(n)
    ub = np.full(n, math.inf)
    if "bounds" in doc:
        bounds = doc["bounds"]
        if "lb" in bounds:
            lb = _vector(bounds["lb"], "bounds.lb")
        if "ub" in bounds:
            ub = _vector(bounds["ub"], "bounds.ub")
    offset = _scalar(doc.get("offset", 0.0), "offset")
    return LpProblem(c=c, G=G, h=h, Keq=Keq, b=b, lb=lb, ub=ub,
                     name=str(doc.get("name", "")), obj_offset=offset)


# --------------------------------------------------------------------------
# MPS subset
# --------------------------------------------------------------------------

_SECTIONS = {"NAME", "OBJSENSE", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA"}


def load_mps(path: str) -> LpProblem:
    row_types: dict[str, str] = {}
    row_order: list[str] = []
    obj_row: str | None = None
    col_order: list[str] = []
    col_index: dict[str, int] = {}
    entries: list[tuple[str, str, float]] = []  # (row, col, value)
    obj_entries: dict[str, float] = {}
    rhs: dict[str, float] = {}
    ranges: dict[str, float] = {}
    bounds: list[tuple[str, str, float | None]] = []
    integer_cols: set[str] = set()
    name = ""
    obj_rhs = 0.0

    def err(lineno: int, msg: str) -> ParseError:
        return ParseError(f"{path}: line {lineno}: {msg}")

    def number(tok: str, lineno: int) -> float:
        try:
            return float(tok)
        except ValueError:
            raise err(lineno, f"bad number {tok!r}")

    section = None
    in_integer = False
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            if raw.startswith("*") or not raw.strip():
                continue
            is_header = not raw[0].isspace()
            toks = raw.split()
            if is_header:
                section = toks[0].upper()
                if section not in _SECTIONS:
                    raise err(lineno, f"unsupported section {section!r}")
                if section == "NAME":
                    name = toks[1] if len(toks) > 1 else ""
                elif section == "OBJSENSE" and len(toks) > 1:
                    if toks[1].upper().startswith("MAX"):
                        raise err(lineno, "OBJSENSE MAXIMIZE is not supported")
                if section == "ENDATA":
                    break
                continue
            if section is None:
                raise err(lineno, "data before any section header")

            if section == "OBJSENSE":
                if toks[0].upper().startswith("MAX"):
                    raise err(lineno, "OBJSENSE MAXIMIZE is not supported")
            elif section == "ROWS":
                if len(toks) != 2:
                    raise err(lineno, "ROWS lines need a type and a name")
                rtype = toks[0].upper()
                if rtype not in ("N", "L", "G", "E"):
                    raise err(lineno, f"unknown row type {rtype!r}")
                if rtype == "N":
                    if obj_row is None:
                        obj_row = toks[1]
                    # extra N rows are ignored per MPS convention
                else:
                    if toks[1] in row_types:
                        raise err(lineno, f"duplicate row {toks[1]!r}")
                    row_types[toks[1]] = rtype
                    row_order.append(toks[1])
            elif section == "COLUMNS":
                if len(toks) >= 3 and toks[1] == "'MARKER'":
                    marker = toks[2].strip("'")
                    if marker == "INTORG":
                        in_integer = True
                    elif marker == "INTEND":
                        in_integer = False
                    else:
                        raise err(lineno, f"unknown marker {toks[2]!r}")
                    continue
                if len(toks) < 3 or len(toks) % 2 == 0:
                    raise err(lineno, "COLUMNS lines need a column then row/value pairs")
                col = toks[0]
                if col not in col_index:
                    col_index[col] = len(col_order)
                    col_order.append(col)
                if in_integer:
                    integer_cols.add(col)
                for i in range(1, len(toks), 2):
                    row, val = toks[i], number(toks[i + 1], lineno)
                    if row == obj_row:
                        obj_entries[col] = obj_entries.get(col, 0.0) + val
                    elif row in row_types:
                        entries.append((row, col, val))
                    else:
                        raise err(lineno, f"unknown row {row!r}")
            elif section == "RHS":
                if len(toks) < 3 or len(toks) % 2 == 0:
                    raise err(lineno, "RHS lines need a set name then row/value pairs")
                for i in range(1, len(toks), 2):
                    row, val = toks[i], number(toks[i + 1], lineno)
                    if row == obj_row:
                        obj_rhs = val
                    elif row in row_types:
                        rhs[row] = val
                    else:
                        raise err(lineno, f"unknown row {row!r}")
            elif section == "RANGES":
                if len(toks) < 3 or len(toks) % 2 == 0:
                    raise err(lineno, "RANGES lines need a set name then row/value pairs")
                for i in range(1, len(toks), 2):
                    row, val = toks[i], number(toks[i + 1], lineno)
                    if row not in row_types:
                        raise err(lineno, f"unknown row {row!r}")
                    ranges[row] = val
            elif section == "BOUNDS":
                btype = toks[0].upper()
                if btype in ("FR", "MI", "PL", "BV"):
                    if len(toks) != 3:
                        raise err(lineno, f"{btype} bound needs set and column names")
                    bounds.append((btype, toks[2], None))
                elif btype in ("UP", "LO", "FX", "UI", "LI"):
                    if len(toks) != 4:
                        raise err(lineno, f"{btype} bound needs set, column and value")
                    bounds.append((btype, toks[2], number(toks[3], lineno)))
                else:
                    raise err(lineno, f"unknown bound type {btype!r}")

    if obj_row is None:
        raise ParseError(f"{path}: no objective (N) row")

    n = len(col_order)
    c = np.zeros(n)
    for col, val in obj_entries.items():
        c[col_index[col]] = val

    dense: dict[str, np.ndarray] = {r: np.zeros(n) for r in row_order}
    for row, col, val in entries:
        dense[row][col_index[col]] += val

    # Assemble boxed form: every L/G/ranged row contributes >=-rows, E rows
    # without ranges become equalities.
    G_rows: list[np.ndarray] = []
    h_vals: list[float] = []
    E_rows: list[np.ndarray] = []
    b_vals: list[float] = []

    def add_interval(a: np.ndarray, lo: float | None, hi: float | None) -> None:
        if lo is not None:
            G_rows.append(a)
            h_vals.append(lo)
        if hi is not None:
            G_rows.append(-a)
            h_vals.append(-hi)

    for row in row_order:
        a = dense[row]
        rtype = row_types[row]
        rv = rhs.get(row, 0.0)
        if row in ranges:
            r = ranges[row]
            if rtype == "L":
                add_interval(a, rv - abs(r), rv)
            elif rtype == "G":
                add_interval(a, rv, rv + abs(r))
            else:  # E
                if r == 0.0:
                    E_rows.append(a)
                    b_vals.append(rv)
                elif r > 0:
                    add_interval(a, rv, rv + r)
                else:
                    add_interval(a, rv + r, rv)
        elif rtype == "L":
            add_interval(a, None, rv)
        elif rtype == "G":
            add_interval(a, rv, None)
        else:
            E_rows.append(a)
            b_vals.append(rv)

    lb = np.zeros(n)
    ub = np.full(n, math.inf)
    for btype, col, val in bounds:
        if col not in col_index:
            raise ParseError(f"{path}: bound on unknown column {col!r}")
        j = col_index[col]
        if btype == "UP":
            ub[j] = val
        elif btype == "LO":
            lb[j] = val
        elif btype == "FX":
            lb[j] = ub[j] = val
        elif btype == "FR":
            lb[j], ub[j] = -math.inf, math.inf
        elif btype == "MI":
            lb[j] = -math.inf
        elif btype == "PL":
            ub[j] = math.inf
        elif btype == "BV":
            lb[j], ub[j] = 0.0, 1.0
            integer_cols.add(col)
        elif btype == "UI":
            ub[j] = val
            integer_cols.add(col)
        elif btype == "LI":
            lb[j] = val
            integer_cols.add(col)

    G = np.array(G_rows) if G_rows else np.zeros((0, n))
    Keq = np.array(E_rows) if E_rows else np.zeros((0, n))
    return LpProblem(
        c=c,
        G=G,
        h=np.array(h_vals),
        Keq=Keq,
        b=np.array(b_vals),
        lb=lb,
        ub=ub,
        name=name,
        obj_offset=-obj_rhs,
    )


def load_problem(path: str, fmt: str | None = None) -> LpProblem:
    """Load a problem file. fmt is 'native-json', 'mps-subset' or None
    (pick by extension: .mps -> MPS, anything else -> native JSON)."""
    if fmt is None:
        fmt = "mps-subset" if str(path).lower().endswith(".mps") else "native-json"
    if fmt == "native-json":
        return load_native_json(path)
    if fmt == "mps-subset":
        return load_mps(path)
    raise ValueError(f"unknown format {fmt!r}")


# --------------------------------------------------------------------------
# Solution files
# --------------------------------------------------------------------------


def write_solution(path: str, payload: dict) -> None:
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        raise TypeError(f"not JSON-serializable: {type(o)}")

    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, default=default)
        fh.write("\n")


def read_solution(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)
