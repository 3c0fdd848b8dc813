"""LP problem representations and canonicalization to standard form.

Boxed form:     min c.x  s.t.  G x >= h,  Keq x = b,  lb <= x <= ub
Standard form:  min c.x  s.t.  K x = b,   x >= 0

Canonicalization rules (recorded per column in the VarMap):
  * finite lower bound      -> shift x = z + lb (z >= 0)
  * lb = -inf, finite ub    -> mirror x = ub - z (z >= 0)
  * free (both infinite)    -> split x = z+ - z-
  * residual finite ub      -> extra row z + s = ub - lb with slack s
  * inequality row G x >= h -> surplus: G x - s = h with s >= 0
Shifts and mirrors move constants into the right-hand sides and into an
objective offset, so that standard and boxed objective values agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ProblemError(ValueError):
    """Invalid problem data (dimension mismatch, lb > ub, ...)."""


def _as_matrix(a, rows: int | None, cols: int, name: str) -> np.ndarray:
    a = np.zeros((0, cols)) if a is None else np.asarray(a, dtype=float)
    if a.size == 0:
        a = a.reshape((0, cols))
    if a.ndim != 2:
        raise ProblemError(f"{name} must be a matrix")
    if rows is not None and a.shape[0] != rows:
        raise ProblemError(f"{name} has {a.shape[0]} rows, expected {rows}")
    if a.shape[1] != cols:
        raise ProblemError(f"{name} has {a.shape[1]} columns, expected {cols}")
    return a


@dataclass
class LpProblem:
    """A boxed-form LP. Entries of lb/ub may be +-inf."""

    c: np.ndarray
    G: np.ndarray
    h: np.ndarray
    Keq: np.ndarray
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    name: str = ""
    obj_offset: float = 0.0

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        n = self.c.shape[0]
        self.h = np.asarray(self.h, dtype=float).reshape(-1)
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        self.G = _as_matrix(self.G, len(self.h), n, "G")
        self.Keq = _as_matrix(self.Keq, len(self.b), n, "Keq")
        self.lb = np.asarray(self.lb, dtype=float).reshape(-1)
        self.ub = np.asarray(self.ub, dtype=float).reshape(-1)
        if self.lb.shape != (n,) or self.ub.shape != (n,):
            raise ProblemError("lb/ub must have the same length as c")
        if np.isnan(self.c).any() or np.isnan(self.G).any() or np.isnan(self.Keq).any():
            raise ProblemError("problem data contains NaN")
        if (self.lb > self.ub).any():
            bad = int(np.argmax(self.lb > self.ub))
            raise ProblemError(f"lb[{bad}] > ub[{bad}] ({self.lb[bad]} > {self.ub[bad]})")

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def m1(self) -> int:
        return self.G.shape[0]

    @property
    def m2(self) -> int:
        return self.Keq.shape[0]

    def objective_value(self, x: np.ndarray) -> float:
        return float(self.c @ x) + self.obj_offset

    def constraint_violation(self, x: np.ndarray) -> float:
        """Max violation of G x >= h, Keq x = b and the bounds."""
        viol = 0.0
        if self.m1:
            viol = max(viol, float(np.max(self.h - self.G @ x, initial=0.0)))
        if self.m2:
            viol = max(viol, float(np.max(np.abs(self.Keq @ x - self.b), initial=0.0)))
        finite_l = np.isfinite(self.lb)
        finite_u = np.isfinite(self.ub)
        if finite_l.any():
            viol = max(viol, float(np.max(self.lb[finite_l] - x[finite_l], initial=0.0)))
        if finite_u.any():
            viol = max(viol, float(np.max(x[finite_u] - self.ub[finite_u], initial=0.0)))
        return viol


# Column roles in the standard-form variable map.
DIRECT = "direct"
SHIFT = "shift"
MIRROR = "mirror"
SPLIT_POS = "split+"
SPLIT_NEG = "split-"
SLACK = "slack"


@dataclass(frozen=True)
class ColumnRole:
    kind: str
    orig: int  # original variable index, or row index for slacks
    offset: float = 0.0  # lb for shifts, ub for mirrors


@dataclass
class VarMap:
    """Per-column record of the boxed -> standard transformation."""

    n_orig: int
    cols: list[ColumnRole] = field(default_factory=list)

    @property
    def trivial(self) -> bool:
        """True when the transformation is the identity on the variables."""
        return all(
            r.kind == DIRECT and r.orig == j for j, r in enumerate(self.cols)
        ) and len(self.cols) == self.n_orig


@dataclass
class StandardLp:
    """min c.x s.t. K x = b, x >= 0, plus the map back to boxed form."""

    K: np.ndarray
    b: np.ndarray
    c: np.ndarray
    var_map: VarMap
    obj_offset: float = 0.0
    name: str = ""

    def __post_init__(self):
        self.K = np.asarray(self.K, dtype=float)
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        if self.K.shape != (len(self.b), len(self.c)):
            raise ProblemError(
                f"K is {self.K.shape}, expected ({len(self.b)}, {len(self.c)})"
            )

    @property
    def m(self) -> int:
        return self.K.shape[0]

    @property
    def n(self) -> int:
        return self.K.shape[1]

    def objective_value(self, x: np.ndarray) -> float:
        return float(self.c @ x) + self.obj_offset


@dataclass
class SaddleProblem:
    """Saddle-point view of a boxed LP: stacked constraints plus sign info."""

    K: np.ndarray
    q: np.ndarray
    primal_box: tuple[np.ndarray, np.ndarray]
    dual_sign_mask: np.ndarray  # True on rows whose dual must be >= 0

    def __post_init__(self):
        if self.K.shape[0] != len(self.q):
            raise ProblemError("stacked K row count must match len(q)")
        if len(self.dual_sign_mask) != len(self.q):
            raise ProblemError("dual_sign_mask must have one entry per row")


def saddle_problem(p: LpProblem) -> SaddleProblem:
    K = np.vstack([p.G, p.Keq]) if p.m1 + p.m2 else np.zeros((0, p.n))
    q = np.concatenate([p.h, p.b])
    mask = np.zeros(p.m1 + p.m2, dtype=bool)
    mask[: p.m1] = True
    return SaddleProblem(K=K, q=q, primal_box=(p.lb.copy(), p.ub.copy()), dual_sign_mask=mask)


def to_standard_form(p: LpProblem) -> StandardLp:
    """Canonicalize a boxed LP to min c.x s.t. K x = b, x >= 0."""
    n = p.n
    h = p.h.copy()
    b = p.b.copy()
    offset = p.obj_offset

    cols: list[ColumnRole] = []
    col_vecs_G: list[np.ndarray] = []
    col_vecs_E: list[np.ndarray] = []
    c_vals: list[float] = []
    ub_rows: list[tuple[int, float]] = []  # (standard column, residual upper bound)

    for j in range(n):
        gj, ej, cj = p.G[:, j], p.Keq[:, j], p.c[j]
        lj, uj = p.lb[j], p.ub[j]
        if np.isfinite(lj):
            # x = z + lb, z >= 0
            if lj != 0.0:
                h -= gj * lj
                b -= ej * lj
                offset += cj * lj
                cols.append(ColumnRole(SHIFT, j, lj))
            else:
                cols.append(ColumnRole(DIRECT, j))
            col_vecs_G.append(gj)
            col_vecs_E.append(ej)
            c_vals.append(cj)
            if np.isfinite(uj):
                ub_rows.append((len(cols) - 1, uj - lj))
        elif np.isfinite(uj):
            # x = ub - z, z >= 0
            h -= gj * uj
            b -= ej * uj
            offset += cj * uj
            cols.append(ColumnRole(MIRROR, j, uj))
            col_vecs_G.append(-gj)
            col_vecs_E.append(-ej)
            c_vals.append(-cj)
        else:
            # free: x = z+ - z-
            cols.append(ColumnRole(SPLIT_POS, j))
            col_vecs_G.append(gj)
            col_vecs_E.append(ej)
            c_vals.append(cj)
            cols.append(ColumnRole(SPLIT_NEG, j))
            col_vecs_G.append(-gj)
            col_vecs_E.append(-ej)
            c_vals.append(-cj)

    n_var = len(cols)
    m1, m2, m3 = p.m1, p.m2, len(ub_rows)
    n_slack = m1 + m3
    m = m1 + m2 + m3
    K = np.zeros((m, n_var + n_slack))
    rhs = np.zeros(m)

    if n_var:
        if m1:
            K[:m1, :n_var] = np.column_stack(col_vecs_G)
        if m2:
            K[m1 : m1 + m2, :n_var] = np.column_stack(col_vecs_E)
    rhs[:m1] = h
    rhs[m1 : m1 + m2] = b

    # Surplus variables turn G x >= h into G x - s = h.
    for i in range(m1):
        K[i, n_var + i] = -1.0
        cols.append(ColumnRole(SLACK, i))
    # Residual upper bounds become z + s = ub - lb.
    for r, (col, cap) in enumerate(ub_rows):
        K[m1 + m2 + r, col] = 1.0
        K[m1 + m2 + r, n_var + m1 + r] = 1.0
        rhs[m1 + m2 + r] = cap
        cols.append(ColumnRole(SLACK, m1 + m2 + r))

    c_std = np.concatenate([np.asarray(c_vals, dtype=float), np.zeros(n_slack)])
    return StandardLp(
        K=K,
        b=rhs,
        c=c_std,
        var_map=VarMap(n_orig=n, cols=cols),
        obj_offset=offset,
        name=p.name,
    )


def recover_solution(s: StandardLp, x_std: np.ndarray) -> np.ndarray:
    """Map a standard-form point back to boxed-form variables."""
    x_std = np.asarray(x_std, dtype=float)
    if x_std.shape != (s.n,):
        raise ProblemError(f"expected standard vector of length {s.n}, got {x_std.shape}")
    x = np.zeros(s.var_map.n_orig)
    for k, role in enumerate(s.var_map.cols):
        if role.kind == DIRECT:
            x[role.orig] += x_std[k]
        elif role.kind == SHIFT:
            x[role.orig] += x_std[k] + role.offset
        elif role.kind == MIRROR:
            x[role.orig] += role.offset - x_std[k]
        elif role.kind == SPLIT_POS:
            x[role.orig] += x_std[k]
        elif role.kind == SPLIT_NEG:
            x[role.orig] -= x_std[k]
        # slacks do not map back
    return x


def standard_dual_to_boxed(s: StandardLp, y_std: np.ndarray, m1: int, m2: int) -> np.ndarray:
    """Duals of the original G/Keq rows (standard rows are ordered G, Keq, ub)."""
    y_std = np.asarray(y_std, dtype=float)
    return y_std[: m1 + m2].copy()
