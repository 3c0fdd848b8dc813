"""Independent ground-truth engines used by tests and the acceptance suite.

Everything here is implemented from scratch so checks stay self-contained:
a two-phase revised simplex with Bland's rule, brute-force vertex
enumeration (standard and boxed forms), dense extreme singular/eigen
values via Householder tridiagonalization plus the QL sweep, and a
Sturm-sequence bisection eigensolver that serves as the second,
independent tridiagonal method. None of these run in the solver hot path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .normest import tridiag_eigenvalues
from .problem import LpProblem, StandardLp

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class OracleError(RuntimeError):
    """Oracle failed to produce a solution (size cap, pivot breakdown)."""


@dataclass
class OracleSolution:
    objective: float
    x: np.ndarray
    status: str
    y: np.ndarray | None = None  # dual estimate from the optimal basis


# --------------------------------------------------------------------------
# Revised simplex, Bland's rule
# --------------------------------------------------------------------------


def _simplex_core(A, rhs, c, basis, tol=1e-9, max_pivots=200_000):
    """Minimize c.x over Ax = rhs, x >= 0 from a starting basis.

    Returns (basis, x, y, status). Bland's rule (lowest-index entering and
    leaving variables) guarantees termination on degenerate instances.
    """
    m, n = A.shape
    basis = list(basis)
    for _ in range(max_pivots):
        B = A[:, basis]
        try:
            xB = np.linalg.solve(B, rhs)
            y = np.linalg.solve(B.T, c[basis])
        except np.linalg.LinAlgError as e:
            raise OracleError(f"singular basis in simplex: {e}") from e
        reduced = c - A.T @ y
        entering = -1
        for j in range(n):
            if j not in basis and reduced[j] < -tol:
                entering = j
                break
        if entering < 0:
            x = np.zeros(n)
            x[basis] = xB
            return basis, x, y, OPTIMAL
        d = np.linalg.solve(B, A[:, entering])
        pos = d > tol
        if not pos.any():
            return basis, None, y, UNBOUNDED
        ratios = np.full(m, np.inf)
        ratios[pos] = xB[pos] / d[pos]
        best = ratios.min()
        # Bland tie-break: smallest basic variable index among the minimizers
        leave_row = min(
            (i for i in range(m) if ratios[i] <= best + 1e-12),
            key=lambda i: basis[i],
        )
        basis[leave_row] = entering
    raise OracleError("pivot limit exceeded")


def simplex_solve(std: StandardLp, tol: float = 1e-9) -> OracleSolution:
    """Two-phase revised simplex for min c.x s.t. Kx = b, x >= 0."""
    m, n = std.m, std.n
    if n > 500:
        raise OracleError(f"dense simplex oracle capped at 500 columns, got {n}")
    A = std.K.copy()
    rhs = std.b.copy()
    flip = rhs < 0
    A[flip] *= -1.0
    rhs[flip] = -rhs[flip]

    # Phase 1: artificial basis.
    A1 = np.hstack([A, np.eye(m)])
    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    basis, x1, _, status = _simplex_core(A1, rhs, c1, list(range(n, n + m)), tol)
    if status != OPTIMAL:
        raise OracleError("phase 1 did not terminate at an optimum")
    if float(c1 @ x1) > 1e-7 * (1.0 + abs(rhs).max(initial=0.0)):
        return OracleSolution(objective=math.nan, x=np.full(n, math.nan),
                              status=INFEASIBLE)

    # Drive leftover artificials out of the basis (or drop redundant rows).
    keep_rows = list(range(m))
    for i in range(m):
        if basis[i] < n:
            continue
        B = A1[np.ix_(keep_rows, [basis[r] for r in keep_rows])]
        ei = np.zeros(len(keep_rows))
        ei[keep_rows.index(i)] = 1.0
        u = np.linalg.solve(B.T, ei)
        row = u @ A[keep_rows, :]
        pivot = -1
        for j in range(n):
            if j not in basis and abs(row[j]) > tol:
                pivot = j
                break
        if pivot >= 0:
            basis[i] = pivot
        else:
            keep_rows.remove(i)  # redundant constraint
    rows = keep_rows
    A2 = A[rows, :]
    rhs2 = rhs[rows]
    basis2 = [basis[i] for i in rows]
    if any(bi >= n for bi in basis2):
        raise OracleError("could not eliminate artificial variables")

    basis2, x, y, status = _simplex_core(A2, rhs2, std.c, basis2, tol)
    if status == UNBOUNDED:
        return OracleSolution(objective=-math.inf, x=np.full(n, math.nan),
                              status=UNBOUNDED)
    x = np.where(np.abs(x) < 1e-12, 0.0, x)
    # undo the row flips so the dual matches the original row orientation
    y_full = np.zeros(m)
    sign = np.where(flip, -1.0, 1.0)
    for pos, i in enumerate(rows):
        y_full[i] = y[pos] * sign[i]
    return OracleSolution(objective=float(std.c @ x), x=x, status=OPTIMAL, y=y_full)


# --------------------------------------------------------------------------
# Vertex enumeration
# --------------------------------------------------------------------------


def vertex_enumerate(std: StandardLp) -> OracleSolution:
    """Best objective over all basic feasible solutions of Kx = b, x >= 0."""
    m, n = std.m, std.n
    if m > n:
        return OracleSolution(objective=math.nan, x=np.full(n, math.nan),
                              status=INFEASIBLE)
    if math.comb(n, m) > 1_000_000:
        raise OracleError("too many bases to enumerate")
    best_obj = math.inf
    best_x = None
    scale = 1.0 + float(np.abs(std.b).max(initial=0.0))
    for cols in combinations(range(n), m):
        B = std.K[:, cols]
        try:
            xB = np.linalg.solve(B, std.b)
        except np.linalg.LinAlgError:
            continue
        if not np.isfinite(xB).all():
            continue
        if np.linalg.norm(B @ xB - std.b) > 1e-8 * scale:
            continue
        if (xB < -1e-9).any():
            continue
        x = np.zeros(n)
        x[list(cols)] = np.maximum(xB, 0.0)
        obj = float(std.c @ x)
        if obj < best_obj - 1e-12:
            best_obj = obj
            best_x = x
    if best_x is None:
        return OracleSolution(objective=math.nan, x=np.full(n, math.nan),
                              status=INFEASIBLE)
    return OracleSolution(objective=best_obj, x=best_x, status=OPTIMAL)


def boxed_vertex_enumerate(p: LpProblem) -> OracleSolution:
    """Best objective over all vertices of the boxed feasible polytope.

    A vertex activates the m2 equalities plus n - m2 rows drawn from the
    inequalities and finite bounds. Only meaningful on feasible *bounded*
    instances (an unbounded optimum is not attained at any vertex).
    """
    n = p.n
    rows: list[np.ndarray] = [p.G[i] for i in range(p.m1)]
    rhs: list[float] = [p.h[i] for i in range(p.m1)]
    for j in range(n):
        if np.isfinite(p.lb[j]):
            e = np.zeros(n)
            e[j] = 1.0
            rows.append(e)
            rhs.append(p.lb[j])
        if np.isfinite(p.ub[j]):
            e = np.zeros(n)
            e[j] = 1.0
            rows.append(e)
            rhs.append(p.ub[j])
    k_free = n - p.m2
    if k_free < 0 or math.comb(len(rows), max(k_free, 0)) > 1_000_000:
        raise OracleError("too many active sets to enumerate")
    best_obj = math.inf
    best_x = None
    for active in combinations(range(len(rows)), k_free):
        A = np.vstack([p.Keq] + [rows[i] for i in active]) if (p.m2 or active) else None
        if A is None or A.shape != (n, n):
            continue
        bb = np.concatenate([p.b, [rhs[i] for i in active]])
        try:
            x = np.linalg.solve(A, bb)
        except np.linalg.LinAlgError:
            continue
        if not np.isfinite(x).all():
            continue
        if p.constraint_violation(x) > 1e-9:
            continue
        obj = p.objective_value(x)
        if obj < best_obj - 1e-12:
            best_obj = obj
            best_x = x
    if best_x is None:
        return OracleSolution(objective=math.nan, x=np.full(n, math.nan),
                              status=INFEASIBLE)
    return OracleSolution(objective=best_obj, x=best_x, status=OPTIMAL)


# --------------------------------------------------------------------------
# Dense spectral oracles
# --------------------------------------------------------------------------


def householder_tridiagonalize(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reduce a symmetric matrix to tridiagonal form; returns (diag, subdiag)."""
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    e = np.zeros(max(n - 1, 0))
    for k in range(n - 2):
        x = A[k + 1:, k]
        nrm = float(np.linalg.norm(x))
        if nrm == 0.0:
            e[k] = 0.0
            continue
        alpha = -math.copysign(nrm, x[0]) if x[0] != 0 else -nrm
        v = x.copy()
        v[0] -= alpha
        vn = float(np.linalg.norm(v))
        if vn == 0.0:
            e[k] = alpha
            continue
        v /= vn
        B = A[k + 1:, k + 1:]
        u = B @ v
        w = u - v * float(v @ u)
        A[k + 1:, k + 1:] = B - 2.0 * np.outer(v, w) - 2.0 * np.outer(w, v)
        A[k + 1:, k] = 0.0
        A[k, k + 1:] = 0.0
        A[k + 1, k] = alpha
        A[k, k + 1] = alpha
        e[k] = alpha
    if n >= 2:
        e[n - 2] = A[n - 1, n - 2]
    return np.diag(A).copy(), e


def dense_eig_max(A: np.ndarray) -> float:
    """Largest eigenvalue of a symmetric matrix (tridiagonalize + QL)."""
    d, e = householder_tridiagonalize(A)
    if d.size == 0:
        return 0.0
    return float(tridiag_eigenvalues(d, e).max())


def dense_svd_max(K: np.ndarray) -> float:
    """Largest singular value of K via the smaller Gram matrix."""
    K = np.asarray(K, dtype=float)
    m, n = K.shape
    if min(m, n) > 200:
        raise OracleError("dense SVD oracle capped at 200 on the short side")
    gram = K @ K.T if m <= n else K.T @ K
    lam = dense_eig_max(gram)
    return math.sqrt(max(lam, 0.0))


# --------------------------------------------------------------------------
# Sturm-sequence bisection (independent tridiagonal eigensolver)
# --------------------------------------------------------------------------


def _sturm_count(d: np.ndarray, e: np.ndarray, x: float) -> int:
    """Number of eigenvalues of T(d, e) strictly below x."""
    count = 0
    q = 1.0
    for i in range(len(d)):
        off = e[i - 1] ** 2 / q if i > 0 else 0.0
        q = d[i] - x - off
        if q == 0.0:
            q = -1e-300
        if q < 0.0:
            count += 1
    return count


def tridiag_eigenvalues_bisect(alphas, betas, max_iter: int = 120) -> np.ndarray:
    """All eigenvalues of a symmetric tridiagonal by Sturm bisection."""
    d = np.asarray(alphas, dtype=float)
    k = d.shape[0]
    if k == 0:
        return d.copy()
    b = np.asarray(betas, dtype=float)
    if b.shape[0] not in (k - 1, k):
        raise ValueError(f"betas must have length {k - 1} or {k}, got {b.shape[0]}")
    e = b[: k - 1]
    radius = np.zeros(k)
    if k > 1:
        radius[:-1] += np.abs(e)
        radius[1:] += np.abs(e)
    lo0 = float(np.min(d - radius)) - 1e-12
    hi0 = float(np.max(d + radius)) + 1e-12
    out = np.zeros(k)
    for j in range(k):
        lo, hi = lo0, hi0
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            if _sturm_count(d, e, mid) <= j:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * max(1.0, abs(lo), abs(hi)):
                break
        out[j] = 0.5 * (lo + hi)
    return out
