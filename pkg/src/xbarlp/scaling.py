"""Ruiz equilibration and diagonal preconditioning (solver step 0).

ruiz_rescale drives every nonzero row/column infinity-norm of D1*K*D2
toward 1; diag_precond builds the primal/dual diagonal preconditioners
from absolute column/row sums of the scaled matrix. Zero rows or columns
keep scale 1 (Ruiz) or are clamped at 1/EPS_PC (preconditioner) so all
diagonals stay positive and finite.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .problem import StandardLp

EPS_PC = 1e-12


@dataclass
class ScalingInfo:
    """Row/column scalings plus the primal/dual preconditioner diagonals."""

    D1: np.ndarray
    D2: np.ndarray
    T: np.ndarray
    Sigma: np.ndarray

    def __post_init__(self):
        for name in ("D1", "D2", "T", "Sigma"):
            v = np.asarray(getattr(self, name), dtype=float)
            setattr(self, name, v)
            if not np.isfinite(v).all() or (v <= 0).any():
                raise ValueError(f"{name} entries must be positive and finite")

    def as_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("D1", "D2", "T", "Sigma")}


def ruiz_rescale(K: np.ndarray, iters: int = 10, tol: float = 1e-12):
    """Iterative infinity-norm equilibration.

    Returns (D1, D2, K_scaled) with K_scaled = diag(D1) @ K @ diag(D2).
    Runs `iters` sweeps, stopping early once all nonzero row/column norms
    are within `tol` of 1.
    """
    K = np.asarray(K, dtype=float)
    if iters < 1:
        raise ValueError("iters must be >= 1")
    m, n = K.shape
    D1 = np.ones(m)
    D2 = np.ones(n)
    S = K.copy()
    for _ in range(iters):
        r = np.max(np.abs(S), axis=1) if n else np.zeros(m)
        c = np.max(np.abs(S), axis=0) if m else np.zeros(n)
        if (np.abs(r[r > 0] - 1.0) < tol).all() and (np.abs(c[c > 0] - 1.0) < tol).all():
            break
        dr = np.ones(m)
        dr[r > 0] = 1.0 / np.sqrt(r[r > 0])
        dc = np.ones(n)
        dc[c > 0] = 1.0 / np.sqrt(c[c > 0])
        S = dr[:, None] * S * dc[None, :]
        D1 *= dr
        D2 *= dc
    return D1, D2, S


def diag_precond(K_scaled: np.ndarray, eps: float = EPS_PC):
    """Diagonal step preconditioners from absolute row/column sums.

    T_jj = 1 / max(eps, sum_i |K_ij|), Sigma_ii = 1 / max(eps, sum_j |K_ij|).
    """
    K_scaled = np.asarray(K_scaled, dtype=float)
    col_sums = np.abs(K_scaled).sum(axis=0)
    row_sums = np.abs(K_scaled).sum(axis=1)
    if (col_sums <= eps).any() or (row_sums <= eps).any():
        warnings.warn(
            "matrix has structurally empty rows or columns; "
            "preconditioner clamped at 1/eps",
            stacklevel=2,
        )
    T = 1.0 / np.maximum(eps, col_sums)
    Sigma = 1.0 / np.maximum(eps, row_sums)
    return T, Sigma


def scale_problem(s: StandardLp, si: ScalingInfo) -> StandardLp:
    """Apply (D1, D2) to a standard-form problem.

    Returns the scaled problem (D1 K D2, D1 b, D2 c); the variable map is
    carried through unchanged and applies to the *unscaled* solution
    (multiply a scaled solution by D2 first).
    """
    if si.D1.shape != (s.m,) or si.D2.shape != (s.n,):
        raise ValueError(
            f"scaling dims {si.D1.shape}/{si.D2.shape} do not match problem "
            f"({s.m}, {s.n})"
        )
    return StandardLp(
        K=si.D1[:, None] * s.K * si.D2[None, :],
        b=si.D1 * s.b,
        c=si.D2 * s.c,
        var_map=s.var_map,
        obj_offset=s.obj_offset,
        name=s.name,
    )


def scale_bounds(lb: np.ndarray, ub: np.ndarray, D2: np.ndarray):
    """Bounds transform x = D2 x_scaled, so scaled bounds are lb/D2, ub/D2.

    Infinite entries stay infinite; zero entries stay zero.
    """
    return lb / D2, ub / D2
