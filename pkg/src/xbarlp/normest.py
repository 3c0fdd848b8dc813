"""Operator-norm estimation for step sizes.

Primary path: Lanczos iteration on the symmetric block embedding of K,
with full reorthogonalization (noisy MVMs destroy three-term orthogonality
quickly). Cross-check path: classical two-sided power iteration on the
host. Both reduce to eigenvalues of a small symmetric tridiagonal matrix,
computed here by an implicit-shift QL sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .accel import Backend, MvmMode, matmul_accel

try:
    from numba import njit as _njit

    def _jit(f):
        return _njit(cache=True)(f)

except ImportError:  # pragma: no cover - numba is a declared dependency
    def _jit(f):
        return f


def _tql_kernel(d, e):
    """Implicit-shift QL on a symmetric tridiagonal (diagonal d, subdiagonal
    e with e[-1] slack). Overwrites d with the eigenvalues. Returns the number
    of eigenvalues that failed to deflate within the sweep budget (0 = ok)."""
    n = d.shape[0]
    failures = 0
    for l in range(n):
        it = 0
        while True:
            m = n - 1
            for mm in range(l, n - 1):
                dd = abs(d[mm]) + abs(d[mm + 1])
                if abs(e[mm]) + dd == dd:
                    m = mm
                    break
            if m == l:
                break
            it += 1
            if it > 50:
                failures += 1
                break
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            sg = r if g >= 0.0 else -r
            g = d[m] - d[l] + e[l] / (g + sg)
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = i > l
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return failures


_tql_jitted = _jit(_tql_kernel)


def tridiag_eigenvalues(alphas, betas) -> np.ndarray:
    """All eigenvalues of the symmetric tridiagonal T(alphas, betas).

    alphas is the diagonal (length k); betas supplies the k-1 subdiagonal
    entries (a trailing extra entry, as produced by the Lanczos recurrence,
    is ignored). Result is sorted ascending.
    """
    d = np.asarray(alphas, dtype=float).copy()
    k = d.shape[0]
    if k == 0:
        return d
    b = np.asarray(betas, dtype=float)
    if b.shape[0] not in (k - 1, k):
        raise ValueError(f"betas must have length {k - 1} or {k}, got {b.shape[0]}")
    e = np.zeros(k)
    e[: k - 1] = b[: k - 1]
    if k > 1:
        _tql_jitted(d, e)
    d.sort()
    return d


@dataclass
class LanczosResult:
    sigma1: float
    alphas: np.ndarray
    betas: np.ndarray
    iters_used: int
    ritz_values: np.ndarray
    converged: bool
    # Per-step largest |Ritz| values and their running mean. The mean is an
    # averaged estimator kept for diagnostics/statistics only; step sizes
    # always use sigma1 from the final tridiagonal.
    theta_history: np.ndarray = None
    theta_bar: float = 0.0


def lanczos_svd(
    backend: Backend,
    handle,
    dims: tuple[int, int],
    k_max: int = 100,
    eps: float = 1e-10,
    seed: int = 0,
) -> LanczosResult:
    """Estimate the dominant singular value of K from MVMs on its symmetric
    block embedding.

    Runs the three-term Lanczos recurrence with full reorthogonalization,
    breaking early when the residual norm beta drops below eps; the estimate
    is the largest |eigenvalue| of the accumulated tridiagonal.
    """
    m, n = dims
    N = m + n
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if eps <= 0:
        raise ValueError("eps must be > 0")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(N)
    v /= np.linalg.norm(v)

    Q = np.zeros((N, min(k_max, N) + 1))
    Q[:, 0] = v
    v_prev = np.zeros(N)
    beta_prev = 0.0
    alphas: list[float] = []
    betas: list[float] = []
    thetas: list[float] = []
    converged = False

    for j in range(k_max):
        w = matmul_accel(backend, handle, v, MvmMode.FULL)
        w = w - beta_prev * v_prev
        alpha = float(v @ w)
        w = w - alpha * v
        # full reorthogonalization against the whole basis built so far
        k_basis = min(j + 1, Q.shape[1])
        w -= Q[:, :k_basis] @ (Q[:, :k_basis].T @ w)
        beta = float(np.linalg.norm(w))
        alphas.append(alpha)
        betas.append(beta)
        ritz = tridiag_eigenvalues(alphas, betas)
        thetas.append(float(np.max(np.abs(ritz))))
        if beta < eps:
            converged = True
            break
        v_prev = v
        beta_prev = beta
        v = w / beta
        if j + 1 < Q.shape[1]:
            Q[:, j + 1] = v
        else:  # k_max exceeds the space dimension; recurrence would be rank-deficient
            break

    ritz_values = tridiag_eigenvalues(alphas, betas)
    theta_history = np.asarray(thetas)
    return LanczosResult(
        sigma1=float(np.max(np.abs(ritz_values))),
        alphas=np.asarray(alphas),
        betas=np.asarray(betas),
        iters_used=len(alphas),
        ritz_values=ritz_values,
        converged=converged,
        theta_history=theta_history,
        theta_bar=float(theta_history.mean()),
    )


def power_iteration_norm(K: np.ndarray, iters: int, seed: int = 0) -> float:
    """Two-sided power iteration estimate of ||K||_2 (host-side, exact).

    Repeatedly applies K^T K to a normalized vector and returns the square
    root of the final Rayleigh quotient. Used as a cross-check baseline.
    """
    K = np.asarray(K, dtype=float)
    if iters < 1:
        raise ValueError("iters must be >= 1")
    m, n = K.shape
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        return 0.0
    v /= nrm
    for _ in range(iters):
        w = K.T @ (K @ v)
        nrm = float(np.linalg.norm(w))
        if nrm == 0.0:
            return 0.0
        v = w / nrm
    lam = float(v @ (K.T @ (K @ v)))
    return math.sqrt(max(lam, 0.0))


def derive_step_sizes(sigma1: float, eta: float = 0.95) -> tuple[float, float]:
    """tau = sigma = eta / sigma1; keeps tau*sigma*||K||^2 < 1 whenever the
    relative error of the norm estimate stays below 1 - eta^2-safe band."""
    if sigma1 <= 0:
        raise ValueError("sigma1 must be > 0")
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    step = eta / sigma1
    return step, step
