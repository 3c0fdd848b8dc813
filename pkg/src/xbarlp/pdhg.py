"""Preconditioned primal-dual hybrid gradient engine for standard-form LPs.

Pipeline per solve: Ruiz-equilibrate and diagonally precondition the
problem, encode the scaled constraint matrix once on the accelerator,
estimate its operator norm with Lanczos (tau = sigma = eta / norm), then
iterate

    x_bar  = x + theta (x - x_prev)          theta = 1/sqrt(1 + 2 gamma tau)
    y+     = y + sigma Sigma (b - K x_bar)   (first accelerator MVM)
    x+     = proj_box(x - tau T (c - K^T y+))  (second accelerator MVM)

with exactly two accelerator MVMs per iteration. Sign conventions follow
the KKT system (dual feasibility is K^T y <= c), so the returned dual is
directly the vector whose reduced costs are [c - K^T y]_+. Stopping uses
scaled KKT residuals computed with the exact host matrix (termination must
not be stochastic under a noisy backend); a solve only reports optimal if
the recomputed unscaled residuals also stay within 10x the tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .accel import Backend, MvmMode, build_sym_block, matmul_accel
from .normest import LanczosResult, derive_step_sizes, lanczos_svd
from .problem import ProblemError, StandardLp
from .scaling import ScalingInfo, diag_precond, ruiz_rescale

STATUS_OPTIMAL = "optimal"
STATUS_ITERATION_LIMIT = "iteration_limit"
STATUS_NUMERICAL_FAILURE = "numerical_failure"


@dataclass
class PdhgConfig:
    max_iters: int = 100_000
    tolerance: float = 1e-6
    eta: float = 0.95
    gamma: float = 0.0
    ruiz_iters: int = 10
    lanczos_max: int = 100
    lanczos_eps: float = 1e-10
    seed: int = 0
    check_interval: int = 1
    zero_start: bool = False
    use_diag_precond: bool = True
    log_iterates: bool = False

    def validate(self) -> None:
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.max_iters < 1 or self.check_interval < 1:
            raise ValueError("max_iters and check_interval must be >= 1")


@dataclass
class PdhgState:
    x: np.ndarray
    x_prev: np.ndarray
    y: np.ndarray
    tau: float
    sigma: float
    k: int = 0
    theta_k: float = 1.0


@dataclass
class ScaledData:
    """Problem data in the scaled space (K is the exact host-side matrix)."""

    K: np.ndarray
    b: np.ndarray
    c: np.ndarray
    lb: np.ndarray
    ub: np.ndarray


@dataclass
class Residuals:
    r_pri: float
    r_dual: float
    r_iter: float
    gap: float
    lam: np.ndarray

    @property
    def max_kkt(self) -> float:
        return max(self.r_pri, self.r_dual, self.r_iter)

    def as_dict(self) -> dict:
        return {
            "primal": self.r_pri,
            "dual": self.r_dual,
            "bounds": self.r_iter,
            "gap": self.gap,
        }


@dataclass
class IterationRecord:
    """Everything needed to reconstruct one iteration's noise realizations:
    the additive MVM errors are mvm1_out - K @ x_bar and
    mvm2_out - K.T @ y_out."""

    x_in: np.ndarray
    y_in: np.ndarray
    x_bar: np.ndarray
    mvm1_out: np.ndarray
    y_out: np.ndarray
    mvm2_out: np.ndarray
    x_out: np.ndarray
    tau: float
    sigma: float
    theta: float


@dataclass
class TraceRow:
    k: int
    r_pri: float
    r_dual: float
    r_iter: float
    gap: float
    tau: float
    sigma: float
    energy_j: float
    latency_s: float


@dataclass
class Solution:
    x_orig: np.ndarray
    y_orig: np.ndarray
    objective: float
    status: str
    iterations: int
    residuals: Residuals
    scaled_residuals: Residuals
    telemetry: object
    scaling: ScalingInfo
    norm_estimate: LanczosResult
    trace: list[TraceRow] = field(default_factory=list)
    iterate_log: list[IterationRecord] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)


def project_box(v: np.ndarray, lb, ub) -> np.ndarray:
    """Componentwise clamp of v to [lb, ub]."""
    return np.minimum(ub, np.maximum(lb, v))


def kkt_residuals(x: np.ndarray, y: np.ndarray, K: np.ndarray, b: np.ndarray,
                  c: np.ndarray) -> Residuals:
    """Scaled KKT residuals (combined absolute/relative denominators)."""
    lam = np.maximum(c - K.T @ y, 0.0)
    r_pri = float(np.linalg.norm(K @ x - b)) / (1.0 + float(np.linalg.norm(b)))
    r_dual = float(np.linalg.norm(c - K.T @ y - lam)) / (1.0 + float(np.linalg.norm(c)))
    r_iter = float(np.linalg.norm(np.maximum(-x, 0.0))) / (1.0 + float(np.linalg.norm(x)))
    cx = float(c @ x)
    by = float(b @ y)
    gap = abs(cx - by) / (1.0 + abs(cx) + abs(by))
    return Residuals(r_pri=r_pri, r_dual=r_dual, r_iter=r_iter, gap=gap, lam=lam)


def compute_residuals(state: PdhgState, data: ScaledData) -> Residuals:
    return kkt_residuals(state.x, state.y, data.K, data.b, data.c)


def pdhg_iterate(
    state: PdhgState,
    data: ScaledData,
    precond: tuple[np.ndarray, np.ndarray],
    backend: Backend,
    handle,
    gamma: float = 0.0,
    record: list[IterationRecord] | None = None,
) -> PdhgState:
    """One iteration; exactly two accelerator MVMs."""
    T, Sigma = precond
    theta = 1.0 / math.sqrt(1.0 + 2.0 * gamma * state.tau)
    tau = theta * state.tau
    sigma = state.sigma / theta

    x_bar = state.x + theta * (state.x - state.x_prev)
    v_bar = matmul_accel(backend, handle, x_bar, MvmMode.A_X)
    y_new = state.y + sigma * Sigma * (data.b - v_bar)
    u = matmul_accel(backend, handle, y_new, MvmMode.AT_Y)
    x_new = project_box(state.x - tau * T * (data.c - u), data.lb, data.ub)

    if record is not None:
        record.append(IterationRecord(
            x_in=state.x.copy(), y_in=state.y.copy(), x_bar=x_bar,
            mvm1_out=v_bar, y_out=y_new.copy(), mvm2_out=u, x_out=x_new.copy(),
            tau=tau, sigma=sigma, theta=theta,
        ))
    return PdhgState(x=x_new, x_prev=state.x, y=y_new, tau=tau, sigma=sigma,
                     k=state.k + 1, theta_k=theta)


def pdhg_solve(std: StandardLp, cfg: PdhgConfig, backend: Backend) -> Solution:
    """Full solve of min c.x s.t. K x = b, x >= 0 on the given backend."""
    cfg.validate()
    m, n = std.m, std.n
    if m == 0 or n == 0:
        raise ProblemError("problem has no rows or no columns")
    if not np.any(std.K):
        raise ProblemError("constraint matrix is identically zero")

    # Step 0: scaling and preconditioning (host).
    backend.set_phase("encode")
    if cfg.ruiz_iters >= 1:
        D1, D2, K_s = ruiz_rescale(std.K, iters=cfg.ruiz_iters)
    else:
        D1, D2, K_s = np.ones(m), np.ones(n), std.K.copy()
    b_s = D1 * std.b
    c_s = D2 * std.c
    lb_s = np.zeros(n)  # standard form: lb = 0 is scale-invariant
    ub_s = np.full(n, np.inf)
    if cfg.use_diag_precond:
        T, Sigma = diag_precond(K_s)
    else:
        T, Sigma = np.ones(n), np.ones(m)
    scaling = ScalingInfo(D1=D1, D2=D2, T=T, Sigma=Sigma)
    data = ScaledData(K=K_s, b=b_s, c=c_s, lb=lb_s, ub=ub_s)

    handle = backend.encode(build_sym_block(K_s))

    # Step 1: operator norm of the scaled matrix.
    backend.set_phase("lanczos")
    seeds = np.random.SeedSequence(cfg.seed).spawn(2)
    norm_est = lanczos_svd(backend, handle, (m, n), k_max=cfg.lanczos_max,
                           eps=cfg.lanczos_eps, seed=seeds[0])
    tau0, sigma0 = derive_step_sizes(norm_est.sigma1, cfg.eta)

    # Step 2: initial iterates.
    rng = np.random.default_rng(seeds[1])
    if cfg.zero_start:
        x0 = np.zeros(n)
        y0 = np.zeros(m)
    else:
        x0 = project_box(rng.standard_normal(n), lb_s, ub_s)
        y0 = rng.standard_normal(m)
    state = PdhgState(x=x0, x_prev=x0.copy(), y=y0, tau=tau0, sigma=sigma0)

    # Step 3/4: main loop with host-side convergence checks.
    backend.set_phase("pdhg")
    ledger = backend.telemetry()
    trace: list[TraceRow] = []
    iterate_log: list[IterationRecord] | None = [] if cfg.log_iterates else None
    status = STATUS_ITERATION_LIMIT
    scaled_res: Residuals | None = None
    norm_history: list[tuple[int, float]] = []

    for k in range(cfg.max_iters):
        state = pdhg_iterate(state, data, (T, Sigma), backend, handle,
                             gamma=cfg.gamma, record=iterate_log)
        if not (np.isfinite(state.x).all() and np.isfinite(state.y).all()):
            status = STATUS_NUMERICAL_FAILURE
            break
        if (k + 1) % cfg.check_interval == 0 or k + 1 == cfg.max_iters:
            scaled_res = compute_residuals(state, data)
            trace.append(TraceRow(
                k=k + 1, r_pri=scaled_res.r_pri, r_dual=scaled_res.r_dual,
                r_iter=scaled_res.r_iter, gap=scaled_res.gap,
                tau=state.tau, sigma=state.sigma,
                energy_j=ledger.energy_j, latency_s=ledger.latency_s,
            ))
            norm_history.append((k + 1, float(np.linalg.norm(state.x))))
            if scaled_res.max_kkt <= cfg.tolerance:
                x_o = D2 * state.x
                y_o = D1 * state.y
                unscaled = kkt_residuals(x_o, y_o, std.K, std.b, std.c)
                if unscaled.max_kkt <= 10.0 * cfg.tolerance:
                    status = STATUS_OPTIMAL
                    break

    x_orig = D2 * state.x
    y_orig = D1 * state.y
    if scaled_res is None:
        scaled_res = compute_residuals(state, data)
    unscaled_res = kkt_residuals(x_orig, y_orig, std.K, std.b, std.c)

    diagnostics: dict = {"theta_bar_lanczos": norm_est.theta_bar}
    if status == STATUS_ITERATION_LIMIT and len(norm_history) >= 2:
        # growth rate of ||x|| per iteration over the logged checks; a
        # persistently positive rate suggests an infeasible/unbounded input
        (k0, n0), (k1, n1) = norm_history[len(norm_history) // 2], norm_history[-1]
        if n0 > 0 and n1 > 0 and k1 > k0:
            diagnostics["primal_norm_growth_rate"] = (math.log(n1) - math.log(n0)) / (k1 - k0)

    return Solution(
        x_orig=x_orig,
        y_orig=y_orig,
        objective=float(std.c @ x_orig),
        status=status,
        iterations=state.k,
        residuals=unscaled_res,
        scaled_residuals=scaled_res,
        telemetry=ledger,
        scaling=scaling,
        norm_estimate=norm_est,
        trace=trace,
        iterate_log=iterate_log if iterate_log is not None else [],
        diagnostics=diagnostics,
    )


def write_trace(path: str, solution: Solution) -> None:
    """Delimited-text trace: one row per convergence check, with the scaling
    diagonals recorded in a leading comment for reproducibility."""
    import json as _json

    with open(path, "w") as fh:
        fh.write("# scaling " + _json.dumps(solution.scaling.as_dict()) + "\n")
        fh.write("k,r_pri,r_dual,r_iter,gap,tau,sigma,energy_j,latency_s\n")
        for row in solution.trace:
            fh.write(
                f"{row.k},{row.r_pri!r},{row.r_dual!r},{row.r_iter!r},"
                f"{row.gap!r},{row.tau!r},{row.sigma!r},"
                f"{row.energy_j!r},{row.latency_s!r}\n"
            )
