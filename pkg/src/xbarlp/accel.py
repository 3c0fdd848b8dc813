"""Accelerator abstraction: symmetric block matrix and mode-padded MVM dispatch.

A constraint matrix K (m x n) is embedded once in the symmetric block

    M = [[0,   K],
         [K^T, 0]]

so that a single device MVM serves three call modes: the full product
M @ u, the forward product K @ x (pad x with m leading zeros, keep the
first m outputs) and the transpose product K^T @ y (pad y with n trailing
zeros, keep the last n outputs). Callers never distinguish the exact
backend from a noisy simulated one.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .telemetry import TelemetryLedger


class MvmMode(Enum):
    FULL = "full"
    A_X = "A_x"
    AT_Y = "AT_y"


@dataclass(frozen=True)
class SymBlock:
    """Zero-diagonal symmetric embedding of K; top-right block is K."""

    M: np.ndarray
    m: int
    n: int


def build_sym_block(K: np.ndarray) -> SymBlock:
    K = np.asarray(K, dtype=float)
    if K.ndim != 2:
        raise ValueError("K must be a 2-D matrix")
    if not np.isfinite(K).all():
        raise ValueError("K must be finite")
    m, n = K.shape
    M = np.zeros((m + n, m + n))
    M[:m, m:] = K
    M[m:, :m] = K.T
    return SymBlock(M=M, m=m, n=n)


class Backend(ABC):
    """Behavioral contract shared by all accelerator backends.

    encode() is a one-time cost per solve (the solver layer calls it exactly
    once and the telemetry ledger makes that checkable); mvm() computes
    M @ v plus whatever noise the backend models.
    """

    def __init__(self, ledger: TelemetryLedger):
        self.ledger = ledger

    @abstractmethod
    def encode(self, block: SymBlock):
        """Program the block matrix onto the device; returns a handle."""

    @abstractmethod
    def mvm(self, handle, v: np.ndarray) -> np.ndarray:
        """One device MVM on the encoded matrix."""

    def telemetry(self) -> TelemetryLedger:
        return self.ledger

    def set_phase(self, phase: str) -> None:
        self.ledger.set_phase(phase)


@dataclass
class ExactHandle:
    M: np.ndarray
    m: int
    n: int


class ExactBackend(Backend):
    """Noise-free host-side backend; zero unit costs, counters still kept."""

    def __init__(self):
        super().__init__(TelemetryLedger())

    def encode(self, block: SymBlock) -> ExactHandle:
        self.ledger.record_encode(write_pulses=0)
        return ExactHandle(M=block.M.copy(), m=block.m, n=block.n)

    def mvm(self, handle: ExactHandle, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (handle.M.shape[0],):
            raise ValueError(f"expected vector of length {handle.M.shape[0]}, got {v.shape}")
        self.ledger.record_mvm(cell_reads=0)
        return handle.M @ v


class BoundedNoiseBackend(Backend):
    """Exact MVM plus an additive perturbation of fixed norm eps_max.

    Executable form of the bounded, zero-mean, iterate-independent noise
    abstraction: each call returns M @ v + zeta with ||zeta||_2 = eps_max
    and zeta drawn uniformly on the sphere. Used to study estimator
    robustness independently of any particular device model.
    """

    def __init__(self, eps_max: float, seed: int = 0):
        super().__init__(TelemetryLedger())
        if eps_max < 0:
            raise ValueError("eps_max must be >= 0")
        self.eps_max = float(eps_max)
        self.rng = np.random.default_rng(seed)

    def encode(self, block: SymBlock) -> ExactHandle:
        self.ledger.record_encode(write_pulses=0)
        return ExactHandle(M=block.M.copy(), m=block.m, n=block.n)

    def mvm(self, handle: ExactHandle, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (handle.M.shape[0],):
            raise ValueError(f"expected vector of length {handle.M.shape[0]}, got {v.shape}")
        self.ledger.record_mvm(cell_reads=0)
        w = handle.M @ v
        if self.eps_max > 0:
            zeta = self.rng.standard_normal(w.shape[0])
            nrm = np.linalg.norm(zeta)
            if nrm > 0:
                w = w + zeta * (self.eps_max / nrm)
        return w


def matmul_accel(backend: Backend, handle, u: np.ndarray, mode: MvmMode) -> np.ndarray:
    """Mode-padded MVM dispatch on the encoded symmetric block.

    FULL: u has length m+n, returns M @ u.
    A_X:  u has length n, returns K @ u (first m entries of M @ [0; u]).
    AT_Y: u has length m, returns K^T @ u (last n entries of M @ [u; 0]).
    """
    m, n = handle.m, handle.n
    u = np.asarray(u, dtype=float)
    if mode is MvmMode.FULL:
        if u.shape != (m + n,):
            raise ValueError(f"mode=full expects length {m + n}, got {u.shape}")
        return backend.mvm(handle, u)
    if mode is MvmMode.A_X:
        if u.shape != (n,):
            raise ValueError(f"mode=A_x expects length {n}, got {u.shape}")
        v = np.concatenate([np.zeros(m), u])
        return backend.mvm(handle, v)[:m]
    if mode is MvmMode.AT_Y:
        if u.shape != (m,):
            raise ValueError(f"mode=AT_y expects length {m}, got {u.shape}")
        v = np.concatenate([u, np.zeros(n)])
        return backend.mvm(handle, v)[m:]
    raise ValueError(f"unknown mode {mode!r}")
