"""Simulated distributed RRAM crossbar accelerator.

The symmetric block matrix is tiled over a fixed grid of crossbars. Every
signed entry is stored as a differential conductance pair (G+, G-) with a
single global scale col_scale = (g_max - g_min) / max|M|, so decoding is a
pure subtraction. Programming quantizes each target to one of `levels`
uniform conductance levels and then write-and-verifies: each pulse realizes
g = g_min + inc * (1 + xi) with xi ~ N(0, write_noise_sigma) on the
programmed increment (a zero increment resets exactly to g_min), until the
decoded value is within verify_tolerance (relative to max|M|) of the true
entry or max_write_pulses is exhausted (the cell is then flagged
saturated and the best realization kept).

Reads model one analog MVM: per tile, the decoded sub-block times the
input slice, then multiplicative read noise (1 + eps) per tile-output
entry with eps ~ N(0, read_noise_sigma) clipped at +-4 sigma (bounded,
zero-mean), partial sums accumulated in fixed row-major tile order. All
randomness comes from one deterministic stream per tile, so identical
(matrix, profile, seed) reproduce bit-identical arrays and MVM sequences.

Energy/latency: writes are serial (one t_write, e_write per cell pulse);
tiles read in parallel within an MVM (one t_read per call, e_read per
active cell). Padded lanes inside touched tiles are driven by the physical
array and charged for reads by default (count_padded_lanes).
"""

from __future__ import annotations

import importlib.resources
import json
import math
from dataclasses import dataclass, fields

import numpy as np

from .accel import Backend, SymBlock
from .telemetry import TelemetryLedger


class CapacityError(ValueError):
    """Logical matrix does not fit the crossbar grid."""


class ProfileError(ValueError):
    """Invalid device profile."""


@dataclass
class DeviceProfile:
    """Geometry, noise/quantization and per-op unit costs for one chemistry.

    Bundled profiles carry placeholder unit costs chosen so that encoding
    (writes) dominates per-iteration reads by >= 3 orders of magnitude;
    they are calibration inputs, not measured device data.
    """

    name: str
    g_min: float
    g_max: float
    e_write: float
    e_read: float
    t_write: float
    t_read: float
    crossbar_rows: int = 64
    crossbar_cols: int = 64
    grid_rows: int = 4
    grid_cols: int = 4
    levels: int = 256
    write_noise_sigma: float = 0.0
    read_noise_sigma: float = 0.0
    verify_tolerance: float = 1e-3
    max_write_pulses: int = 10
    count_padded_lanes: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.g_min < self.g_max:
            raise ProfileError(f"g_min must be < g_max ({self.g_min} >= {self.g_max})")
        if self.levels < 2:
            raise ProfileError("levels must be >= 2")
        if min(self.e_write, self.e_read, self.t_write, self.t_read) < 0:
            raise ProfileError("unit costs must be >= 0")
        if min(self.write_noise_sigma, self.read_noise_sigma) < 0:
            raise ProfileError("noise sigmas must be >= 0")
        if self.verify_tolerance <= 0:
            raise ProfileError("verify_tolerance must be > 0")
        if self.max_write_pulses < 1:
            raise ProfileError("max_write_pulses must be >= 1")
        if min(self.crossbar_rows, self.crossbar_cols, self.grid_rows, self.grid_cols) < 1:
            raise ProfileError("geometry counts must be >= 1")

    @property
    def capacity_rows(self) -> int:
        return self.grid_rows * self.crossbar_rows

    @property
    def capacity_cols(self) -> int:
        return self.grid_cols * self.crossbar_cols


_FIELD_NAMES = {f.name for f in fields(DeviceProfile)}
_REQUIRED = ("name", "g_min", "g_max", "e_write", "e_read", "t_write", "t_read")


def profile_from_dict(doc: dict) -> DeviceProfile:
    missing = [k for k in _REQUIRED if k not in doc]
    if missing:
        raise ProfileError(f"profile missing fields: {', '.join(missing)}")
    unknown = set(doc) - _FIELD_NAMES - {"comment"}
    if unknown:
        raise ProfileError(f"unknown profile fields: {', '.join(sorted(unknown))}")
    kwargs = {k: v for k, v in doc.items() if k in _FIELD_NAMES}
    return DeviceProfile(**kwargs)


def profile_from_file(path: str) -> DeviceProfile:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ProfileError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from e
    return profile_from_dict(doc)


def bundled_profile(name: str) -> DeviceProfile:
    """Load one of the profiles shipped with the package ('epiram',
    'taox-hfox')."""
    res = importlib.resources.files("xbarlp").joinpath(f"profiles/{name}.json")
    try:
        text = res.read_text()
    except FileNotFoundError:
        raise ProfileError(f"no bundled profile named {name!r}") from None
    return profile_from_dict(json.loads(text))


@dataclass
class _Tile:
    row0: int
    col0: int
    g_pos: np.ndarray  # logical sub-block only (rows x cols actually used)
    g_neg: np.ndarray
    decoded: np.ndarray
    saturated: np.ndarray
    rng: np.random.Generator


class CrossbarArray:
    """Tiled differential-pair realization of one symmetric block matrix."""

    def __init__(self, block: SymBlock, profile: DeviceProfile, seed: int,
                 ledger: TelemetryLedger | None = None):
        self.profile = profile
        self.m = block.m
        self.n = block.n
        N = block.m + block.n
        self.logical_dim = N
        if N > profile.capacity_rows or N > profile.capacity_cols:
            raise CapacityError(
                f"matrix of logical dim {N} exceeds grid capacity "
                f"{profile.capacity_rows}x{profile.capacity_cols}"
            )
        self.seed = seed
        self.ledger = ledger if ledger is not None else TelemetryLedger(
            e_write=profile.e_write, e_read=profile.e_read,
            t_write=profile.t_write, t_read=profile.t_read,
        )
        max_abs = float(np.max(np.abs(block.M))) if block.M.size else 0.0
        # Degenerate all-zero matrix encodes zeros at scale 1.
        self.col_scale = (profile.g_max - profile.g_min) / max_abs if max_abs > 0 else 1.0
        self.value_ref = max_abs if max_abs > 0 else 1.0
        self.tiles: list[_Tile] = []
        self._build_tiles(block)
        pulses = self._program(block)
        self.ledger.record_encode(write_pulses=pulses)

    # -- construction ------------------------------------------------------

    def _build_tiles(self, block: SymBlock) -> None:
        p = self.profile
        N = self.logical_dim
        streams = np.random.SeedSequence(self.seed).spawn(p.grid_rows * p.grid_cols)
        idx = 0
        for ti in range(p.grid_rows):
            r0 = ti * p.crossbar_rows
            if r0 >= N:
                break
            rows = min(p.crossbar_rows, N - r0)
            for tj in range(p.grid_cols):
                c0 = tj * p.crossbar_cols
                if c0 >= N:
                    continue
                cols = min(p.crossbar_cols, N - c0)
                self.tiles.append(_Tile(
                    row0=r0, col0=c0,
                    g_pos=np.full((rows, cols), p.g_min),
                    g_neg=np.full((rows, cols), p.g_min),
                    decoded=np.zeros((rows, cols)),
                    saturated=np.zeros((rows, cols), dtype=bool),
                    rng=np.random.default_rng(streams[ti * p.grid_cols + tj]),
                ))
                idx += 1

    def _program(self, block: SymBlock) -> int:
        """Write-and-verify every logical cell; returns total write pulses."""
        p = self.profile
        step = (p.g_max - p.g_min) / (p.levels - 1)
        tol_abs = p.verify_tolerance * self.value_ref
        total_pulses = 0
        for tile in self.tiles:
            target = block.M[tile.row0: tile.row0 + tile.g_pos.shape[0],
                             tile.col0: tile.col0 + tile.g_pos.shape[1]]
            inc = np.abs(target) * self.col_scale
            inc_q = np.round(inc / step) * step  # quantize to device levels
            pos_inc = np.where(target >= 0, inc_q, 0.0)
            neg_inc = np.where(target < 0, inc_q, 0.0)
            pending = np.ones(target.shape, dtype=bool)
            best_err = np.full(target.shape, np.inf)
            best_pos = tile.g_pos.copy()
            best_neg = tile.g_neg.copy()
            for _ in range(p.max_write_pulses):
                k = int(pending.sum())
                if k == 0:
                    break
                noise_p = tile.rng.standard_normal(k) * p.write_noise_sigma
                noise_n = tile.rng.standard_normal(k) * p.write_noise_sigma
                gp = p.g_min + pos_inc[pending] * (1.0 + noise_p)
                gn = p.g_min + neg_inc[pending] * (1.0 + noise_n)
                gp = np.clip(gp, p.g_min, p.g_max)
                gn = np.clip(gn, p.g_min, p.g_max)
                total_pulses += 2 * k  # both halves of each pair pulse together
                err = np.abs((gp - gn) / self.col_scale - target[pending])
                improved = err < best_err[pending]
                sel = np.flatnonzero(pending.ravel())
                upd = sel[improved]
                best_pos.ravel()[upd] = gp[improved]
                best_neg.ravel()[upd] = gn[improved]
                be = best_err.ravel()
                be[upd] = err[improved]
                done = err <= tol_abs
                pend = pending.ravel()
                pend[sel[done]] = False
                pending = pend.reshape(target.shape)
            tile.g_pos = best_pos
            tile.g_neg = best_neg
            tile.saturated = pending  # never verified within the pulse budget
            tile.decoded = (tile.g_pos - tile.g_neg) / self.col_scale
        return total_pulses

    # -- queries -----------------------------------------------------------

    def decode(self) -> np.ndarray:
        """Host-side view of the stored matrix (for tests/diagnostics)."""
        M = np.zeros((self.logical_dim, self.logical_dim))
        for t in self.tiles:
            M[t.row0: t.row0 + t.decoded.shape[0],
              t.col0: t.col0 + t.decoded.shape[1]] = t.decoded
        return M

    @property
    def n_saturated(self) -> int:
        return int(sum(t.saturated.sum() for t in self.tiles))

    def _cells_per_mvm(self) -> int:
        p = self.profile
        if p.count_padded_lanes:
            per_tile = p.crossbar_rows * p.crossbar_cols
            return 2 * per_tile * len(self.tiles)
        return 2 * sum(t.decoded.size for t in self.tiles)

    def mvm(self, v: np.ndarray) -> np.ndarray:
        """One noisy analog MVM over all tiles."""
        v = np.asarray(v, dtype=float)
        if v.shape != (self.logical_dim,):
            raise ValueError(f"expected vector of length {self.logical_dim}, got {v.shape}")
        sigma = self.profile.read_noise_sigma
        out = np.zeros(self.logical_dim)
        for t in self.tiles:  # fixed row-major order keeps sums deterministic
            part = t.decoded @ v[t.col0: t.col0 + t.decoded.shape[1]]
            if sigma > 0:
                eps = t.rng.standard_normal(part.shape[0]) * sigma
                np.clip(eps, -4.0 * sigma, 4.0 * sigma, out=eps)
                part = part * (1.0 + eps)
            out[t.row0: t.row0 + part.shape[0]] += part
        self.ledger.record_mvm(cell_reads=self._cells_per_mvm())
        return out


def encode(block: SymBlock, profile: DeviceProfile, seed: int = 0,
           ledger: TelemetryLedger | None = None) -> CrossbarArray:
    """Program a symmetric block matrix onto a fresh crossbar array."""
    return CrossbarArray(block, profile, seed, ledger)


def noisy_mvm(arr: CrossbarArray, v: np.ndarray) -> np.ndarray:
    return arr.mvm(v)


class RramBackend(Backend):
    """Backend adapter around the crossbar array simulation."""

    def __init__(self, profile: DeviceProfile, seed: int = 0):
        super().__init__(TelemetryLedger(
            e_write=profile.e_write, e_read=profile.e_read,
            t_write=profile.t_write, t_read=profile.t_read,
        ))
        self.profile = profile
        self.seed = seed

    def encode(self, block: SymBlock) -> CrossbarArray:
        return CrossbarArray(block, self.profile, self.seed, ledger=self.ledger)

    def mvm(self, handle: CrossbarArray, v: np.ndarray) -> np.ndarray:
        return handle.mvm(v)


def quantization_bound(arr: CrossbarArray, v: np.ndarray) -> float:
    """Worst-case |noiseless crossbar MVM - exact MVM| per output entry:
    (g_max - g_min) / (levels * col_scale) * ||v||_1."""
    p = arr.profile
    return (p.g_max - p.g_min) / (p.levels * arr.col_scale) * float(
        np.abs(np.asarray(v)).sum()
    )
