"""Energy/latency bookkeeping for accelerator backends.

The ledger only stores integer operation counters per phase; energy and
latency are always *recomputed* from counters and unit costs, so the
accounting identity

    energy_j  = n_write_pulses * e_write + n_cell_reads * e_read
    latency_s = n_write_pulses * t_write + n_mvm_calls  * t_read

holds exactly (writes are serial per pulse, tiles are read in parallel
within one MVM, hence one t_read per call).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

PHASES = ("encode", "lanczos", "pdhg", "other")


@dataclass
class PhaseCounters:
    write_pulses: int = 0
    cell_reads: int = 0
    mvm_calls: int = 0
    encodes: int = 0

    def as_dict(self) -> dict:
        return {
            "write_pulses": self.write_pulses,
            "cell_reads": self.cell_reads,
            "mvm_calls": self.mvm_calls,
            "encodes": self.encodes,
        }


@dataclass
class TelemetryLedger:
    """Cumulative operation counts with derived energy/latency totals.

    Unit costs are fixed at construction (zero for the exact backend).
    """

    e_write: float = 0.0
    e_read: float = 0.0
    t_write: float = 0.0
    t_read: float = 0.0
    phase: str = "other"
    counters: dict[str, PhaseCounters] = field(
        default_factory=lambda: {p: PhaseCounters() for p in PHASES}
    )

    def set_phase(self, phase: str) -> None:
        if phase not in PHASES:
            raise ValueError(f"unknown phase {phase!r}, expected one of {PHASES}")
        self.phase = phase

    def record_encode(self, write_pulses: int) -> None:
        c = self.counters[self.phase]
        c.encodes += 1
        c.write_pulses += int(write_pulses)

    def record_mvm(self, cell_reads: int) -> None:
        c = self.counters[self.phase]
        c.mvm_calls += 1
        c.cell_reads += int(cell_reads)

    # -- totals ---------------------------------------------------------

    def _total(self, attr: str) -> int:
        return sum(getattr(c, attr) for c in self.counters.values())

    @property
    def n_write_pulses(self) -> int:
        return self._total("write_pulses")

    @property
    def n_cell_reads(self) -> int:
        return self._total("cell_reads")

    @property
    def n_mvm_calls(self) -> int:
        return self._total("mvm_calls")

    @property
    def n_encodes(self) -> int:
        return self._total("encodes")

    @property
    def energy_j(self) -> float:
        return self.n_write_pulses * self.e_write + self.n_cell_reads * self.e_read

    @property
    def latency_s(self) -> float:
        return self.n_write_pulses * self.t_write + self.n_mvm_calls * self.t_read

    # -- per-phase views --------------------------------------------------

    def phase_energy(self, phase: str) -> float:
        c = self.counters[phase]
        return c.write_pulses * self.e_write + c.cell_reads * self.e_read

    def phase_latency(self, phase: str) -> float:
        c = self.counters[phase]
        return c.write_pulses * self.t_write + c.mvm_calls * self.t_read

    def phase_mvm_calls(self, phase: str) -> int:
        return self.counters[phase].mvm_calls

    def snapshot(self) -> dict:
        """Plain-dict view used by trace rows and the telemetry report."""
        return {
            "totals": {
                "write_pulses": self.n_write_pulses,
                "cell_reads": self.n_cell_reads,
                "mvm_calls": self.n_mvm_calls,
                "encodes": self.n_encodes,
                "energy_j": self.energy_j,
                "latency_s": self.latency_s,
            },
            "unit_costs": {
                "e_write": self.e_write,
                "e_read": self.e_read,
                "t_write": self.t_write,
                "t_read": self.t_read,
            },
            "phases": {
                p: dict(
                    self.counters[p].as_dict(),
                    energy_j=self.phase_energy(p),
                    latency_s=self.phase_latency(p),
                )
                for p in PHASES
            },
        }

    def write_report(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.snapshot(), fh, indent=2)
            fh.write("\n")
