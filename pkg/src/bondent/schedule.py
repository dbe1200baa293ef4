"""Imaginary-time step schedule and per-run convergence record."""

from __future__ import annotations

from dataclasses import dataclass, field

DEFAULT_TAUS = (0.1, 0.05, 0.01, 0.005, 0.001, 1e-4)
DEFAULT_TOLERANCE = {1: 1e-9, 2: 1e-7, 3: 1e-7}
DEFAULT_MAX_SWEEPS = 20000
# inverse cutoff for bond vectors when restoring the Vidal form
PINV_CUTOFF = 1e-12


class DivergenceError(ArithmeticError):
    """Raised when a bond vector or tensor picks up NaN or Inf."""


@dataclass(frozen=True)
class EvolutionSchedule:
    tau_stages: tuple[float, ...] = DEFAULT_TAUS
    stage_tolerance: float = 1e-9
    max_sweeps_per_stage: int = DEFAULT_MAX_SWEEPS

    def __post_init__(self):
        taus = tuple(float(t) for t in self.tau_stages)
        object.__setattr__(self, "tau_stages", taus)
        if not taus:
            raise ValueError("schedule needs at least one tau stage")
        if any(t <= 0 for t in taus):
            raise ValueError(f"tau stages must be positive, got {taus}")
        if any(b >= a for a, b in zip(taus, taus[1:])):
            raise ValueError(f"tau stages must be strictly decreasing, got {taus}")
        if self.stage_tolerance <= 0:
            raise ValueError("stage_tolerance must be positive")
        if self.max_sweeps_per_stage < 0:
            raise ValueError("max_sweeps_per_stage must be non-negative")

    @classmethod
    def default(cls, dimension: int) -> "EvolutionSchedule":
        return cls(DEFAULT_TAUS, DEFAULT_TOLERANCE[dimension], DEFAULT_MAX_SWEEPS)


@dataclass
class Convergence:
    """What happened during a ground-state search."""

    sweeps_per_stage: list[int] = field(default_factory=list)
    final_delta: float = float("inf")
    converged: bool = False
    final_tau: float = float("nan")
    discarded_weight: float = 0.0
    # deltas of the last stage, most recent last (bounded)
    delta_tail: list[float] = field(default_factory=list)

    @property
    def sweeps_used(self) -> int:
        return sum(self.sweeps_per_stage)
