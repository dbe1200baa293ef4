"""Parameter sweeps, feature detection and the CSV/JSON file formats."""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from bondent.entanglement import report
from bondent.models import BondModelSpec
from bondent.mps import find_ground_mps
from bondent.peps import find_ground_peps
from bondent.schedule import EvolutionSchedule

log = logging.getLogger(__name__)

SWEEP_PARAMS = ("field", "gamma", "delta")
MAX_GRID_POINTS = 100_000
SIG_DIGITS = 12
# points at or below this entropy count as exactly unentangled
EXACT_ZERO = 1e-8
DEFAULT_ZERO_THRESHOLD = 0.01
JUMP_RELATIVE = 0.3
JUMP_FLOOR = 0.1
# a jump must also dwarf the neighbouring differences (smooth peaks do not)
JUMP_ISOLATION = 3.0
DEFAULT_BOND_DIM = {1: 20, 2: 4, 3: 2}


class TooFewPointsError(ValueError):
    pass


def round_sig(x: float, digits: int = SIG_DIGITS) -> float:
    if not math.isfinite(x):
        return x
    return float(f"{x:.{digits}g}")


def grid_points(start: float, stop: float, step: float) -> list[float]:
    """Inclusive grid ``start, start+step, ...`` up to ``stop``; empty if equal."""
    if step <= 0:
        raise ValueError("grid step must be positive")
    if stop < start:
        raise ValueError(f"grid start {start} exceeds stop {stop}")
    if stop == start:
        return []
    n = int(math.floor((stop - start) / step + 1e-9))
    if n + 1 > MAX_GRID_POINTS:
        raise ValueError(f"grid has {n + 1} points, limit is {MAX_GRID_POINTS}")
    return [round_sig(start + i * step) for i in range(n + 1)]


def point_seed(base_seed: int, index: int) -> int:
    """Per-point seed derived from (base seed, grid index) only."""
    return int(np.random.SeedSequence([int(base_seed) & 0xFFFFFFFF, int(index)]).generate_state(1)[0])


@dataclass(frozen=True)
class ScanSpec:
    model: BondModelSpec
    sweep: str
    start: float
    stop: float
    step: float
    bond_dim: int | None = None
    schedule: EvolutionSchedule | None = None
    seed: int = 0
    workers: int = 1
    noise_amplitude: float = 1e-2

    def __post_init__(self):
        if self.sweep not in SWEEP_PARAMS:
            raise ValueError(f"sweep parameter must be one of {SWEEP_PARAMS}, got {self.sweep!r}")
        if self.sweep == "gamma" and self.model.family != "XY":
            raise ValueError("gamma sweeps need the XY family")
        if self.sweep == "delta" and self.model.family != "XXZ":
            raise ValueError("delta sweeps need the XXZ family")
        if self.workers < 1:
            raise ValueError("workers must be positive")
        d = self.model.lattice.dimension
        if self.bond_dim is None:
            object.__setattr__(self, "bond_dim", DEFAULT_BOND_DIM[d])
        if self.schedule is None:
            object.__setattr__(self, "schedule", EvolutionSchedule.default(d))
        grid_points(self.start, self.stop, self.step)

    @property
    def grid(self) -> list[float]:
        return grid_points(self.start, self.stop, self.step)

    @property
    def coordination(self) -> int:
        return self.model.lattice.coordination

    def as_dict(self) -> dict:
        return {
            "model": self.model.as_dict(),
            "sweep": self.sweep,
            "start": self.start,
            "stop": self.stop,
            "step": self.step,
            "bond_dim": self.bond_dim,
            "tau_stages": list(self.schedule.tau_stages),
            "tolerance": self.schedule.stage_tolerance,
            "max_sweeps": self.schedule.max_sweeps_per_stage,
            "seed": self.seed,
            "workers": self.workers,
            "noise_amplitude": self.noise_amplitude,
        }


@dataclass
class ScanRow:
    sweep_param: str
    sweep_value: float
    s_pb_mean: float
    s_pb_dirs: tuple[float, ...]
    lambda_spread: float
    discarded_weight: float
    converged: bool
    sweeps_used: int
    final_tau: float
    error: str | None = None


def csv_header(z: int) -> list[str]:
    return (
        ["sweep_param", "sweep_value", "s_pb_mean"]
        + [f"s_pb_dir_{i}" for i in range(1, z + 1)]
        + ["lambda_spread", "discarded_weight", "converged", "sweeps_used", "final_tau"]
    )


def run_point(model: BondModelSpec, m: int, schedule: EvolutionSchedule, seed: int, noise_amplitude: float = 1e-2):
    """Ground state for one parameter point; returns (BondEntropyReport, Convergence)."""
    if model.lattice.dimension == 1:
        res = find_ground_mps(model, m, schedule, seed, noise_amplitude)
    else:
        res = find_ground_peps(model, m, schedule, seed, noise_amplitude)
    return report(res.state.lambdas), res.convergence


def _scan_point(args) -> ScanRow:
    spec, index, value = args
    model = spec.model.with_param(spec.sweep, value)
    z = spec.coordination
    try:
        rep, conv = run_point(model, spec.bond_dim, spec.schedule, point_seed(spec.seed, index), spec.noise_amplitude)
    except Exception as exc:  # recorded per point, never aborts the scan
        log.warning("point %s=%s failed: %s", spec.sweep, value, exc)
        nan = float("nan")
        return ScanRow(spec.sweep, value, nan, (nan,) * z, nan, nan, False, 0, nan, f"{type(exc).__name__}: {exc}")
    return ScanRow(
        spec.sweep,
        value,
        round_sig(rep.s_pb_mean),
        tuple(round_sig(s) for s in rep.s_pb_per_direction),
        round_sig(rep.lambda_spread),
        round_sig(conv.discarded_weight),
        conv.converged,
        conv.sweeps_used,
        conv.final_tau,
    )


def run_scan(spec: ScanSpec) -> list[ScanRow]:
    """Evaluate every grid point; rows come back in grid order.

    Each point uses a seed derived from ``(spec.seed, grid index)`` so the
    result does not depend on the number of workers.
    """
    jobs = [(spec, i, v) for i, v in enumerate(spec.grid)]
    if not jobs:
        return []
    if spec.workers == 1 or len(jobs) == 1:
        return [_scan_point(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(spec.workers, len(jobs))) as pool:
        return list(pool.map(_scan_point, jobs))


def write_csv(rows: Sequence[ScanRow], path: str | os.PathLike, z: int) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(csv_header(z))
        for r in rows:
            w.writerow(
                [r.sweep_param, _fmt(r.sweep_value), _fmt(r.s_pb_mean)]
                + [_fmt(s) for s in r.s_pb_dirs]
                + [_fmt(r.lambda_spread), _fmt(r.discarded_weight), str(r.converged).lower(), r.sweeps_used, _fmt(r.final_tau)]
            )


def _fmt(x: float) -> str:
    return f"{x:.{SIG_DIGITS}g}"


def read_csv(path: str | os.PathLike) -> list[ScanRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return []
        dir_cols = [h for h in header if h.startswith("s_pb_dir_")]
        if header != csv_header(len(dir_cols)):
            raise ValueError(f"unexpected CSV header: {header}")
        rows = []
        for rec in reader:
            if not rec:
                continue
            if len(rec) != len(header):
                raise ValueError(f"malformed CSV row: {rec}")
            vals = dict(zip(header, rec))
            rows.append(
                ScanRow(
                    vals["sweep_param"],
                    float(vals["sweep_value"]),
                    float(vals["s_pb_mean"]),
                    tuple(float(vals[c]) for c in dir_cols),
                    float(vals["lambda_spread"]),
                    float(vals["discarded_weight"]),
                    vals["converged"] == "true",
                    int(vals["sweeps_used"]),
                    float(vals["final_tau"]),
                )
            )
        return rows


# ---------------------------------------------------------------------------
# feature detection


@dataclass
class Feature:
    kind: str  # maximum | classical_zero | jump
    grid_location: float
    refined_location: float
    value: float
    # True when an unconverged point supports the feature
    unconverged_support: bool = False


@dataclass
class FeatureReport:
    features: list[Feature]
    provenance: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def of_kind(self, kind: str) -> list[Feature]:
        return [f for f in self.features if f.kind == kind]

    def as_dict(self) -> dict:
        return {
            "spec": self.provenance,
            "features": [asdict(f) for f in self.features],
            "warnings": list(self.warnings),
        }


def _vertex(x0, x1, x2, y0, y1, y2) -> float:
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom
    if a == 0:
        return x1
    return -b / (2 * a)


def _refine(x, y, i) -> float:
    v = _vertex(x[i - 1], x[i], x[i + 1], y[i - 1], y[i], y[i + 1])
    lo, hi = x[i - 1], x[i + 1]
    if not math.isfinite(v):
        return float(x[i])
    return float(min(max(v, lo), hi))


def detect_features(
    rows: Sequence[ScanRow],
    zero_threshold: float = DEFAULT_ZERO_THRESHOLD,
    jump_threshold: float | None = None,
    provenance: dict | None = None,
) -> FeatureReport:
    """Locate maxima, classical zeros and jumps of the averaged entropy.

    * maximum: interior point above both neighbours and at least
      ``zero_threshold``; refined by a three-point parabola.
    * classical_zero: interior local minimum below ``zero_threshold``,
      refined by a parabola through the minimum; a run of exactly
      unentangled points instead yields one feature at each edge bordering
      entangled points, refined to the midpoint of the edge interval.
    * jump: adjacent difference above ``jump_threshold`` (default
      ``max(0.1, 0.3 * max |dS|)``) and at least three times either
      neighbouring difference, located at the midpoint.

    Rows that failed outright are dropped. Unconverged rows stay in the data
    but any feature they support is marked ``unconverged_support``.
    """
    if zero_threshold <= 0 or (jump_threshold is not None and jump_threshold <= 0):
        raise ValueError("thresholds must be positive")
    warnings: list[str] = []
    usable = [r for r in rows if r.error is None and math.isfinite(r.s_pb_mean)]
    if len(usable) < len(rows):
        warnings.append(f"{len(rows) - len(usable)} failed point(s) excluded")
    if len(usable) < 3:
        raise TooFewPointsError(f"feature detection needs at least 3 points, got {len(usable)}")
    usable.sort(key=lambda r: r.sweep_value)
    x = np.array([r.sweep_value for r in usable])
    s = np.array([r.s_pb_mean for r in usable])
    conv = np.array([r.converged for r in usable])
    n = len(usable)
    if not conv.all():
        bad = ", ".join(_fmt(v) for v in x[~conv])
        warnings.append(f"unconverged points kept in feature support: {bad}")

    def flagged(*idx) -> bool:
        return not all(conv[i] for i in idx)

    features: list[Feature] = []
    for i in range(1, n - 1):
        if s[i] > s[i - 1] and s[i] > s[i + 1] and s[i] >= zero_threshold:
            features.append(Feature("maximum", float(x[i]), _refine(x, s, i), float(s[i]), flagged(i - 1, i, i + 1)))

    zero = s <= EXACT_ZERO
    in_plateau = np.zeros(n, dtype=bool)
    i = 0
    while i < n:
        j = i
        while zero[i] and j + 1 < n and zero[j + 1]:
            j += 1
        if j > i:
            in_plateau[i : j + 1] = True
            if i > 0:
                features.append(
                    Feature("classical_zero", float(x[i]), float(0.5 * (x[i - 1] + x[i])), float(s[i]), flagged(i - 1, i))
                )
            if j < n - 1:
                features.append(
                    Feature("classical_zero", float(x[j]), float(0.5 * (x[j] + x[j + 1])), float(s[j]), flagged(j, j + 1))
                )
        i = j + 1
    for i in range(1, n - 1):
        if in_plateau[i] or s[i] >= zero_threshold:
            continue
        if s[i] < s[i - 1] and s[i] <= s[i + 1]:
            features.append(Feature("classical_zero", float(x[i]), _refine(x, s, i), float(s[i]), flagged(i - 1, i, i + 1)))

    diffs = np.abs(np.diff(s))
    threshold = jump_threshold if jump_threshold is not None else max(JUMP_FLOOR, JUMP_RELATIVE * float(diffs.max()))
    for i in np.nonzero(diffs > threshold)[0]:
        beside = [diffs[k] for k in (i - 1, i + 1) if 0 <= k < diffs.size]
        if beside and diffs[i] < JUMP_ISOLATION * max(beside):
            continue
        features.append(
            Feature("jump", float(x[i]), float(0.5 * (x[i] + x[i + 1])), float(diffs[i]), flagged(i, i + 1))
        )

    features.sort(key=lambda f: (f.grid_location, f.kind))
    prov = dict(provenance or {})
    prov["point_converged"] = [bool(c) for c in conv]
    return FeatureReport(features, prov, warnings)


def write_report(report_: FeatureReport, path: str | os.PathLike) -> None:
    Path(path).write_text(json.dumps(report_.as_dict(), indent=2, sort_keys=True) + "\n")
