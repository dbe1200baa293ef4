"""Bipartite entanglement per bond computed from bond vectors."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

log = logging.getLogger(__name__)

WEIGHT_CUTOFF = 1e-14


@dataclass(frozen=True)
class BondEntropyReport:
    s_pb_mean: float
    s_pb_per_direction: tuple[float, ...]
    lambda_spread: float

    def as_dict(self) -> dict:
        return {
            "s_pb_mean": self.s_pb_mean,
            "s_pb_per_direction": list(self.s_pb_per_direction),
            "lambda_spread": self.lambda_spread,
        }


def entropy_of(lam: Sequence[float]) -> float:
    """Von Neumann entropy ``-sum l^2 log2 l^2`` of a bond vector, in bits.

    The vector is renormalized if needed (with a warning past 1e-6);
    weights below 1e-14 contribute nothing.
    """
    lam = np.asarray(lam, dtype=np.float64)
    if np.any(lam < 0):
        raise ValueError("bond vector has negative components")
    p = lam * lam
    norm = float(p.sum())
    if norm == 0.0:
        raise ValueError("bond vector is identically zero")
    if abs(norm - 1.0) > 1e-6:
        log.warning("bond vector norm %.3e differs from 1; renormalizing", norm)
    p = p / norm
    p = p[p >= WEIGHT_CUTOFF]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def _pad(vectors: Sequence[Sequence[float]]) -> np.ndarray:
    n = max(len(v) for v in vectors)
    out = np.zeros((len(vectors), n))
    for i, v in enumerate(vectors):
        out[i, : len(v)] = v
    return out


def report(lambdas: Sequence[Sequence[float]]) -> BondEntropyReport:
    """Entropy of the averaged bond vector plus per-direction entropies.

    The element-wise mean of the (zero-padded) vectors is renormalized
    before taking its entropy.
    """
    if len(lambdas) == 0:
        raise ValueError("report needs at least one bond vector")
    mat = _pad(lambdas)
    mean = mat.mean(axis=0)
    mean = mean / np.linalg.norm(mean)
    per_dir = tuple(entropy_of(row) for row in mat)
    spread = 0.0
    for i, j in itertools.combinations(range(len(mat)), 2):
        spread = max(spread, float(np.max(np.abs(mat[i] - mat[j]))))
    return BondEntropyReport(entropy_of(mean), per_dir, spread)
