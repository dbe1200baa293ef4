"""Independent ground truth for small periodic rings plus analytic phase lines.

Rings are assembled from the same bond terms as the tensor-network engines
(one bond per neighbouring pair, N bonds on an N-site ring). For ``N = 2`` the
two bonds of the ring both join sites 0 and 1, so the pair is counted twice;
this is the ordinary periodic convention and gives a singlet energy of
``2 * (-3/4)`` for the Heisenberg point.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from bondent.models import BondModelSpec, LatticeSpec, bond_hamiltonian
from bondent.schedule import DivergenceError, EvolutionSchedule
from bondent.tensor import herm_expm

MAX_SITES = 12
BETHE_TERM_FLOOR = 1e-15


class RingSizeError(ValueError):
    pass


@dataclass(frozen=True)
class RingSpec:
    model: BondModelSpec
    sites: int

    def __post_init__(self):
        if not 2 <= self.sites <= MAX_SITES:
            raise RingSizeError(f"ring size must be in 2..{MAX_SITES}, got {self.sites}")
        if self.model.lattice.dimension != 1:
            object.__setattr__(self, "model", dataclasses.replace(self.model, lattice=LatticeSpec(1)))


def _site_permutation(n: int, shift: int) -> np.ndarray:
    """Basis-index map that moves site ``i`` to site ``(i + shift) % n``."""
    idx = np.arange(2**n)
    out = np.zeros_like(idx)
    for i in range(n):
        bit = (idx >> (n - 1 - i)) & 1
        out |= bit << (n - 1 - (i + shift) % n)
    return out


def ring_hamiltonian(ring: RingSpec) -> scipy.sparse.csr_matrix:
    """Sparse ``2^N x 2^N`` Hamiltonian, site 0 is the most significant bit."""
    n = ring.sites
    h = scipy.sparse.csr_matrix(bond_hamiltonian(ring.model).array)
    h0 = scipy.sparse.kron(h, scipy.sparse.identity(2 ** (n - 2)), format="csr") if n > 2 else h
    total = h0.copy()
    for shift in range(1, n):
        perm = _site_permutation(n, shift)
        inv = np.argsort(perm)
        total = total + h0[inv][:, inv]
    return total.tocsr()


def _fix_sign(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0 else v


def exact_ground(ring: RingSpec, seed: int = 0) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of the ring; returns (energy per site, normalized state)."""
    ham = ring_hamiltonian(ring)
    dim = ham.shape[0]
    if dim <= 256:
        w, v = np.linalg.eigh(ham.toarray())
        e0, psi = w[0], v[:, 0]
    else:
        v0 = np.random.default_rng(seed).standard_normal(dim)
        w, v = scipy.sparse.linalg.eigsh(ham, k=1, which="SA", v0=v0, tol=1e-12)
        e0, psi = w[0], v[:, 0]
    psi = _fix_sign(psi / np.linalg.norm(psi))
    return float(e0) / ring.sites, psi


def apply_gate(psi: np.ndarray, gate: np.ndarray, i: int, j: int) -> np.ndarray:
    """Apply a (2,2,2,2) gate to sites ``i, j`` of a state shaped ``(2,)*N + rest``."""
    out = np.tensordot(gate, psi, axes=([2, 3], [i, j]))
    return np.moveaxis(out, [0, 1], [i, j])


def _sweep_operator(n: int, gate: np.ndarray) -> np.ndarray:
    """Dense matrix of one sweep: bonds (0,1), (1,2), ..., (N-1,0) in order."""
    dim = 2**n
    op = np.eye(dim).reshape((2,) * n + (dim,))
    for i in range(n):
        op = apply_gate(op, gate, i, (i + 1) % n)
    return op.reshape(dim, dim)


def plus_x_state(n: int, noise_amplitude: float = 1e-2, seed: int = 0) -> np.ndarray:
    psi = np.full(2**n, 2.0 ** (-n / 2))
    psi += noise_amplitude * 2.0 ** (-n / 2) * np.random.default_rng(seed).uniform(-1.0, 1.0, size=psi.size)
    return psi / np.linalg.norm(psi)


def trotter_evolve_dense(
    ring: RingSpec,
    schedule: EvolutionSchedule | None = None,
    seed: int = 0,
    noise_amplitude: float = 1e-2,
    initial: np.ndarray | None = None,
) -> np.ndarray:
    """Imaginary-time evolution of a dense state vector with the engines' gates.

    Each sweep applies ``exp(-tau h_bond)`` to every ring bond in order and
    renormalizes; a stage ends when no amplitude moves by more than the
    stage tolerance.
    """
    schedule = schedule or EvolutionSchedule.default(1)
    n = ring.sites
    psi = plus_x_state(n, noise_amplitude, seed) if initial is None else np.asarray(initial, dtype=float).copy()
    if schedule.max_sweeps_per_stage == 0:
        return psi
    hb = bond_hamiltonian(ring.model)
    psi = _fix_sign(psi / np.linalg.norm(psi))
    for tau in schedule.tau_stages:
        sweep = _sweep_operator(n, herm_expm(hb, -tau).array.reshape(2, 2, 2, 2))
        for _ in range(schedule.max_sweeps_per_stage):
            new = sweep @ psi
            norm = np.linalg.norm(new)
            if not np.isfinite(norm) or norm == 0.0:
                raise DivergenceError("dense state vector is not finite")
            new = _fix_sign(new / norm)
            delta = float(np.max(np.abs(new - psi)))
            psi = new
            if delta < schedule.stage_tolerance:
                break
    return psi


def half_ring_entropy(psi: np.ndarray, n: int) -> float:
    """Entanglement entropy (bits) between sites ``0..N/2-1`` and the rest."""
    half = n // 2
    s = np.linalg.svd(np.asarray(psi).reshape(2**half, 2 ** (n - half)), compute_uv=False)
    p = s**2 / np.sum(s**2)
    p = p[p > 1e-14]
    return float(-np.sum(p * np.log2(p)))


def energy_per_site(ring: RingSpec, psi: np.ndarray) -> float:
    ham = ring_hamiltonian(ring)
    return float(psi @ (ham @ psi) / (psi @ psi)) / ring.sites


# ---------------------------------------------------------------------------
# analytic reference lines


def classical_field(gamma: float, d: int) -> float:
    """Field on the XY classical circle ``(h/d)^2 + gamma^2 = 1``."""
    if abs(gamma) > 1:
        raise ValueError("classical circle needs |gamma| <= 1")
    return d * math.sqrt(1.0 - gamma * gamma)


def classical_gamma(field: float, d: int) -> float:
    """Positive anisotropy on the XY classical circle."""
    if abs(field) > d:
        raise ValueError("classical circle needs |h| <= d")
    return math.sqrt(1.0 - (field / d) ** 2)


def saturation_field(delta: float, d: int) -> float:
    """XXZ ferromagnetic boundary ``h_s = d (1 + delta)``."""
    return d * (1.0 + delta)


def saturation_delta(field: float, d: int) -> float:
    return field / d - 1.0


def bethe_critical_field(delta: float) -> float:
    """Neel / spin-flop boundary of the 1D XXZ chain for ``delta > 1``.

    ``h_c = (pi sinh l / l) sum_n sech[(pi^2 / 2l)(1 + 2n)]`` with
    ``l = arccosh(delta)``; the sum runs symmetrically in ``n`` and stops once
    a term drops below 1e-15.
    """
    if delta <= 1.0:
        raise ValueError(f"Bethe-ansatz critical field needs delta > 1, got {delta}")
    lam = math.acosh(delta)
    a = math.pi**2 / (2.0 * lam)
    total = 0.0
    k = 0
    while True:
        # n = k and n = -(k + 1) give equal |1 + 2n|
        term = 1.0 / math.cosh(a * (1 + 2 * k)) if a * (1 + 2 * k) < 700 else 0.0
        total += 2.0 * term
        if term < BETHE_TERM_FLOOR:
            break
        k += 1
    return math.pi * math.sinh(lam) / lam * total


@dataclass(frozen=True)
class ReferenceLine:
    name: str
    description: str
    evaluate: Callable[[float], float]


def reference_lines(family: str, d: int) -> dict[str, ReferenceLine]:
    """Analytic phase-diagram lines for a model family in dimension ``d``."""
    if d not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2 or 3, got {d}")
    family = family.upper()
    if family in ("XY", "ISING"):
        return {
            "classical_field": ReferenceLine(
                "classical_field", f"(h/{d})^2 + gamma^2 = 1 solved for h >= 0", lambda g: classical_field(g, d)
            ),
            "classical_gamma": ReferenceLine(
                "classical_gamma", f"(h/{d})^2 + gamma^2 = 1 solved for gamma >= 0", lambda h: classical_gamma(h, d)
            ),
        }
    if family == "XXZ":
        lines = {
            "saturation_field": ReferenceLine(
                "saturation_field", f"h_s = {d} (1 + delta)", lambda delta: saturation_field(delta, d)
            ),
            "saturation_delta": ReferenceLine(
                "saturation_delta", f"delta_s = h / {d} - 1", lambda h: saturation_delta(h, d)
            ),
        }
        if d == 1:
            lines["bethe_critical_field"] = ReferenceLine(
                "bethe_critical_field", "Neel to spin-flop field of the chain (delta > 1)", bethe_critical_field
            )
        return lines
    raise ValueError(f"unknown model family {family!r}")
