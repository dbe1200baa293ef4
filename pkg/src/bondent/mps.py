"""Infinite TEBD in imaginary time for a two-site unit cell.

The state is kept in Vidal form ``... lambda_b Gamma_a lambda_a Gamma_b
lambda_b ...``; ``lambda_a`` sits on the A-B bond and ``lambda_b`` on the
B-A bond. Bond dimensions may be smaller than the cap ``m`` when singular
values fall below the floor.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from bondent.models import BondModelSpec, bond_hamiltonian, evolution_hamiltonian
from bondent.schedule import PINV_CUTOFF, Convergence, DivergenceError, EvolutionSchedule
from bondent.tensor import DEFAULT_SV_FLOOR, SvdConvergenceError, herm_expm, svd_truncate

TAIL_LENGTH = 100


@dataclass
class CanonicalMps:
    gamma_a: np.ndarray  # (chi_b, 2, chi_a)
    gamma_b: np.ndarray  # (chi_a, 2, chi_b)
    lambda_a: np.ndarray
    lambda_b: np.ndarray

    @property
    def lambdas(self) -> list[np.ndarray]:
        return [self.lambda_a, self.lambda_b]

    def copy(self) -> "CanonicalMps":
        return CanonicalMps(self.gamma_a.copy(), self.gamma_b.copy(), self.lambda_a.copy(), self.lambda_b.copy())


def _pinv(lam: np.ndarray) -> np.ndarray:
    out = np.zeros_like(lam)
    mask = lam > PINV_CUTOFF
    out[mask] = 1.0 / lam[mask]
    return out


def _padded_diff(a: np.ndarray, b: np.ndarray) -> float:
    if a.size < b.size:
        a, b = b, a
    d = a.copy()
    d[: b.size] -= b
    return float(np.max(np.abs(d)))


def init_mps(m: int, noise_amplitude: float = 1e-2, seed: int = 0) -> CanonicalMps:
    """+x product state at virtual rank 1, zero-padded to ``m``, plus uniform noise."""
    if m < 1:
        raise ValueError("bond dimension must be at least 1")
    rng = np.random.default_rng(seed)
    gammas = []
    for _ in range(2):
        g = np.zeros((m, 2, m))
        g[0, :, 0] = 1.0 / np.sqrt(2.0)
        g += noise_amplitude * rng.uniform(-1.0, 1.0, size=g.shape)
        gammas.append(g)
    lambdas = []
    for _ in range(2):
        lam = np.zeros(m)
        lam[0] = 1.0
        lam[1:] = noise_amplitude * rng.uniform(0.0, 1.0, size=m - 1)
        lam[1:] = np.sort(lam[1:])[::-1]
        lambdas.append(lam / np.linalg.norm(lam))
    return CanonicalMps(gammas[0], gammas[1], lambdas[0], lambdas[1])


def trotter_gate(spec: BondModelSpec, tau: float) -> np.ndarray:
    """``exp(-tau h_bond)`` as a (2, 2, 2, 2) array ``[s1', s2', s1, s2]``."""
    return herm_expm(bond_hamiltonian(spec), -tau).array.reshape(2, 2, 2, 2)


def evolution_gate(spec: BondModelSpec, tau: float) -> np.ndarray:
    """Like :func:`trotter_gate` but in the frame the engines evolve."""
    return herm_expm(evolution_hamiltonian(spec), -tau).array.reshape(2, 2, 2, 2)


def _update_bond(gl, gr, lam_mid, lam_out, gate, m, sv_floor):
    chi = lam_out.size
    theta = (lam_out[:, None, None] * gl) * lam_mid[None, None, :]
    theta = np.tensordot(theta, gr, axes=(2, 0)) * lam_out[None, None, None, :]
    theta = np.tensordot(theta, gate, axes=([1, 2], [2, 3])).transpose(0, 2, 3, 1)
    theta = theta.reshape(chi * 2, 2 * chi)
    try:
        res = svd_truncate(theta, m, sv_floor)
    except SvdConvergenceError as exc:
        raise DivergenceError(str(exc)) from exc
    s = res.singular_values
    k = s.size
    inv = _pinv(lam_out)
    new_gl = res.left.array.reshape(chi, 2, k) * inv[:, None, None]
    new_gr = res.right.array.reshape(k, 2, chi) * inv[None, None, :]
    new_lam = s / np.linalg.norm(s)
    if not np.all(np.isfinite(new_lam)):
        raise DivergenceError("bond vector is not finite")
    return new_gl, new_gr, new_lam, res.discarded_weight


def tebd_sweep(state: CanonicalMps, gate: np.ndarray, m: int, sv_floor: float = DEFAULT_SV_FLOOR):
    """Apply ``gate`` on the A-B bond and then on the B-A bond.

    Returns ``(new_state, delta, discarded_weight)`` where ``delta`` is the
    largest infinity-norm change of either bond vector.
    """
    gate = np.asarray(getattr(gate, "array", gate)).reshape(2, 2, 2, 2)
    ga, gb, la, dw_a = _update_bond(state.gamma_a, state.gamma_b, state.lambda_a, state.lambda_b, gate, m, sv_floor)
    gb, ga, lb, dw_b = _update_bond(gb, ga, state.lambda_b, la, gate, m, sv_floor)
    new = CanonicalMps(ga, gb, la, lb)
    delta = max(_padded_diff(la, state.lambda_a), _padded_diff(lb, state.lambda_b))
    return new, delta, max(dw_a, dw_b)


@dataclass
class MpsResult:
    state: CanonicalMps
    convergence: Convergence


def find_ground_mps(
    spec: BondModelSpec,
    m: int,
    schedule: EvolutionSchedule | None = None,
    seed: int = 0,
    noise_amplitude: float = 1e-2,
    sv_floor: float = DEFAULT_SV_FLOOR,
    initial: CanonicalMps | None = None,
) -> MpsResult:
    """Run the imaginary-time schedule until bond vectors stop moving.

    Non-convergence is reported in the returned metadata, not raised.
    """
    if spec.lattice.dimension != 1:
        raise ValueError("find_ground_mps handles one-dimensional lattices only")
    schedule = schedule or EvolutionSchedule.default(1)
    state = initial.copy() if initial is not None else init_mps(m, noise_amplitude, seed)
    conv = Convergence()
    for tau in schedule.tau_stages:
        if schedule.max_sweeps_per_stage == 0:
            break
        gate = evolution_gate(spec, tau)
        tail: deque[float] = deque(maxlen=TAIL_LENGTH)
        sweeps = 0
        delta = float("inf")
        while sweeps < schedule.max_sweeps_per_stage:
            state, delta, dw = tebd_sweep(state, gate, m, sv_floor)
            sweeps += 1
            tail.append(delta)
            if delta < schedule.stage_tolerance:
                break
        conv.sweeps_per_stage.append(sweeps)
        conv.final_delta = delta
        conv.final_tau = tau
        conv.discarded_weight = dw
        conv.delta_tail = list(tail)
    conv.converged = conv.final_delta < schedule.stage_tolerance
    return MpsResult(state, conv)
