"""Simple-update imaginary-time evolution for infinite PEPS.

The unit cell holds two tensors ``A`` and ``B`` on the two sublattices of the
square (z=4) or cubic (z=6) lattice. Virtual legs follow the direction list
``+x, -x, +y, -y, +z, -z``. Bond ``k`` joins leg ``k`` of A to the opposite
leg ``k ^ 1`` of B and carries the bond vector ``lambdas[k]``; consequently
leg ``j`` of B carries ``lambdas[j ^ 1]``.

Each update absorbs the full environment bond vectors into the site
tensors, reduces both sides by QR so the truncated SVD acts on a small core,
and divides the environment vectors back out afterwards.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from bondent.models import BondModelSpec, LatticeSpec
from bondent.mps import _padded_diff, _pinv, evolution_gate
from bondent.schedule import Convergence, DivergenceError, EvolutionSchedule
from bondent.tensor import DEFAULT_SV_FLOOR, SvdConvergenceError, svd_truncate

DIRECTIONS = ("+x", "-x", "+y", "-y", "+z", "-z")
ELEMENT_BUDGET = 2**28
TAIL_LENGTH = 100
# a cell whose site tensors have physical rank one (to this relative level) is a product state
PRODUCT_RANK_CUTOFF = 1e-7


class MemoryCapError(MemoryError):
    pass


def opposite(k: int) -> int:
    return k ^ 1


@dataclass
class PepsUnitCell:
    tensor_a: np.ndarray  # (2, chi_0, ..., chi_{z-1})
    tensor_b: np.ndarray  # (2, chi_1, chi_0, chi_3, chi_2, ...)
    lambdas: list[np.ndarray]
    lattice: LatticeSpec

    @property
    def z(self) -> int:
        return self.lattice.coordination

    def copy(self) -> "PepsUnitCell":
        return PepsUnitCell(self.tensor_a.copy(), self.tensor_b.copy(), [l.copy() for l in self.lambdas], self.lattice)


def init_peps(lattice: LatticeSpec, m: int, noise_amplitude: float = 1e-2, seed: int = 0) -> PepsUnitCell:
    """+x product state at virtual rank 1 padded to ``m``, plus uniform noise."""
    if lattice.dimension not in (2, 3):
        raise ValueError("init_peps needs a 2D or 3D lattice")
    if m < 1:
        raise ValueError("bond dimension must be at least 1")
    z = lattice.coordination
    rng = np.random.default_rng(seed)
    tensors = []
    for _ in range(2):
        t = np.zeros((2,) + (m,) * z)
        t[(slice(None),) + (0,) * z] = 1.0 / np.sqrt(2.0)
        t += noise_amplitude * rng.uniform(-1.0, 1.0, size=t.shape)
        tensors.append(t)
    lambdas = []
    for _ in range(z):
        lam = np.zeros(m)
        lam[0] = 1.0
        lambdas.append(lam)
    return PepsUnitCell(tensors[0], tensors[1], lambdas, lattice)


def _scale_legs(t: np.ndarray, vectors: dict[int, np.ndarray]) -> np.ndarray:
    """Multiply leg ``j`` (axis ``1 + j``) by ``vectors[j]``."""
    nd = t.ndim
    for j, vec in vectors.items():
        shape = [1] * nd
        shape[1 + j] = vec.size
        t = t * vec.reshape(shape)
    return t


def _reduce(t: np.ndarray, leg: int):
    """Split ``t`` into Q (environment legs) and R (physical + ``leg``)."""
    z = t.ndim - 1
    env = [j for j in range(z) if j != leg]
    order = [1 + j for j in env] + [0, 1 + leg]
    moved = t.transpose(order)
    env_shape = moved.shape[: z - 1]
    mat = moved.reshape(-1, 2 * t.shape[1 + leg])
    q, r = np.linalg.qr(mat)
    return q, r, env, env_shape


def _restore(q: np.ndarray, core: np.ndarray, env: list[int], env_shape: tuple[int, ...], leg: int) -> np.ndarray:
    chi = core.shape[-1]
    full = (q @ core.reshape(core.shape[0], -1)).reshape(env_shape + (2, chi))
    # moved axes are (env..., phys, leg); invert that permutation
    z = len(env) + 1
    order = [1 + j for j in env] + [0, 1 + leg]
    inverse = np.argsort(order)
    return full.transpose(inverse)


def simple_update_step(
    cell: PepsUnitCell,
    gate: np.ndarray,
    direction: int,
    m: int,
    sv_floor: float = DEFAULT_SV_FLOOR,
    element_budget: int = ELEMENT_BUDGET,
):
    """Apply ``gate`` across bond ``direction``; returns ``(cell, delta, discarded_weight)``."""
    z = cell.z
    k = int(direction)
    if not 0 <= k < z:
        raise ValueError(f"direction must be in 0..{z - 1}, got {direction}")
    gate = np.asarray(getattr(gate, "array", gate)).reshape(2, 2, 2, 2)
    kb = opposite(k)
    lam = cell.lambdas
    for t in (cell.tensor_a, cell.tensor_b):
        if t.size > element_budget:
            raise MemoryCapError(f"site tensor with {t.size} elements exceeds budget {element_budget}")

    env_a = {j: lam[j] for j in range(z) if j != k}
    env_b = {j: lam[opposite(j)] for j in range(z) if j != kb}
    qa, ra, legs_a, shape_a = _reduce(_scale_legs(cell.tensor_a, env_a), k)
    qb, rb, legs_b, shape_b = _reduce(_scale_legs(cell.tensor_b, env_b), kb)
    chi = lam[k].size
    ra = ra.reshape(-1, 2, chi)
    rb = rb.reshape(-1, 2, chi)

    theta = np.tensordot(ra * lam[k][None, None, :], rb, axes=(2, 2))  # (a, s, b, t)
    theta = np.tensordot(theta, gate, axes=([1, 3], [2, 3]))  # (a, b, s', t')
    na, nb = theta.shape[0], theta.shape[1]
    theta = theta.transpose(0, 2, 1, 3).reshape(na * 2, nb * 2)
    if theta.size > element_budget:
        raise MemoryCapError(f"two-site core with {theta.size} elements exceeds budget {element_budget}")
    try:
        res = svd_truncate(theta, m, sv_floor)
    except SvdConvergenceError as exc:
        raise DivergenceError(str(exc)) from exc
    s = res.singular_values
    new_lam = s / np.linalg.norm(s)
    if not np.all(np.isfinite(new_lam)):
        raise DivergenceError("bond vector is not finite")
    kept = s.size
    core_a = res.left.array.reshape(na, 2, kept)
    core_b = res.right.array.reshape(kept, nb, 2).transpose(1, 2, 0)

    new_a = _restore(qa, core_a, legs_a, shape_a, k)
    new_b = _restore(qb, core_b, legs_b, shape_b, kb)
    new_a = _scale_legs(new_a, {j: _pinv(v) for j, v in env_a.items()})
    new_b = _scale_legs(new_b, {j: _pinv(v) for j, v in env_b.items()})
    na_max, nb_max = np.max(np.abs(new_a)), np.max(np.abs(new_b))
    if not (np.isfinite(na_max) and np.isfinite(nb_max)) or na_max == 0 or nb_max == 0:
        raise DivergenceError("site tensor is not finite")

    new_lambdas = list(lam)
    new_lambdas[k] = new_lam
    delta = _padded_diff(new_lam, lam[k])
    new_cell = PepsUnitCell(new_a / na_max, new_b / nb_max, new_lambdas, cell.lattice)
    return new_cell, delta, res.discarded_weight


def _physical_factor(t: np.ndarray) -> tuple[np.ndarray, float]:
    """Leading physical vector of ``t`` and the relative weight of the rest."""
    u, sv, _ = np.linalg.svd(t.reshape(2, -1), full_matrices=False)
    vec = u[:, 0] if u[np.argmax(np.abs(u[:, 0])), 0] >= 0 else -u[:, 0]
    return vec, float(sv[1] / sv[0]) if sv[0] > 0 else 0.0


def collapse_product(cell: PepsUnitCell, cutoff: float = PRODUCT_RANK_CUTOFF) -> PepsUnitCell | None:
    """Bond-dimension-one form of a cell that represents a product state.

    When every site tensor factors as (physical vector) x (virtual part) the
    network contracts to a product state whatever the bond vectors say, and
    its canonical form has a single unit entry per bond. Simple update has no
    restoring force on such redundant virtual content, so it is removed
    here. Returns ``None`` when either tensor is genuinely entangled or the
    cell is already at bond dimension one.
    """
    if all(v.size == 1 for v in cell.lambdas):
        return None
    va, ra = _physical_factor(cell.tensor_a)
    vb, rb = _physical_factor(cell.tensor_b)
    if max(ra, rb) > cutoff:
        return None
    shape = (2,) + (1,) * cell.z
    return PepsUnitCell(va.reshape(shape), vb.reshape(shape), [np.ones(1) for _ in range(cell.z)], cell.lattice)


def bond_energy(cell: PepsUnitCell, hamiltonian: np.ndarray, direction: int) -> float:
    """Expectation of a two-site term on bond ``direction``, environment = bond vectors."""
    z = cell.z
    k = int(direction)
    kb = opposite(k)
    lam = cell.lambdas
    _, ra, _, _ = _reduce(_scale_legs(cell.tensor_a, {j: lam[j] for j in range(z) if j != k}), k)
    _, rb, _, _ = _reduce(_scale_legs(cell.tensor_b, {j: lam[opposite(j)] for j in range(z) if j != kb}), kb)
    chi = lam[k].size
    theta = np.tensordot(ra.reshape(-1, 2, chi) * lam[k], rb.reshape(-1, 2, chi), axes=(2, 2))
    theta = theta.transpose(1, 3, 0, 2).reshape(4, -1)
    h = np.asarray(getattr(hamiltonian, "array", hamiltonian)).reshape(4, 4)
    return float(np.real(np.vdot(theta, h @ theta)) / np.vdot(theta, theta).real)


@dataclass
class PepsResult:
    state: PepsUnitCell
    convergence: Convergence


def find_ground_peps(
    spec: BondModelSpec,
    m: int,
    schedule: EvolutionSchedule | None = None,
    seed: int = 0,
    noise_amplitude: float = 1e-2,
    sv_floor: float = DEFAULT_SV_FLOOR,
    initial: PepsUnitCell | None = None,
) -> PepsResult:
    """Simple-update schedule; one sweep updates every direction once in order."""
    d = spec.lattice.dimension
    if d not in (2, 3):
        raise ValueError("find_ground_peps handles 2D and 3D lattices only")
    schedule = schedule or EvolutionSchedule.default(d)
    cell = initial.copy() if initial is not None else init_peps(spec.lattice, m, noise_amplitude, seed)
    z = cell.z
    conv = Convergence()
    for tau in schedule.tau_stages:
        if schedule.max_sweeps_per_stage == 0:
            break
        gate = evolution_gate(spec, tau)
        tail: deque[float] = deque(maxlen=TAIL_LENGTH)
        sweeps = 0
        delta = float("inf")
        while sweeps < schedule.max_sweeps_per_stage:
            delta = 0.0
            dw = 0.0
            for k in range(z):
                cell, dk, dwk = simple_update_step(cell, gate, k, m, sv_floor)
                delta = max(delta, dk)
                dw = max(dw, dwk)
            product = collapse_product(cell)
            if product is not None:
                delta = max(delta, max(_padded_diff(a, b) for a, b in zip(product.lambdas, cell.lambdas)))
                cell = product
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
    return PepsResult(cell, conv)
