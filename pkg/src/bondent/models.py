"""Spin-1/2 bond Hamiltonians for the XY (incl. Ising) and XXZ families.

The single-site field is split evenly over the ``z`` bonds touching a site,
so summing the bond terms over a regular lattice reproduces the full
Hamiltonian::

    XY:  H = -sum_<ij> [(1+g) Sx Sx + (1-g) Sy Sy] + h sum_i Sz
    XXZ: H =  sum_<ij> [Sx Sx + Sy Sy + D Sz Sz]  - h sum_i Sz
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from bondent.tensor import DenseTensor

GEOMETRIES = {1: "chain", 2: "square", 3: "cubic"}
FAMILIES = ("XY", "XXZ")


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeSpec:
    dimension: int

    def __post_init__(self):
        if self.dimension not in GEOMETRIES:
            raise ModelError(f"dimension must be 1, 2 or 3, got {self.dimension}")

    @property
    def coordination(self) -> int:
        return 2 * self.dimension

    @property
    def geometry(self) -> str:
        return GEOMETRIES[self.dimension]


@dataclass(frozen=True)
class BondModelSpec:
    """Model family plus parameters. Ising is ``XY`` with ``gamma=1``."""

    family: str
    field: float = 0.0
    gamma: float = 1.0
    delta: float = 1.0
    lattice: LatticeSpec = LatticeSpec(1)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ModelError(f"unknown model family {self.family!r}; expected one of {FAMILIES}")

    @classmethod
    def ising(cls, field: float, dimension: int = 1) -> "BondModelSpec":
        return cls("XY", field=field, gamma=1.0, lattice=LatticeSpec(dimension))

    @classmethod
    def xy(cls, gamma: float, field: float, dimension: int = 1) -> "BondModelSpec":
        return cls("XY", field=field, gamma=gamma, lattice=LatticeSpec(dimension))

    @classmethod
    def xxz(cls, delta: float, field: float, dimension: int = 1) -> "BondModelSpec":
        return cls("XXZ", field=field, delta=delta, lattice=LatticeSpec(dimension))

    def with_param(self, name: str, value: float) -> "BondModelSpec":
        return dataclasses.replace(self, **{name: float(value)})

    def as_dict(self) -> dict:
        d = {"family": self.family, "field": self.field, "dimension": self.lattice.dimension}
        if self.family == "XY":
            d["gamma"] = self.gamma
        else:
            d["delta"] = self.delta
        return d


def spin_ops() -> tuple[DenseTensor, DenseTensor, DenseTensor]:
    """Return ``(Sx, iSy, Sz)`` as real 2x2 matrices.

    ``Sy`` itself is imaginary; only ``Sy (x) Sy = -(iSy) (x) (iSy)`` is ever
    needed, and that product is real.
    """
    sx = np.array([[0.0, 0.5], [0.5, 0.0]])
    isy = np.array([[0.0, 0.5], [-0.5, 0.0]])
    sz = np.array([[0.5, 0.0], [0.0, -0.5]])
    return DenseTensor(sx), DenseTensor(isy), DenseTensor(sz)


def _couplings() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    sx, isy, sz = (t.array for t in spin_ops())
    return np.kron(sx, sx), -np.kron(isy, isy), np.kron(sz, sz), np.kron(sz, np.eye(2)) + np.kron(np.eye(2), sz)


def bond_hamiltonian(spec: BondModelSpec) -> DenseTensor:
    """4x4 real symmetric bond term, field split as ``h/z`` per bond.

    Basis ordering is ``(s1, s2)`` row-major with ``s = 0`` for spin up.
    """
    xx, yy, zz, field_pair = _couplings()
    z = spec.lattice.coordination
    if spec.family == "XY":
        h = -((1.0 + spec.gamma) * xx + (1.0 - spec.gamma) * yy) + (spec.field / z) * field_pair
    elif spec.family == "XXZ":
        h = xx + yy + spec.delta * zz - (spec.field / z) * field_pair
    else:
        raise ModelError(f"unknown model family {spec.family!r}")
    return DenseTensor(0.5 * (h + h.T))


def real_frame(spec: BondModelSpec) -> BondModelSpec:
    """XY model with ``gamma >= 0`` equivalent to ``spec`` under a site rotation.

    The on-site rotation ``diag(1, i)`` maps Sx -> Sy, Sy -> -Sx and leaves Sz
    alone, turning the XY model at ``gamma`` into the one at ``-gamma``. For
    ``gamma < 0`` the ordered states point along y and cannot be written with
    real amplitudes; the rotated model orders along x instead. Local unitaries
    do not change Schmidt coefficients, so bond vectors are identical.
    """
    if spec.family == "XY" and spec.gamma < 0.0:
        return dataclasses.replace(spec, gamma=-spec.gamma)
    return spec


SUBLATTICE_FLIP = np.diag([1.0, -1.0])


def evolution_hamiltonian(spec: BondModelSpec) -> DenseTensor:
    """Bond term the imaginary-time engines evolve.

    XY models use :func:`real_frame`. For XXZ the B sublattice is rotated by
    pi about z (``diag(1, -1)``, real), which flips the sign of the in-plane
    couplings on every A-B bond: ``-Sx Sx - Sy Sy + D Sz Sz``. The in-plane
    antiferromagnet becomes a ferromagnet that the +x start already
    resembles. All lattices here are bipartite with bonds joining A to B
    only, so this is a product of site unitaries and leaves bond vectors
    unchanged.
    """
    h = bond_hamiltonian(real_frame(spec)).array
    if spec.family == "XXZ":
        flip = np.kron(np.eye(2), SUBLATTICE_FLIP)
        h = flip @ h @ flip
    return DenseTensor(h)
