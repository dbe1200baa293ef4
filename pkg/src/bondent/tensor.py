"""Dense real tensor algebra used by every other module.

Everything here is a pure function of its inputs. Tensors are real-valued
numpy arrays in row-major order wrapped by :class:`DenseTensor`, which adds
optional axis labels. Functions accept either a ``DenseTensor`` or a plain
``ndarray`` and return ``DenseTensor``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
import scipy.linalg
from scipy.linalg.lapack import dgesdd as _gesdd

MAX_RANK = 12
DEFAULT_SV_FLOOR = 1e-12


class TensorError(ValueError):
    """Base class for tensor-algebra contract violations."""


class ShapeMismatchError(TensorError):
    pass


class RankOverflowError(TensorError):
    pass


class ElementCountError(TensorError):
    pass


class AsymmetryError(TensorError):
    pass


class SvdConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class DenseTensor:
    """Real rank-r array with optional unique axis labels."""

    array: np.ndarray
    axis_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        arr = np.asarray(self.array, dtype=np.float64)
        object.__setattr__(self, "array", arr)
        if self.axis_labels is not None:
            labels = tuple(self.axis_labels)
            if len(labels) != arr.ndim:
                raise TensorError(f"{len(labels)} labels for a rank-{arr.ndim} tensor")
            if len(set(labels)) != len(labels):
                raise TensorError(f"axis labels not unique: {labels}")
            object.__setattr__(self, "axis_labels", labels)

    @classmethod
    def from_flat(cls, shape: Sequence[int], data: Sequence[float], axis_labels=None) -> "DenseTensor":
        shape = tuple(int(s) for s in shape)
        if any(s <= 0 for s in shape):
            raise TensorError(f"axis extents must be positive, got {shape}")
        flat = np.asarray(data, dtype=np.float64).ravel()
        if int(np.prod(shape, dtype=np.int64)) != flat.size:
            raise ElementCountError(f"shape {shape} needs {int(np.prod(shape))} elements, got {flat.size}")
        return cls(flat.reshape(shape), axis_labels)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.array.shape

    @property
    def rank(self) -> int:
        return self.array.ndim

    @property
    def data(self) -> np.ndarray:
        """Flat row-major view of the entries."""
        return self.array.reshape(-1)

    def axis(self, label: str) -> int:
        if self.axis_labels is None:
            raise TensorError("tensor carries no axis labels")
        return self.axis_labels.index(label)


TensorLike = Union[DenseTensor, np.ndarray]


def as_array(t: TensorLike) -> np.ndarray:
    return t.array if isinstance(t, DenseTensor) else np.asarray(t, dtype=np.float64)


def contract(a: TensorLike, b: TensorLike, pairs: Sequence[tuple[int, int]], max_rank: int = MAX_RANK) -> DenseTensor:
    """Sum over paired axes of ``a`` and ``b``.

    The result carries the free axes of ``a`` followed by the free axes of
    ``b``, each in their original order.
    """
    x, y = as_array(a), as_array(b)
    axes_a = [int(i) for i, _ in pairs]
    axes_b = [int(j) for _, j in pairs]
    if len(set(axes_a)) != len(axes_a) or len(set(axes_b)) != len(axes_b):
        raise ShapeMismatchError(f"contraction pairs reuse an axis: {list(pairs)}")
    for i, j in zip(axes_a, axes_b):
        if not (0 <= i < x.ndim and 0 <= j < y.ndim):
            raise ShapeMismatchError(f"axis pair ({i}, {j}) out of range for ranks {x.ndim}, {y.ndim}")
        if x.shape[i] != y.shape[j]:
            raise ShapeMismatchError(f"axis pair ({i}, {j}): extent {x.shape[i]} != {y.shape[j]}")
    out_rank = x.ndim + y.ndim - 2 * len(axes_a)
    if out_rank > max_rank:
        raise RankOverflowError(f"result rank {out_rank} exceeds cap {max_rank}")
    return DenseTensor(np.tensordot(x, y, axes=(axes_a, axes_b)))


def permute_reshape(t: TensorLike, new_axis_order: Sequence[int], new_shape: Sequence[int]) -> DenseTensor:
    """Transpose to ``new_axis_order`` then reshape (always copies)."""
    x = as_array(t)
    order = tuple(int(i) for i in new_axis_order)
    if sorted(order) != list(range(x.ndim)):
        raise TensorError(f"{order} is not a permutation of {x.ndim} axes")
    new_shape = tuple(int(s) for s in new_shape)
    if int(np.prod(new_shape, dtype=np.int64)) != x.size:
        raise ElementCountError(f"cannot reshape {x.size} elements into {new_shape}")
    return DenseTensor(np.ascontiguousarray(np.transpose(x, order)).reshape(new_shape))


@dataclass(frozen=True)
class SvdResult:
    left: DenseTensor
    singular_values: np.ndarray
    right: DenseTensor
    discarded_weight: float


def _fix_signs(u: np.ndarray, vt: np.ndarray) -> None:
    # Largest-magnitude entry of each left vector made non-negative; argmax
    # returns the lowest index on ties.
    idx = np.argmax(np.abs(u), axis=0)
    flip = u[idx, np.arange(u.shape[1])] < 0
    u[:, flip] *= -1.0
    vt[flip, :] *= -1.0


def svd_truncate(m: TensorLike, max_rank: int, sv_floor: float = DEFAULT_SV_FLOOR) -> SvdResult:
    """Truncated singular value decomposition with a deterministic gauge.

    Keeps at most ``max_rank`` triplets and drops any whose singular value is
    below ``sv_floor`` times the largest one. At least one triplet is always
    kept. ``discarded_weight`` is the dropped fraction of the squared
    Frobenius norm.

    Raises:
        SvdConvergenceError: if LAPACK fails or returns non-finite values.
    """
    x = as_array(m)
    if x.ndim != 2:
        raise TensorError(f"svd_truncate needs a matrix, got rank {x.ndim}")
    if max_rank < 1:
        raise ValueError("max_rank must be positive")
    if not np.all(np.isfinite(x)):
        raise SvdConvergenceError("input matrix contains NaN or Inf")
    u, s, vt, info = _gesdd(x, compute_uv=1, full_matrices=0)
    if info != 0:
        try:
            u, s, vt = scipy.linalg.svd(x, full_matrices=False, lapack_driver="gesvd", check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise SvdConvergenceError(f"gesdd info={info}; gesvd: {exc}") from exc
    if not (np.all(np.isfinite(s)) and np.all(np.isfinite(u)) and np.all(np.isfinite(vt))):
        raise SvdConvergenceError("decomposition returned non-finite values")

    total = float(np.dot(s, s))
    keep = min(max_rank, s.size)
    if s.size:
        keep = min(keep, int(np.count_nonzero(s >= sv_floor * s[0])) if s[0] > 0.0 else 1)
    keep = max(keep, 1)
    u, s_kept, vt = u[:, :keep].copy(), s[:keep].copy(), vt[:keep, :].copy()
    _fix_signs(u, vt)
    if total > 0.0:
        discarded = max(0.0, min(1.0, (total - float(np.dot(s_kept, s_kept))) / total))
    else:
        discarded = 0.0
    return SvdResult(DenseTensor(u), s_kept, DenseTensor(vt), discarded)


def herm_expm(h: TensorLike, scale: float) -> DenseTensor:
    """``exp(scale * h)`` for a real symmetric matrix via eigendecomposition."""
    x = as_array(h)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise TensorError(f"herm_expm needs a square matrix, got shape {x.shape}")
    if x.shape[0] > 16:
        raise TensorError(f"herm_expm is limited to dimension 16, got {x.shape[0]}")
    asym = float(np.max(np.abs(x - x.T))) if x.size else 0.0
    if asym > 1e-9:
        raise AsymmetryError(f"matrix not symmetric: max |h - h^T| = {asym:.3e}")
    sym = 0.5 * (x + x.T)
    w, v = np.linalg.eigh(sym)
    out = (v * np.exp(scale * w)) @ v.T
    return DenseTensor(0.5 * (out + out.T))
