import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bondent.tensor import (
    AsymmetryError,
    DenseTensor,
    ElementCountError,
    RankOverflowError,
    ShapeMismatchError,
    SvdConvergenceError,
    TensorError,
    contract,
    herm_expm,
    permute_reshape,
    svd_truncate,
)

from oracles import jacobi_svd, naive_matmul

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


# contract


def test_identity_contraction():
    v = np.array([0.3, -1.2])
    np.testing.assert_array_equal(contract(np.eye(2), v, [(1, 0)]).array, v)


def test_dot_product():
    assert contract(np.array([1.0, 2.0]), np.array([3.0, 4.0]), [(0, 0)]).array == 11.0


def test_contract_matches_triple_loop():
    rng = np.random.default_rng(3)
    a, b = rng.standard_normal((4, 4)), rng.standard_normal((4, 4))
    got = contract(a, b, [(1, 0)]).array
    ref = naive_matmul(a, b)
    assert np.linalg.norm(got - ref) / np.linalg.norm(ref) <= 1e-13


def test_contract_free_axis_order():
    rng = np.random.default_rng(0)
    a, b = rng.standard_normal((2, 3, 4)), rng.standard_normal((5, 3))
    out = contract(a, b, [(1, 1)])
    assert out.shape == (2, 4, 5)
    np.testing.assert_allclose(out.array, np.einsum("ijk,lj->ikl", a, b))


def test_contract_shape_mismatch_names_pair():
    with pytest.raises(ShapeMismatchError, match=r"\(1, 0\)"):
        contract(np.ones((2, 3)), np.ones((4, 2)), [(1, 0)])


def test_contract_rank_cap():
    a = np.ones((1,) * 7)
    with pytest.raises(RankOverflowError):
        contract(a, a, [])
    assert contract(a, a, [], max_rank=14).rank == 14


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (3, 4), elements=finite), arrays(np.float64, (4, 2), elements=finite),
       arrays(np.float64, (4, 2), elements=finite), finite)
def test_contract_bilinear(a, b, c, alpha):
    lhs = contract(a, alpha * b + c, [(1, 0)]).array
    rhs = alpha * contract(a, b, [(1, 0)]).array + contract(a, c, [(1, 0)]).array
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * (1 + np.abs(rhs).max()))


# DenseTensor and permute_reshape


def test_dense_tensor_invariants():
    t = DenseTensor.from_flat([2, 3], range(6), axis_labels=("row", "col"))
    assert t.axis("col") == 1 and t.data.size == 6
    with pytest.raises(ElementCountError):
        DenseTensor.from_flat([2, 3], range(5))
    with pytest.raises(TensorError):
        DenseTensor(np.zeros((2, 2)), ("a", "a"))
    with pytest.raises(TensorError):
        DenseTensor.from_flat([0, 2], [])


def test_permute_transpose_and_round_trip():
    m = np.arange(6.0).reshape(2, 3)
    np.testing.assert_array_equal(permute_reshape(m, (1, 0), (3, 2)).array, m.T)
    rng = np.random.default_rng(1)
    t = rng.standard_normal((2, 3, 4, 5))
    order = (2, 0, 3, 1)
    p = permute_reshape(t, order, [t.shape[i] for i in order])
    back = permute_reshape(p, np.argsort(order), t.shape)
    assert np.array_equal(back.array, t)


def test_gate_reshape_matches_index_loops():
    rng = np.random.default_rng(2)
    g = rng.standard_normal((2, 2, 2, 2))  # [p1', p2', p1, p2]
    mat = permute_reshape(g, (0, 1, 2, 3), (4, 4)).array
    for p1o in range(2):
        for p2o in range(2):
            for p1 in range(2):
                for p2 in range(2):
                    assert mat[2 * p1o + p2o, 2 * p1 + p2] == g[p1o, p2o, p1, p2]


def test_permute_errors():
    with pytest.raises(ElementCountError):
        permute_reshape(np.ones((2, 3)), (1, 0), (4, 2))
    with pytest.raises(TensorError):
        permute_reshape(np.ones((2, 3)), (0, 0), (2, 3))


# svd_truncate


def test_svd_diagonal():
    res = svd_truncate(np.diag([3.0, 2.0, 1.0]), 2, 0.0)
    np.testing.assert_allclose(res.singular_values, [3, 2])
    assert res.discarded_weight == pytest.approx(1 / 14, abs=1e-15)


def test_svd_identity():
    res = svd_truncate(np.eye(4), 4, 0.0)
    np.testing.assert_allclose(res.singular_values, np.ones(4))
    assert res.discarded_weight == 0.0


def test_svd_full_rank_against_jacobi():
    rng = np.random.default_rng(8)
    m = rng.standard_normal((8, 8))
    res = svd_truncate(m, 8, 0.0)
    recon = res.left.array @ np.diag(res.singular_values) @ res.right.array
    assert np.linalg.norm(recon - m) / np.linalg.norm(m) <= 1e-12
    uj, sj, vj = jacobi_svd(m)
    assert np.linalg.norm(uj @ np.diag(sj) @ vj - m) / np.linalg.norm(m) <= 1e-12
    np.testing.assert_allclose(res.singular_values, sj, rtol=1e-12, atol=1e-13)
    # singular vectors agree up to the sign convention
    for k in range(8):
        assert abs(abs(res.left.array[:, k] @ uj[:, k]) - 1) < 1e-10


def test_svd_floor_keeps_one():
    res = svd_truncate(np.zeros((3, 3)), 3, 1e-12)
    assert res.singular_values.size == 1 and res.discarded_weight == 0.0


def test_svd_rejects_nonfinite():
    with pytest.raises(SvdConvergenceError):
        svd_truncate(np.array([[1.0, np.nan], [0.0, 1.0]]), 2)


def test_svd_sign_gauge_is_deterministic():
    rng = np.random.default_rng(4)
    m = rng.standard_normal((6, 5))
    a, b = svd_truncate(m, 3), svd_truncate(m.copy(), 3)
    assert np.array_equal(a.left.array, b.left.array)
    u = a.left.array
    assert np.all(u[np.argmax(np.abs(u), axis=0), np.arange(3)] > 0)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 7), st.integers(1, 7)), elements=finite), st.integers(1, 8))
def test_svd_invariants(m, k):
    res = svd_truncate(m, k, 0.0)
    s = res.singular_values
    assert np.all(s >= 0) and np.all(np.diff(s) <= 0)
    assert 0.0 <= res.discarded_weight <= 1.0
    total = np.sum(m**2)
    if total > 0:
        assert res.discarded_weight == pytest.approx(max(0.0, 1 - np.sum(s**2) / total), abs=1e-10)
    u, vt = res.left.array, res.right.array
    np.testing.assert_allclose(u.T @ u, np.eye(s.size), atol=1e-10)
    np.testing.assert_allclose(vt @ vt.T, np.eye(s.size), atol=1e-10)


# herm_expm


def test_expm_trivial_cases():
    np.testing.assert_array_equal(herm_expm(np.zeros((4, 4)), 0.3).array, np.eye(4))
    np.testing.assert_allclose(herm_expm(np.diag([0.5, -2.0]), 1.0).array, np.diag(np.exp([0.5, -2.0])), rtol=1e-14)


def test_expm_asymmetry_error():
    with pytest.raises(AsymmetryError):
        herm_expm(np.array([[0.0, 1.0], [0.0, 0.0]]), 1.0)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (4, 4), elements=st.floats(-2, 2)), st.floats(-1, 1), st.floats(-1, 1))
def test_expm_semigroup(a, t1, t2):
    h = a + a.T
    prod = herm_expm(h, t1).array @ herm_expm(h, t2).array
    np.testing.assert_allclose(prod, herm_expm(h, t1 + t2).array, atol=1e-12 * max(1.0, np.abs(prod).max()))
