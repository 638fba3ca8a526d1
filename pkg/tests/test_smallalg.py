import numpy as np
import pytest

from compalm.core import NumericalError
from compalm.smallalg import LbfgsMemory, _pair_schedule, numerical_rank, svd_dense


def _check_svd(A, res, tol=1e-12):
    scale = max(1.0, np.linalg.norm(A))
    assert np.linalg.norm(res.reconstruct() - A) <= tol * scale
    r = res.sigma.size
    assert np.linalg.norm(res.U.T @ res.U - np.eye(r)) <= tol
    assert np.linalg.norm(res.V.T @ res.V - np.eye(r)) <= tol
    assert np.all(np.diff(res.sigma) <= 0) and np.all(res.sigma >= 0)


@pytest.mark.parametrize("shape", [(1, 1), (3, 1), (1, 4), (10, 10), (20, 20), (10, 5), (5, 10), (7, 7)])
def test_svd_matches_lapack(shape, rng):
    A = rng.standard_normal(shape)
    res = svd_dense(A)
    _check_svd(A, res)
    np.testing.assert_allclose(res.sigma, np.linalg.svd(A, compute_uv=False), atol=1e-12)


def test_svd_rank_deficient_and_zero(rng):
    A = rng.standard_normal((8, 3)) @ rng.standard_normal((3, 8))
    res = svd_dense(A)
    _check_svd(A, res)
    assert numerical_rank(res.sigma, A.shape) == 3
    Z = svd_dense(np.zeros((4, 4)))
    _check_svd(np.zeros((4, 4)), Z)
    assert numerical_rank(Z.sigma, (4, 4)) == 0


def test_svd_of_diagonal_is_sorted():
    res = svd_dense(np.diag([1.0, -3.0, 2.0]))
    np.testing.assert_allclose(res.sigma, [3.0, 2.0, 1.0])


def test_svd_errors():
    with pytest.raises(ValueError):
        svd_dense(np.zeros(3))
    with pytest.raises(NumericalError):
        svd_dense(np.array([[np.inf, 0.0], [0.0, 1.0]]))
    with pytest.raises(NumericalError):
        svd_dense(np.random.default_rng(0).standard_normal((10, 10)), max_sweeps=1)


@pytest.mark.parametrize("m", [2, 3, 5, 10])
def test_pair_schedule_covers_each_pair_once(m):
    P, Q = _pair_schedule(m)
    pairs = [(p, q) for rp, rq in zip(P, Q) for p, q in zip(rp, rq) if p >= 0]
    assert sorted(pairs) == [(i, j) for i in range(m) for j in range(i + 1, m)]
    for rp, rq in zip(P, Q):
        used = [v for v in np.concatenate([rp, rq]) if v >= 0]
        assert len(used) == len(set(used))


def _bfgs_inverse(pairs, n):
    # Explicit inverse-BFGS recursion from H0 = (s'y / y'y) I (oracle).
    s, y = pairs[-1]
    H = (s @ y) / (y @ y) * np.eye(n)
    for s, y in pairs:
        rho = 1.0 / (s @ y)
        V = np.eye(n) - rho * np.outer(y, s)
        H = V.T @ H @ V + rho * np.outer(s, s)
    return H


def test_lbfgs_two_loop_matches_explicit_recursion(rng):
    n = 6
    M = rng.standard_normal((n, n))
    A = M @ M.T + n * np.eye(n)
    mem = LbfgsMemory(capacity=3)
    pairs = []
    for _ in range(5):
        s = rng.standard_normal(n)
        assert mem.update(s, A @ s)
        pairs.append((s, A @ s))
    assert len(mem) == 3
    r = rng.standard_normal(n)
    np.testing.assert_allclose(mem.direction(r), -_bfgs_inverse(pairs[-3:], n) @ r, rtol=1e-10)


def test_lbfgs_rejects_bad_curvature_and_resets():
    mem = LbfgsMemory()
    assert not mem.update(np.array([1.0, 0.0]), np.array([-1.0, 0.0]))
    assert len(mem) == 0
    np.testing.assert_array_equal(mem.direction(np.array([1.0, 2.0])), [-1.0, -2.0])
    mem.update(np.array([1.0, 0.0]), np.array([2.0, 0.0]))
    mem.reset()
    assert len(mem) == 0
