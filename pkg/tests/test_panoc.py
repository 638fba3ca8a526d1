import math

import numpy as np
import pytest

from compalm.panoc import (
    CompositeProblem,
    PanocOptions,
    StepsizeCollapse,
    estimate_gamma0,
    fbe,
    forward_backward,
    panoc_solve,
    roundoff_margin,
)
from compalm.prox import prox_l1


def lasso(A, b, lam):
    return CompositeProblem(
        phi_eval=lambda z: 0.5 * float(np.sum((A @ z - b) ** 2)),
        phi_grad=lambda z: A.T @ (A @ z - b),
        psi_prox=lambda z, g: (prox_l1(z, g * lam), lam * float(np.abs(prox_l1(z, g * lam)).sum())),
        psi_eval=lambda z: lam * float(np.abs(z).sum()),
    )


def ista(A, b, lam, iters=20000):
    # Plain proximal gradient with the exact Lipschitz constant (oracle).
    step = 1.0 / np.linalg.norm(A, 2) ** 2
    z = np.zeros(A.shape[1])
    for _ in range(iters):
        z = prox_l1(z - step * A.T @ (A @ z - b), step * lam)
    return z


@pytest.mark.parametrize("acceleration", ["lbfgs", "none"])
def test_lasso_matches_proximal_gradient(acceleration, rng):
    A = rng.standard_normal((20, 8))
    b = rng.standard_normal(20)
    ref = ista(A, b, 0.5)
    zbar, res, st = panoc_solve(lasso(A, b, 0.5), np.zeros(8), PanocOptions(eps=1e-10, acceleration=acceleration))
    assert st.status == "converged" and res <= 1e-10
    np.testing.assert_allclose(zbar, ref, atol=1e-8)


def test_accelerated_needs_fewer_iterations(rng):
    A = rng.standard_normal((30, 10)) @ np.diag(np.logspace(0, 2, 10))
    b = rng.standard_normal(30)
    p = lasso(A, b, 0.1)
    _, _, fast = panoc_solve(p, np.zeros(10), PanocOptions(eps=1e-8))
    _, _, slow = panoc_solve(p, np.zeros(10), PanocOptions(eps=1e-8, acceleration="none"))
    assert fast.iterations < slow.iterations


def rosen_l1():
    # Nonconvex phi with only locally Lipschitz gradient.
    def phi(z):
        return float(np.sum(100 * (z[1:] - z[:-1] ** 2) ** 2 + (1 - z[:-1]) ** 2))

    def grad(z):
        g = np.zeros_like(z)
        g[:-1] = -400 * z[:-1] * (z[1:] - z[:-1] ** 2) - 2 * (1 - z[:-1])
        g[1:] += 200 * (z[1:] - z[:-1] ** 2)
        return g

    return CompositeProblem(phi, grad, lambda z, g: (prox_l1(z, 0.1 * g), 0.1 * float(np.abs(prox_l1(z, 0.1 * g)).sum())),
                            lambda z: 0.1 * float(np.abs(z).sum()))


def test_linesearch_invariants_on_nonconvex_problem(rng):
    p = rosen_l1()
    opts = PanocOptions(eps=1e-9)
    its = []
    zbar, res, st = panoc_solve(p, rng.uniform(-2, 2, 4), opts, its.append)
    assert st.status == "converged" and res <= opts.eps
    assert its[-1].final and not any(it.final for it in its[:-1])
    for it in its:
        d = it.zbar - it.z
        lhs = p.phi_eval(it.zbar)
        rhs = p.phi_eval(it.z) + p.phi_grad(it.z) @ d + opts.alpha / (2 * it.gamma) * (d @ d)
        assert lhs <= rhs + roundoff_margin(rhs)
    for prev, cur in zip(its, its[1:]):
        assert cur.gamma <= prev.gamma
        d = prev.zbar - prev.z
        bound = prev.Phi - opts.beta * (1 - opts.alpha) / (2 * prev.gamma) * (d @ d)
        assert cur.Phi <= bound + roundoff_margin(prev.Phi)


def test_fbe_and_forward_backward_consistency(rng):
    A = rng.standard_normal((5, 3))
    p = lasso(A, rng.standard_normal(5), 0.2)
    z = rng.standard_normal(3)
    zbar, psi = forward_backward(p, z, 0.1)
    # FBE never exceeds the cost at z and is at least the cost at zbar minus the model gap
    assert fbe(p, z, zbar, 0.1, psi) <= p.phi_eval(z) + p.psi_eval(z) + 1e-12
    # at a fixed point the FBE equals the cost
    zs, _, _ = panoc_solve(p, z, PanocOptions(eps=1e-12))
    zb, ps = forward_backward(p, zs, 0.01)
    assert fbe(p, zs, zb, 0.01, ps) == pytest.approx(p.phi_eval(zs) + p.psi_eval(zs), abs=1e-9)


def test_gamma0_estimate():
    A = np.diag([1.0, 4.0])
    p = lasso(A, np.zeros(2), 0.0)
    assert estimate_gamma0(p, np.ones(2)) == pytest.approx(0.95 * 0.95 / np.linalg.norm(A.T @ A @ np.ones(2) / np.sqrt(2)), rel=1e-6)
    zero = CompositeProblem(lambda z: 0.0, lambda z: np.zeros_like(z), lambda z, g: (z, 0.0), lambda z: 0.0, prox_bound=0.5)
    assert estimate_gamma0(zero, np.ones(2)) == pytest.approx(0.475)


def test_max_iter_status(rng):
    A = rng.standard_normal((10, 5))
    _, res, st = panoc_solve(lasso(A, rng.standard_normal(10), 0.1), np.zeros(5), PanocOptions(max_iter=3, eps=1e-14))
    assert st.status == "max_iter" and st.iterations == 3 and res > 1e-14


def test_inconsistent_gradient_collapses_stepsize():
    # phi(z) = ||z||^2 paired with a gradient of the wrong sign
    p = CompositeProblem(lambda z: float(z @ z), lambda z: -2 * z, lambda z, g: (z, 0.0), lambda z: 0.0)
    with pytest.raises(StepsizeCollapse):
        panoc_solve(p, np.ones(2), PanocOptions(gamma_min=1e-8))


def test_invalid_options():
    for bad in (dict(alpha=1.0), dict(eps=0.0), dict(acceleration="bfgs"), dict(memory=0), dict(gamma0=-1.0)):
        with pytest.raises(ValueError):
            PanocOptions(**bad)
