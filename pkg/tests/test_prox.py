import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compalm.core import NumericalError
from compalm.prox import (
    L0,
    L1,
    LpPower,
    Masked,
    Spectral,
    prox_l0,
    prox_l0_box,
    prox_l1,
    prox_l1_box,
    prox_lp_p,
    prox_lp_p_box,
    spectral_prox,
)
from compalm.smallalg import svd_dense

from conftest import grid_prox_min


def test_soft_threshold_values():
    np.testing.assert_array_equal(prox_l1(np.array([3.0, -0.5, -2.0]), 1.0), [2.0, 0.0, -1.0])


def test_hard_threshold_values_and_tie():
    # threshold sqrt(2 * gamma * sigma) = sqrt(2)
    np.testing.assert_array_equal(prox_l0(np.array([1.5, 1.4, -2.0]), 1.0), [1.5, 0.0, -2.0])
    # exact tie 0.5 * 2^2 == 2 * 1: zero wins
    assert prox_l0(np.array([2.0]), 2.0)[0] == 0.0


def test_l0_box_values():
    z = prox_l0_box(np.array([0.5, 0.2, -1.0, 0.05]), 0.1, 0.01, 0.0, 0.3)
    # 0.5 -> clip 0.3: cost 0.01 + 0.2 < 1.25; 0.2 kept: 0.01 < 0.2; -1 -> 0 (clip is 0);
    # 0.05: 0.01 > 0.0125? cost_zero = 0.0125 > 0.01 -> kept
    np.testing.assert_allclose(z, [0.3, 0.2, 0.0, 0.05])
    with pytest.raises(ValueError):
        prox_l0_box(np.array([1.0]), 1.0, 1.0, 0.5, 1.0)


# Stationary points computed with mpmath.findroot at 30 digits on
# z + gamma * p * z^(p-1) = x (DERIVED).
@pytest.mark.parametrize(
    "x, gamma, p, expected",
    [
        (5.0, 1.0, 0.5, 4.771091925522209),
        (2.0, 0.5, 0.3, 1.904445014174508),
        (3.0, 1.0, 0.5, 2.695453151015772),
        (-3.0, 1.0, 0.5, -2.695453151015772),
        (1.2, 1.0, 0.7, 0.0),  # no real stationary point besides 0
        (0.0, 1.0, 0.5, 0.0),
    ],
)
def test_lp_prox_reference_values(x, gamma, p, expected):
    assert prox_lp_p(np.array([x]), gamma, p)[0] == pytest.approx(expected, abs=1e-12)


def test_lp_prox_rejects_bad_p():
    with pytest.raises(ValueError):
        prox_lp_p(np.array([1.0]), 1.0, 1.0)


def test_lp_root_nonconvergence_is_reported(monkeypatch):
    import compalm.prox as prox

    original = prox._lp_root
    monkeypatch.setattr(prox, "_lp_root", lambda a, g, p: original(a, g, p, maxiter=1))
    with pytest.raises(NumericalError):
        prox.prox_lp_p(np.array([5.0]), 1.0, 0.5)


@pytest.mark.parametrize("p", [0.3, 0.5, 0.7])
def test_lp_box_against_grid(p, rng):
    lo, hi, w = 0.0, 0.3, 0.05
    for _ in range(50):
        x = rng.uniform(-1, 1)
        gamma = rng.choice([0.01, 0.1, 1.0])
        z = prox_lp_p_box(np.array([x]), gamma, w, p, lo, hi)[0]
        assert lo <= z <= hi
        cost = lambda t: np.where((t >= lo) & (t <= hi), w * np.abs(t) ** p, np.inf)
        got = w * abs(z) ** p + (z - x) ** 2 / (2 * gamma)
        assert got <= grid_prox_min(cost, x, gamma) + 1e-6


def test_l1_box_is_clamped_soft_threshold():
    np.testing.assert_allclose(prox_l1_box(np.array([0.5, -0.5, 0.05]), 0.1, 0.5, 0.0, 0.3), [0.3, 0.0, 0.0])


@settings(max_examples=200, deadline=None)
@given(st.floats(-50, 50), st.floats(1e-3, 10))
def test_soft_threshold_optimality(x, gamma):
    z = prox_l1(np.array([x]), gamma)[0]
    # subgradient condition: x - z in gamma * d|z|
    if z != 0:
        assert x - z == pytest.approx(gamma * np.sign(z))
    else:
        assert abs(x) <= gamma


@settings(max_examples=200, deadline=None)
@given(st.floats(-20, 20), st.floats(1e-3, 5), st.sampled_from([0.3, 0.5, 0.7]))
def test_lp_prox_beats_zero_and_identity(x, gamma, p):
    z = prox_lp_p(np.array([x]), gamma, p)[0]
    cost = lambda t: gamma * abs(t) ** p + 0.5 * (t - x) ** 2
    assert cost(z) <= cost(0.0) + 1e-12
    assert cost(z) <= cost(x) + 1e-12
    assert np.sign(z) in (0.0, np.sign(x))


def test_regularizer_objects_report_values():
    lo, hi = np.zeros(3), np.full(3, 0.3)
    x = np.array([0.5, 0.01, -0.2])
    for reg in (L1(0.1, lo, hi), L0(0.1, lo, hi), LpPower(0.1, 0.5, lo, hi)):
        z, val = reg.prox(x, 0.5)
        assert np.all((z >= lo) & (z <= hi))
        assert val == pytest.approx(reg.value(z))
        assert reg.value(np.array([-1.0, 0, 0])) == np.inf
    assert L1(2.0).value(np.array([1.0, -1.0])) == 4.0


def test_masked_only_touches_selected():
    reg = Masked(L1(1.0), slice(0, 1))
    z, val = reg.prox(np.array([3.0, 3.0]), 1.0)
    np.testing.assert_array_equal(z, [2.0, 3.0])
    assert val == 2.0


def test_spectral_values():
    B = np.diag([2.0, 3.0, 0.0, 0.0])
    assert Spectral((4, 4), "nuclear").value(B.ravel()) == pytest.approx(5.0)
    assert Spectral((4, 4), "rank").value(B.ravel()) == 2
    assert Spectral((4, 4), "schatten", p=0.5).value(B.ravel()) == pytest.approx(np.sqrt(2) + np.sqrt(3))
    with pytest.raises(ValueError):
        Spectral((2, 2), "frobenius")


def test_spectral_prox_thresholds_singular_values(rng):
    A = rng.standard_normal((6, 4))
    Z = spectral_prox(A, lambda s, g: prox_l1(s, g), 0.5)
    expected = np.maximum(np.linalg.svd(A, compute_uv=False) - 0.5, 0)
    np.testing.assert_allclose(np.sort(svd_dense(Z).sigma), np.sort(expected), atol=1e-12)
    z, val = Spectral((6, 4), "nuclear").prox(A.ravel(), 0.5)
    assert val == pytest.approx(expected.sum())
