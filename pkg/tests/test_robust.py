import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose
from scipy.optimize import minimize_scalar

from conftest import crandn, random_stable_doubled
from slhrobust.doubled import HamiltonianSpec, SlhTriple
from slhrobust.errors import DomainError, InfeasibleError, ValidationError
from slhrobust.realization import spectral_abscissa
from slhrobust.robust import (instability_distance, lyapunov_block, marginal_destabilization,
                              minimize_zeta, sigma_min_curve, smallgain_verdict,
                              synthesize_witness, verify_lyapunov_condition)
from slhrobust.uncertainty import UncertaintySample, additive_perturbation, theta_scale

CAVITY = np.diag([-1.5, -1.5]).astype(complex)
NON_NORMAL = np.array([[-1.0, 10.0], [0.0, -1.0]])


def grid_oracle(a, lo=-50.0, hi=50.0, points=200_001):
    """Dense SVD grid followed by bounded refinement around the best point."""
    omegas = np.linspace(lo, hi, points)
    eye = np.eye(a.shape[0])
    sig = np.linalg.svd(1j * omegas[:, None, None] * eye - a, compute_uv=False)[:, -1]
    k = int(np.argmin(sig))
    step = omegas[1] - omegas[0]
    res = minimize_scalar(
        lambda w: np.linalg.svd(1j * w * eye - a, compute_uv=False)[-1],
        bounds=(omegas[k] - step, omegas[k] + step), method="bounded",
        options={"xatol": 1e-12})
    return min(res.fun, sig[k])


def unit_cavity():
    return SlhTriple(np.eye(1), [[1.0]], [[0.0]], HamiltonianSpec.zero(1))


def gain_sample(g):
    return UncertaintySample(np.eye(1), [[0.0]], [[g]], HamiltonianSpec.zero(1))


def test_margin_examples():
    res = instability_distance(CAVITY)
    assert res.margin == pytest.approx(1.5, abs=1e-8)
    assert res.minimizing_omega == pytest.approx(0.0, abs=1e-4)
    assert not res.warnings
    assert instability_distance(-np.eye(3)).margin == pytest.approx(1.0, abs=1e-8)


def test_margin_non_normal():
    res = instability_distance(NON_NORMAL)
    assert res.margin < 1.0
    assert res.margin == pytest.approx(grid_oracle(NON_NORMAL), abs=1e-6)
    assert res.sweep_margin == pytest.approx(res.margin, abs=1e-6)


def test_margin_unstable_nominal():
    res = instability_distance(np.diag([-1.0, 0.1]))
    assert res.nominal_unstable and res.margin == 0.0
    assert not smallgain_verdict(np.diag([-1.0, 0.1]), 0.0)


def test_margin_rejects_bad_tol():
    with pytest.raises(DomainError):
        instability_distance(CAVITY, tol=0.0)


def test_smallgain_examples(rng):
    assert smallgain_verdict(CAVITY, 1.4)
    assert not smallgain_verdict(CAVITY, 1.6)
    assert smallgain_verdict(random_stable_doubled(rng, 2), 0.0)


def test_verify_examples():
    ok, top = verify_lyapunov_condition(-np.eye(2), 0.5, np.eye(2))
    assert ok and top < 0
    ok, top = verify_lyapunov_condition(-np.eye(2), 1.5, np.eye(2))
    assert not ok and top > 0
    ok, top = verify_lyapunov_condition(CAVITY, 1.4, 1.4962 * np.eye(2))
    assert ok
    block = lyapunov_block(-np.eye(1), 0.5, np.eye(1))
    assert_allclose(block, [[-2 + 0.25, 1.0], [1.0, -1.0]])
    with pytest.raises(ValidationError):
        verify_lyapunov_condition(CAVITY, 1.0, -np.eye(2))
    with pytest.raises(ValidationError):
        verify_lyapunov_condition(CAVITY, 1.0, np.array([[1.0, 1.0], [0.0, 1.0]]))


def scalar_root(lam, q):
    return (lam - np.sqrt(lam * lam - 4 * q)) / 2


def test_witness_scalar_oracle():
    eta = 1.49
    eps = 1e-6 * (1.5 ** 2 - eta ** 2)
    p = synthesize_witness(CAVITY, eta)
    assert_allclose(p, scalar_root(3.0, eta ** 2 + eps) * np.eye(2), rtol=1e-9)
    assert p[0, 0] == pytest.approx(1.327, abs=1e-3)
    eta = 0.999
    eps = 1e-6 * (1 - eta ** 2)
    p = synthesize_witness(-np.eye(2), eta)
    assert_allclose(p, (1 - np.sqrt(1 - eta ** 2 - eps)) * np.eye(2), rtol=1e-9)
    assert p[0, 0] == pytest.approx(0.955, abs=1e-3)
    p = synthesize_witness(-np.eye(2), 0.0)
    assert_allclose(p, 0.5e-6 * np.eye(2), rtol=1e-3)
    assert verify_lyapunov_condition(-np.eye(2), 0.0, p)[0]


def test_witness_infeasible():
    with pytest.raises(InfeasibleError):
        synthesize_witness(CAVITY, 1.5)
    with pytest.raises(InfeasibleError):
        synthesize_witness(np.diag([-1.0, 0.1]), 0.1)


def test_minimize_zeta_examples():
    cert = minimize_zeta(CAVITY)
    assert 4 / 9 <= cert.zeta <= 0.45
    assert 1.485 <= cert.bound <= 1.5
    assert cert.residual_max_eig < 0
    assert cert.certifies(1.4) and not cert.certifies(1.6) and cert.certifies(0.0)
    assert minimize_zeta(-np.eye(2)).zeta == pytest.approx(1.0, rel=1e-6)
    with pytest.raises(InfeasibleError):
        minimize_zeta(np.diag([-1.0, 0.1]))


def test_homotopy_examples():
    theta, eig = marginal_destabilization(unit_cavity(), gain_sample(2.0))
    assert theta == pytest.approx(0.5, abs=1e-8)
    assert abs(eig.real) <= 1e-8
    theta, _ = marginal_destabilization(unit_cavity(), gain_sample(np.sqrt(2.0)))
    assert theta == pytest.approx(1 / np.sqrt(2), abs=1e-8)
    with pytest.raises(DomainError):
        marginal_destabilization(unit_cavity(), gain_sample(0.5))


def test_homotopy_bracket():
    tol = 1e-8
    nominal, s = unit_cavity(), gain_sample(2.0)
    theta, _ = marginal_destabilization(nominal, s, tol)
    a_n = np.diag([-0.5, -0.5])

    def g(t):
        return spectral_abscissa(a_n + additive_perturbation(nominal, theta_scale(s, t)))
    assert g(theta - 10 * tol) < 0 < g(theta + 10 * tol)


def test_sigma_min_conjugate_symmetry(rng):
    for _ in range(10):
        a = random_stable_doubled(rng, 2)
        w = rng.uniform(0, 5, size=16)
        assert_allclose(sigma_min_curve(a, w), sigma_min_curve(a, -w), rtol=1e-10)


def test_sweep_and_bisection_agree(rng):
    for n in (1, 2, 3):
        for _ in range(5):
            a = random_stable_doubled(rng, n)
            res = instability_distance(a)
            assert abs(res.sweep_margin - res.margin) <= 10 * 1e-8 * max(1.0, res.margin)
    for _ in range(5):
        a = crandn(rng, 3, 3)
        a -= (np.linalg.eigvals(a).real.max() + 0.5) * np.eye(3)
        res = instability_distance(a)
        assert abs(res.sweep_margin - res.margin) <= 10 * 1e-8 * max(1.0, res.margin)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_certificate_soundness_and_duality(n, seed):
    a = random_stable_doubled(np.random.default_rng(seed), n)
    cert = minimize_zeta(a)
    ok, top = verify_lyapunov_condition(a, cert.bound, cert.p_witness)
    assert ok and top < 0
    margin = instability_distance(a).margin
    assert abs(cert.bound - margin) / margin <= 10 * 1e-8


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_small_gain_soundness(n, seed):
    rng = np.random.default_rng(seed)
    a = random_stable_doubled(rng, n)
    margin = instability_distance(a).margin
    d = crandn(rng, 2 * n, 2 * n)
    d *= 0.99 * margin / np.linalg.norm(d, 2)
    assert spectral_abscissa(a + d) < 0
