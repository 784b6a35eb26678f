import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from conftest import cavity_nominal, cavity_sample, random_sample, random_triple
from slhrobust.doubled import HamiltonianSpec, SlhTriple, delta, flat, series_product
from slhrobust.errors import DimensionError, DomainError, InvalidModelError, ValidationError
from slhrobust.realization import to_state_space
from slhrobust.uncertainty import (EtaBoundWarning, UncertainModel, UncertaintySample,
                                   additive_perturbation, decompose, eta_bound,
                                   perturbation_norm, perturbed_triple, sample_norms,
                                   theta_scale)


def unit_cavity():
    return SlhTriple(np.eye(1), [[1.0]], [[0.0]], HamiltonianSpec.zero(1))


def gain_sample(g):
    return UncertaintySample(np.eye(1), [[0.0]], [[g]], HamiltonianSpec.zero(1))


def test_perturbed_triple_examples(rng):
    g = random_triple(rng, 2, 2)
    assert perturbed_triple(g, UncertaintySample.zero(2, 2)).allclose(g)
    flipped = perturbed_triple(g, UncertaintySample(-np.eye(2), np.zeros((2, 2)),
                                                    np.zeros((2, 2)), HamiltonianSpec.zero(2)))
    assert_allclose(flipped.s, -g.s)
    assert_allclose(flipped.c_minus, g.c_minus)
    out = perturbed_triple(cavity_nominal(), cavity_sample(0.4, 0.0))
    assert_allclose(out.c_minus[:, 0], [np.sqrt(1.4), 1.0, 1.0])


def test_sample_validation():
    with pytest.raises(ValidationError):
        UncertaintySample(2 * np.eye(1), [[0.0]], [[0.0]], HamiltonianSpec.zero(1))
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    UncertaintySample(swap, np.zeros((2, 1)), np.zeros((2, 1)), HamiltonianSpec.zero(1),
                      strict_hermitian=True)
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    UncertaintySample(rot, np.zeros((2, 1)), np.zeros((2, 1)), HamiltonianSpec.zero(1))
    with pytest.raises(ValidationError):
        UncertaintySample(rot, np.zeros((2, 1)), np.zeros((2, 1)), HamiltonianSpec.zero(1),
                          strict_hermitian=True)


def test_decompose_zero_sample(rng):
    g = random_triple(rng, 2, 2)
    parts = decompose(g, UncertaintySample.zero(2, 2))
    assert parts.delta_sub.allclose(SlhTriple.identity(2, 2))
    assert_allclose(parts.delta_a, 0, atol=1e-14)


@pytest.mark.parametrize("gamma", [-0.5, -0.2, 0.25, 0.5])
def test_decompose_cavity_detuning_free(gamma):
    parts = decompose(cavity_nominal(), cavity_sample(gamma, 0.0))
    assert_allclose(parts.delta_a, np.diag([-gamma / 2, -gamma / 2]), atol=1e-14)
    assert_allclose(parts.a_n, np.diag([-1.5, -1.5]))


def test_decompose_cavity_subsystem_hamiltonian():
    gamma, det = 0.5, 0.1
    parts = decompose(cavity_nominal(), cavity_sample(gamma, det))
    dl = np.sqrt(1 + gamma) - 1
    # dH - Im(L_n^dagger dL) with real L_n and real dL: the imaginary part vanishes
    assert_allclose(parts.delta_sub.h.omega_minus, [[det]], atol=1e-15)
    assert_allclose(parts.delta_sub.c_minus[:, 0], [dl, 0.0, 0.0])


def test_additive_perturbation_examples():
    assert_allclose(additive_perturbation(cavity_nominal(), UncertaintySample.zero(3, 1)), 0)
    s = cavity_sample(0.5, 0.0)
    assert_allclose(additive_perturbation(cavity_nominal(), s), np.diag([-0.25, -0.25]),
                    atol=1e-14)
    assert_allclose(additive_perturbation(cavity_nominal(), s),
                    decompose(cavity_nominal(), s).delta_a, atol=1e-14)
    g = 1.3
    # hand expansion: Delta(0, g) flat Delta(0, g) = -g^2 I
    d = delta(0.0, g)
    assert_allclose(flat(d) @ d, -g * g * np.eye(2))
    assert_allclose(additive_perturbation(unit_cavity(), gain_sample(g)), 0.5 * g * g * np.eye(2))


def test_detuning_enters_literally():
    # the realization maps delta a^dagger a to -i delta on the diagonal
    gamma, det = 0.3, 0.2
    da = additive_perturbation(cavity_nominal(), cavity_sample(gamma, det))
    assert_allclose(da, np.diag([-gamma / 2 - 1j * det, -gamma / 2 + 1j * det]), atol=1e-14)


def test_theta_scale_examples(rng):
    s = random_sample(rng, 2, 2)
    g = random_triple(rng, 2, 2)
    assert_allclose(additive_perturbation(g, theta_scale(s, 0.0)), 0, atol=1e-15)
    one = theta_scale(s, 1.0)
    assert_allclose(one.delta_c_minus, s.delta_c_minus)
    assert one.delta_h.allclose(s.delta_h)
    g_gain = 2.0
    assert_allclose(additive_perturbation(unit_cavity(), theta_scale(gain_sample(g_gain), 0.5)),
                    g_gain ** 2 / 8 * np.eye(2))
    with pytest.raises(DomainError):
        theta_scale(s, 1.5)


def test_eta_examples(rng):
    only_zero = UncertainModel(cavity_nominal(), [UncertaintySample.zero(3, 1)])
    assert eta_bound(only_zero) == 0.0
    gamma, det = 1.0, 0.5
    printed = np.diag([-gamma / 2 - 2j * det, -gamma / 2 + 2j * det])
    assert perturbation_norm(printed) == pytest.approx(np.sqrt(1.25), abs=1e-14)
    diags = rng.standard_normal((20, 4)) + 1j * rng.standard_normal((20, 4))
    norms = perturbation_norm(np.stack([np.diag(d) for d in diags]))
    assert np.max(norms) == pytest.approx(np.abs(diags).max(), abs=1e-12)


def test_eta_cavity_model():
    samples = [cavity_sample(g, d) for g in (-0.5, 0.0, 0.5) for d in (-0.1, 0.0, 0.1)]
    model = UncertainModel(cavity_nominal(), samples)
    assert len(model.samples) == 9  # zero sample already present
    assert eta_bound(model) == pytest.approx(np.sqrt(0.0625 + 0.01), abs=1e-14)


def test_model_appends_zero_and_rejects_empty(rng):
    model = UncertainModel(cavity_nominal(), [cavity_sample(0.5, 0.0)])
    assert len(model.samples) == 2 and model.samples[-1].is_zero()
    with pytest.raises(InvalidModelError):
        UncertainModel(cavity_nominal(), [])
    with pytest.raises(DimensionError):
        UncertainModel(cavity_nominal(), [UncertaintySample.zero(2, 1)])
    with pytest.raises(InvalidModelError):
        UncertainModel(cavity_nominal(), [cavity_sample(0.5, 0.0)], declared_eta=-1.0)


def test_declared_eta():
    model = UncertainModel(cavity_nominal(), [cavity_sample(0.5, 0.0)], declared_eta=1.0)
    assert eta_bound(model) == 1.0
    low = UncertainModel(cavity_nominal(), [cavity_sample(0.5, 0.0)], declared_eta=0.1)
    with pytest.warns(EtaBoundWarning):
        assert eta_bound(low) == pytest.approx(0.25)


def test_cascade_cross_term(rng):
    for _ in range(50):
        m, n = rng.integers(1, 4, size=2)
        g1, g2 = random_triple(rng, m, n), random_triple(rng, m, n)
        r1, r2 = to_state_space(g1), to_state_space(g2)
        total = to_state_space(series_product(g2, g1)).a_mat
        expected = r1.a_mat + r2.a_mat - flat(r2.c_mat) @ r2.d_mat @ r1.c_mat
        assert_allclose(total, expected, atol=1e-10 * (1 + np.abs(total).max()))


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_decomposition_properties(m, n, seed):
    rng = np.random.default_rng(seed)
    nominal, s = random_triple(rng, m, n), random_sample(rng, m, n)
    parts = decompose(nominal, s)
    full = to_state_space(perturbed_triple(nominal, s)).a_mat
    assert_allclose(full, parts.a_n + parts.delta_a, atol=1e-10 * (1 + np.abs(full).max()))
    assert_allclose(parts.delta_a, parts.a_delta + parts.a_prime, atol=1e-12)
    assert series_product(parts.g_n, parts.delta_sub).allclose(perturbed_triple(nominal, s))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_eta_dominates_samples(m, n, seed):
    rng = np.random.default_rng(seed)
    model = UncertainModel(random_triple(rng, m, n), [random_sample(rng, m, n) for _ in range(5)])
    eta = eta_bound(model)
    for s in model.samples:
        assert np.linalg.norm(additive_perturbation(model.nominal, s), 2) <= eta + 1e-12
    assert_allclose(sample_norms(model).max(), eta)
