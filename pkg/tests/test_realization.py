import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from conftest import cavity_nominal, crandn, random_triple
from slhrobust.doubled import HamiltonianSpec, SlhTriple
from slhrobust.errors import DimensionError
from slhrobust.realization import (is_doubled, is_mean_square_stable, spectral_abscissa,
                                   to_state_space)


def test_cavity_nominal_state_matrix():
    assert_allclose(to_state_space(cavity_nominal()).a_mat, np.diag([-1.5, -1.5]), atol=1e-15)


def test_identity_coupling():
    ss = to_state_space(SlhTriple(np.eye(1), [[1.0]], [[0.0]], HamiltonianSpec.zero(1)))
    assert_allclose(ss.a_mat, -0.5 * np.eye(2))
    assert_allclose(ss.b_mat, -np.eye(2))
    assert_allclose(ss.c_mat, np.eye(2))
    assert_allclose(ss.d_mat, np.eye(2))


def test_pure_rotation():
    w = 0.7
    ss = to_state_space(SlhTriple(np.eye(1), [[0.0]], [[0.0]], HamiltonianSpec([[w]], [[0.0]])))
    assert_allclose(ss.a_mat, np.diag([-1j * w, 1j * w]))


def test_spectral_abscissa_examples():
    assert spectral_abscissa(np.diag([-1.5, -1.5])) == pytest.approx(-1.5)
    assert spectral_abscissa(np.zeros((2, 2))) == 0.0
    assert spectral_abscissa(np.array([[0.0, 1.0], [-1.0, 0.0]])) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(DimensionError):
        spectral_abscissa(np.ones((2, 3)))


def test_mean_square_stability_examples():
    assert is_mean_square_stable(np.diag([-1.5, -1.5]))
    assert not is_mean_square_stable(np.zeros((2, 2)))
    assert not is_mean_square_stable(np.diag([-1.0, 0.1]))
    assert not is_mean_square_stable(np.diag([-1.0, -1e-12]))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_realization_structure_and_conjugate_spectrum(m, n, seed):
    ss = to_state_space(random_triple(np.random.default_rng(seed), m, n))
    for mat in (ss.a_mat, ss.b_mat, ss.c_mat, ss.d_mat):
        assert is_doubled(mat)
    eigs = np.linalg.eigvals(ss.a_mat)
    # every eigenvalue has its conjugate in the spectrum
    dist = np.abs(eigs[:, None] - eigs.conj()[None, :]).min(axis=1)
    assert np.all(dist <= 1e-8 * max(1.0, np.abs(eigs).max()))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_passive_realization(m, n, seed):
    rng = np.random.default_rng(seed)
    g = SlhTriple(np.eye(m), crandn(rng, m, n), np.zeros((m, n)), HamiltonianSpec.zero(n))
    a = to_state_space(g).a_mat
    assert_allclose(a, a.conj().T, atol=1e-12)
    assert np.linalg.eigvalsh(a).max() <= 1e-12
    assert spectral_abscissa(a) <= 1e-12
