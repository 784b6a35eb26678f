"""Shared random generators and fixtures for the test suite."""

import numpy as np
import pytest
from scipy.stats import unitary_group

from slhrobust import cavity_fixture
from slhrobust.doubled import HamiltonianSpec, SlhTriple, canonical_hamiltonian, delta
from slhrobust.uncertainty import UncertaintySample

# Acceptance lines collected by tests/test_acceptance.py and echoed at the end of the run.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_unitary(rng, m):
    if m == 1:
        return np.array([[np.exp(1j * rng.uniform(0, 2 * np.pi))]])
    return unitary_group.rvs(m, random_state=rng)


def random_hamiltonian(rng, n, scale=1.0):
    x = scale * crandn(rng, 2 * n, 2 * n)
    return canonical_hamiltonian(0.5 * (x + x.conj().T))


def random_triple(rng, m, n, scale=1.0):
    return SlhTriple(random_unitary(rng, m), scale * crandn(rng, m, n),
                     scale * crandn(rng, m, n), random_hamiltonian(rng, n, scale))


def random_sample(rng, m, n, scale=1.0):
    return UncertaintySample(random_unitary(rng, m), scale * crandn(rng, m, n),
                             scale * crandn(rng, m, n), random_hamiltonian(rng, n, scale))


def random_stable_doubled(rng, n):
    """Random Hurwitz matrix with the doubled block pattern."""
    x = delta(crandn(rng, n, n), crandn(rng, n, n))
    shift = np.max(np.linalg.eigvals(x).real) + rng.uniform(0.1, 2.0)
    return x - shift * np.eye(2 * n)


def cavity_sample(gamma, delta_det, k1=1.0):
    """Perturbation of the unit three-channel cavity, coupling sqrt(k1 + gamma)."""
    dcm = np.array([[np.sqrt(k1 + gamma) - np.sqrt(k1)], [0.0], [0.0]])
    return UncertaintySample(np.eye(3), dcm, np.zeros((3, 1)),
                             HamiltonianSpec([[delta_det]], [[0.0]]))


def cavity_nominal(k=(1.0, 1.0, 1.0)):
    return SlhTriple(np.eye(3), np.sqrt(np.array(k))[:, None], np.zeros((3, 1)),
                     HamiltonianSpec.zero(1))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def fixture_path():
    return cavity_fixture()


@pytest.fixture
def fixture_text(fixture_path):
    with open(fixture_path, encoding="utf-8") as fh:
        return fh.read()
