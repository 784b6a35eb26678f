"""Admissible perturbations, the nominal/perturbation split and the additive state-matrix bound.

An uncertain network is ``(S_n dS, L_n + dL, H_n + dH)``.  It factors as the
cascade ``G_n <| Delta`` with ``Delta = (dS, S_n^dagger dL, dH - Im(L_n^dagger dL))``,
and its state matrix splits as ``A = A_n + dA``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .doubled import (UNITARY_TOL, DoubledMatrix, HamiltonianSpec, SlhTriple,
                      coupling_rows, delta, flat, imag_quadratic, re_flat)
from .errors import (ConsistencyError, DimensionError, DomainError,
                     InvalidModelError, ValidationError)
from .realization import to_state_space

__all__ = [
    "MAX_SAMPLES",
    "EtaBoundWarning",
    "UncertaintySample",
    "UncertainModel",
    "DecompositionResult",
    "perturbed_triple",
    "decompose",
    "additive_perturbation",
    "perturbation_norm",
    "sample_norms",
    "eta_bound",
    "theta_scale",
]

MAX_SAMPLES = 10**6
_CROSS_CHECK_TOL = 1e-10


class EtaBoundWarning(UserWarning):
    """A sample exceeds the declared perturbation bound."""


@dataclass(frozen=True, eq=False)
class UncertaintySample:
    """One admissible perturbation ``(dS, dc-, dc+, dH)``.

    ``delta_s`` must be unitary.  With ``strict_hermitian`` it must also be
    Hermitian, which restricts it to involutions.
    """

    delta_s: np.ndarray
    delta_c_minus: np.ndarray
    delta_c_plus: np.ndarray
    delta_h: HamiltonianSpec
    strict_hermitian: bool = field(default=False, compare=False)

    def __post_init__(self):
        ds = np.array(self.delta_s, dtype=complex, ndmin=2)
        m = ds.shape[0]
        if ds.shape != (m, m):
            raise DimensionError(f"delta_s must be square, got {ds.shape}")
        n = self.delta_h.n
        dcm = np.array(self.delta_c_minus, dtype=complex).reshape(m, n)
        dcp = np.array(self.delta_c_plus, dtype=complex).reshape(m, n)
        dev = np.max(np.abs(ds.conj().T @ ds - np.eye(m)), initial=0.0)
        if dev > UNITARY_TOL:
            raise ValidationError(f"delta_s is not unitary (deviation {dev:.3g})")
        if self.strict_hermitian:
            hdev = np.max(np.abs(ds - ds.conj().T), initial=0.0)
            if hdev > UNITARY_TOL:
                raise ValidationError(f"delta_s is not Hermitian (deviation {hdev:.3g})")
        for name, arr in (("delta_s", ds), ("delta_c_minus", dcm), ("delta_c_plus", dcp)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def zero(cls, m: int, n: int) -> "UncertaintySample":
        return cls(np.eye(m), np.zeros((m, n)), np.zeros((m, n)), HamiltonianSpec.zero(n))

    @property
    def m(self) -> int:
        return self.delta_s.shape[0]

    @property
    def n(self) -> int:
        return self.delta_h.n

    @property
    def coupling(self) -> DoubledMatrix:
        return DoubledMatrix(self.delta_c_minus, self.delta_c_plus)

    def is_zero(self, atol: float = 1e-12) -> bool:
        return (np.allclose(self.delta_s, np.eye(self.m), rtol=0, atol=atol)
                and np.allclose(self.delta_c_minus, 0, rtol=0, atol=atol)
                and np.allclose(self.delta_c_plus, 0, rtol=0, atol=atol)
                and np.allclose(self.delta_h.omega_minus, 0, rtol=0, atol=atol)
                and np.allclose(self.delta_h.omega_plus, 0, rtol=0, atol=atol))


def _check_compatible(nominal: SlhTriple, s: UncertaintySample) -> None:
    if (s.m, s.n) != (nominal.m, nominal.n):
        raise DimensionError(
            f"sample acts on {s.m} channels / {s.n} modes, "
            f"nominal on {nominal.m} / {nominal.n}")


@dataclass(frozen=True, eq=False)
class UncertainModel:
    """A nominal network and a finite list of admissible perturbations.

    A grid of samples only gives a lower estimate of the supremum of the
    perturbation norm; ``declared_eta`` lets the caller supply a proven bound.
    The zero sample is appended when missing.
    """

    nominal: SlhTriple
    samples: Sequence[UncertaintySample]
    declared_eta: Optional[float] = None

    def __post_init__(self):
        samples = tuple(self.samples)
        if not samples:
            raise InvalidModelError("an uncertain model needs at least one sample")
        if len(samples) > MAX_SAMPLES:
            raise InvalidModelError(
                f"{len(samples)} samples exceed the cap of {MAX_SAMPLES}")
        for s in samples:
            _check_compatible(self.nominal, s)
        if not any(s.is_zero() for s in samples):
            samples += (UncertaintySample.zero(self.nominal.m, self.nominal.n),)
        if self.declared_eta is not None:
            if not np.isfinite(self.declared_eta) or self.declared_eta < 0:
                raise InvalidModelError(f"declared eta must be >= 0, got {self.declared_eta}")
            object.__setattr__(self, "declared_eta", float(self.declared_eta))
        object.__setattr__(self, "samples", samples)


@dataclass(frozen=True, eq=False)
class DecompositionResult:
    """Nominal and perturbation subsystems with their state-matrix pieces.

    ``delta_a == a_delta + a_prime``, where ``a_prime`` is the cross term the
    cascade introduces.
    """

    g_n: SlhTriple
    delta_sub: SlhTriple
    a_n: np.ndarray
    a_delta: np.ndarray
    a_prime: np.ndarray
    delta_a: np.ndarray


def perturbed_triple(nominal: SlhTriple, s: UncertaintySample) -> SlhTriple:
    _check_compatible(nominal, s)
    return SlhTriple(nominal.s @ s.delta_s,
                     nominal.c_minus + s.delta_c_minus,
                     nominal.c_plus + s.delta_c_plus,
                     nominal.h + s.delta_h)


def additive_perturbation(nominal: SlhTriple, s: UncertaintySample) -> np.ndarray:
    """Closed form ``dA = -flat(d) d / 2 - Delta(i dW-, i dW+) - re_flat(flat(C_n) d)``.

    ``d = Delta(dc-, dc+)`` and ``C_n = Delta(C_n-, C_n+)``.  The scattering
    perturbation never enters the state matrix.
    """
    _check_compatible(nominal, s)
    dc = delta(s.delta_c_minus, s.delta_c_plus)
    cn = delta(nominal.c_minus, nominal.c_plus)
    return -0.5 * flat(dc) @ dc + s.delta_h.drift() - re_flat(flat(cn) @ dc)


def decompose(nominal: SlhTriple, s: UncertaintySample) -> DecompositionResult:
    """Split ``perturbed_triple(nominal, s)`` into the cascade ``nominal <| delta_sub``.

    Raises :class:`ConsistencyError` if the subsystem route and the closed
    form of :func:`additive_perturbation` disagree.
    """
    _check_compatible(nominal, s)
    sn_adj = DoubledMatrix(nominal.s.conj().T, np.zeros_like(nominal.s))
    coupling = sn_adj @ s.coupling
    cross = coupling_rows(nominal).conj().T @ np.hstack([s.delta_c_minus, s.delta_c_plus])
    delta_sub = SlhTriple(s.delta_s, coupling.minus, coupling.plus,
                          s.delta_h - imag_quadratic(cross))

    a_n = to_state_space(nominal).a_mat
    a_delta = to_state_space(delta_sub).a_mat
    # cascade cross term -flat(C_n) D_n C_delta; D_n C_delta collapses to d
    a_prime = -flat(delta(nominal.c_minus, nominal.c_plus)) @ delta(nominal.s, 0 * nominal.s) \
        @ coupling.full
    delta_a = a_delta + a_prime

    closed = additive_perturbation(nominal, s)
    scale = 1.0 + max(np.max(np.abs(closed), initial=0.0), np.max(np.abs(a_n), initial=0.0))
    dev = np.max(np.abs(delta_a - closed), initial=0.0)
    if dev > _CROSS_CHECK_TOL * scale:
        raise ConsistencyError(
            f"subsystem and closed-form perturbations disagree by {dev:.3g}")
    return DecompositionResult(nominal, delta_sub, a_n, a_delta, a_prime, delta_a)


def perturbation_norm(delta_a) -> np.ndarray:
    """Largest singular value of one matrix, or of each matrix in a stack."""
    delta_a = np.asarray(delta_a, dtype=complex)
    if delta_a.shape[-1] == 0:
        return np.zeros(delta_a.shape[:-2])
    return np.linalg.svd(delta_a, compute_uv=False)[..., 0]


def sample_norms(model: UncertainModel) -> np.ndarray:
    """Largest singular value of the additive perturbation for every sample, in order."""
    if not model.samples:
        raise InvalidModelError("model has no samples")
    return perturbation_norm(np.stack([additive_perturbation(model.nominal, s)
                                       for s in model.samples]))


def eta_bound(model: UncertainModel) -> float:
    """Norm bound on the additive perturbation over the model's samples.

    With a declared bound, the larger of the declared and sampled values is
    returned and an :class:`EtaBoundWarning` is issued if a sample exceeds
    the declaration.
    """
    computed = float(np.max(sample_norms(model)))
    if model.declared_eta is None:
        return computed
    if computed > model.declared_eta:
        warnings.warn(
            f"sampled perturbation norm {computed:.6g} exceeds declared eta "
            f"{model.declared_eta:.6g}", EtaBoundWarning, stacklevel=2)
    return max(model.declared_eta, computed)


def theta_scale(s: UncertaintySample, theta: float) -> UncertaintySample:
    """Shrink the coupling and Hamiltonian perturbations by ``theta``; ``dS`` is kept."""
    if not 0.0 <= theta <= 1.0:
        raise DomainError(f"theta must lie in [0, 1], got {theta}")
    return UncertaintySample(s.delta_s, theta * s.delta_c_minus, theta * s.delta_c_plus,
                             s.delta_h.scaled(theta), s.strict_hermitian)
