"""State-space realization of SLH triples and the spectral stability test."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .doubled import DoubledMatrix, SlhTriple, delta, flat
from .errors import DimensionError, NumericalError, ValidationError

__all__ = [
    "STABILITY_TOL",
    "StateSpaceRealization",
    "to_state_space",
    "spectral_abscissa",
    "is_mean_square_stable",
    "is_doubled",
]

STABILITY_TOL = 1e-10


def is_doubled(z, atol: float = 1e-10) -> bool:
    try:
        DoubledMatrix.from_full(z, atol=atol)
    except (ValidationError, DimensionError):
        return False
    return True


@dataclass(frozen=True, eq=False)
class StateSpaceRealization:
    """Doubled quadruple of ``dX = A X dt + B dA_in``, ``dA_out = C X dt + D dA_in``."""

    a_mat: np.ndarray
    b_mat: np.ndarray
    c_mat: np.ndarray
    d_mat: np.ndarray

    def __post_init__(self):
        for name in ("a_mat", "b_mat", "c_mat", "d_mat"):
            mat = np.array(getattr(self, name), dtype=complex, ndmin=2)
            if not is_doubled(mat):
                raise ValidationError(f"{name} is not doubled-structured")
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)


def to_state_space(g: SlhTriple) -> StateSpaceRealization:
    """Realize ``g`` as ``(A, B, C, D)``.

    ``C = Delta(C-, C+)``, ``D = Delta(S, 0)``, ``B = -flat(C) D`` and
    ``A = -flat(C) C / 2 - Delta(i Omega-, i Omega+)``.
    """
    c_mat = delta(g.c_minus, g.c_plus)
    d_mat = delta(g.s, np.zeros_like(g.s))
    c_flat = flat(c_mat)
    a_mat = -0.5 * c_flat @ c_mat + g.h.drift()
    return StateSpaceRealization(a_mat, -c_flat @ d_mat, c_mat, d_mat)


def spectral_abscissa(a) -> float:
    """Largest real part over the eigenvalues of ``a``."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"square matrix required, got shape {a.shape}")
    if a.size == 0:
        return -np.inf
    try:
        eigs = scipy.linalg.eigvals(a)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigenvalue computation failed: {exc}") from exc
    if not np.all(np.isfinite(eigs)):
        raise NumericalError("eigenvalue computation returned non-finite values")
    return float(np.max(eigs.real))


def is_mean_square_stable(a, stability_tol: float = STABILITY_TOL) -> bool:
    """True iff every eigenvalue of ``a`` has real part below ``-stability_tol``.

    Marginal spectra (within the tolerance of the imaginary axis) are not stable.
    """
    return spectral_abscissa(a) < -stability_tol
