"""Doubled-up matrix algebra and SLH triples.

A vector of annihilation operators ``a`` is stacked with its adjoints as
``(a; a#)``.  Linear maps acting on such stacks carry the block pattern

    [[E-,       E+      ],
     [conj(E+), conj(E-)]]

which :class:`DoubledMatrix` stores by its two upper blocks only.  The
``flat`` operation ``Z -> J Z^dagger J`` with ``J = diag(I, -I)`` is the
adjoint compatible with this structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericalError, ValidationError

__all__ = [
    "STRUCTURE_TOL",
    "HERMITIAN_TOL",
    "UNITARY_TOL",
    "DoubledMatrix",
    "HamiltonianSpec",
    "SlhTriple",
    "delta",
    "j_matrix",
    "flat",
    "re_flat",
    "canonical_hamiltonian",
    "imag_quadratic",
    "series_product",
    "coupling_rows",
]

STRUCTURE_TOL = 1e-12
HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-10


def _as_matrix(x, name="matrix") -> np.ndarray:
    arr = np.array(x, dtype=complex, ndmin=2, copy=True)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {arr.shape}")
    return arr


def _as_block(x, m: int, n: int) -> np.ndarray:
    arr = np.array(x, dtype=complex, copy=True)
    if arr.ndim < 2 and arr.size == m * n:
        arr = arr.reshape(m, n)
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def delta(minus, plus) -> np.ndarray:
    """Return the full doubled expansion of the block pair ``(minus, plus)``."""
    minus = _as_matrix(minus, "minus")
    plus = _as_matrix(plus, "plus")
    if minus.shape != plus.shape:
        raise DimensionError(
            f"block shapes differ: minus {minus.shape} vs plus {plus.shape}")
    return np.block([[minus, plus], [plus.conj(), minus.conj()]])


def j_matrix(k: int) -> np.ndarray:
    """``diag(I_k, -I_k)``."""
    return np.diag(np.concatenate([np.ones(k), -np.ones(k)])).astype(complex)


@dataclass(frozen=True, eq=False)
class DoubledMatrix:
    """A ``2m x 2n`` complex matrix with the doubled block pattern.

    Only the upper blocks are stored; :attr:`full` rebuilds the expansion.
    """

    minus: np.ndarray
    plus: np.ndarray

    def __post_init__(self):
        minus = _as_matrix(self.minus, "minus")
        plus = _as_matrix(self.plus, "plus")
        if minus.shape != plus.shape:
            raise DimensionError(
                f"block shapes differ: minus {minus.shape} vs plus {plus.shape}")
        object.__setattr__(self, "minus", _frozen(minus))
        object.__setattr__(self, "plus", _frozen(plus))

    @property
    def shape(self) -> tuple[int, int]:
        """Shape of the full expansion."""
        m, n = self.minus.shape
        return 2 * m, 2 * n

    @property
    def full(self) -> np.ndarray:
        return delta(self.minus, self.plus)

    @classmethod
    def from_full(cls, z, atol: float = STRUCTURE_TOL) -> "DoubledMatrix":
        """Split a full matrix into its blocks, checking the block pattern."""
        z = _as_matrix(z, "z")
        rows, cols = z.shape
        if rows % 2 or cols % 2:
            raise DimensionError(f"doubled matrix needs even dimensions, got {z.shape}")
        m, n = rows // 2, cols // 2
        minus, plus = z[:m, :n], z[:m, n:]
        dev = max(
            np.max(np.abs(z[m:, :n] - plus.conj()), initial=0.0),
            np.max(np.abs(z[m:, n:] - minus.conj()), initial=0.0),
        )
        if dev > atol:
            raise ValidationError(
                f"matrix is not doubled-structured (deviation {dev:.3g} > {atol:g})")
        return cls(minus, plus)

    def __matmul__(self, other: "DoubledMatrix") -> "DoubledMatrix":
        if not isinstance(other, DoubledMatrix):
            return NotImplemented
        # [[a, b], [b#, a#]] [[c, d], [d#, c#]] keeps the pattern
        a, b, c, d = self.minus, self.plus, other.minus, other.plus
        if a.shape[1] != c.shape[0]:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        return DoubledMatrix(a @ c + b @ d.conj(), a @ d + b @ c.conj())

    def __add__(self, other: "DoubledMatrix") -> "DoubledMatrix":
        if not isinstance(other, DoubledMatrix):
            return NotImplemented
        return DoubledMatrix(self.minus + other.minus, self.plus + other.plus)

    def flat(self) -> "DoubledMatrix":
        return DoubledMatrix(self.minus.conj().T, -self.plus.T)

    def allclose(self, other: "DoubledMatrix", atol: float = 1e-10) -> bool:
        return (self.shape == other.shape
                and np.allclose(self.minus, other.minus, rtol=0, atol=atol)
                and np.allclose(self.plus, other.plus, rtol=0, atol=atol))


def _canonicalize(mat: np.ndarray, target: np.ndarray, what: str) -> np.ndarray:
    dev = np.max(np.abs(mat - target), initial=0.0)
    if dev > HERMITIAN_TOL:
        raise ValidationError(f"{what} violated by {dev:.3g} (tolerance {HERMITIAN_TOL:g})")
    return 0.5 * (mat + target)


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    """Coefficients of ``sum w-_ij a_i* a_j + 1/2 (w+_ij a_i* a_j* + h.c.)``.

    ``omega_minus`` is Hermitian and ``omega_plus`` symmetric.  Inputs within
    ``HERMITIAN_TOL`` of that are averaged into shape; anything further off
    is rejected.
    """

    omega_minus: np.ndarray
    omega_plus: np.ndarray

    def __post_init__(self):
        om = _as_matrix(self.omega_minus, "omega_minus")
        op = _as_matrix(self.omega_plus, "omega_plus")
        if om.shape[0] != om.shape[1] or om.shape != op.shape:
            raise DimensionError(
                f"Hamiltonian blocks must be equal square shapes, got {om.shape}, {op.shape}")
        om = _canonicalize(om, om.conj().T, "hermiticity of omega_minus")
        op = _canonicalize(op, op.T, "symmetry of omega_plus")
        object.__setattr__(self, "omega_minus", _frozen(om))
        object.__setattr__(self, "omega_plus", _frozen(op))

    @classmethod
    def zero(cls, n: int) -> "HamiltonianSpec":
        return cls(np.zeros((n, n)), np.zeros((n, n)))

    @property
    def n(self) -> int:
        return self.omega_minus.shape[0]

    def doubled(self) -> np.ndarray:
        """``Delta(Omega-, Omega+)``; the state matrix term is ``-Delta(i Omega-, i Omega+)``."""
        return delta(self.omega_minus, self.omega_plus)

    def drift(self) -> np.ndarray:
        """Contribution ``-Delta(i Omega-, i Omega+)`` of the Hamiltonian to the state matrix."""
        return -delta(1j * self.omega_minus, 1j * self.omega_plus)

    def __add__(self, other: "HamiltonianSpec") -> "HamiltonianSpec":
        if not isinstance(other, HamiltonianSpec):
            return NotImplemented
        if other.n != self.n:
            raise DimensionError(f"mode counts differ: {self.n} vs {other.n}")
        return HamiltonianSpec(self.omega_minus + other.omega_minus,
                               self.omega_plus + other.omega_plus)

    def __sub__(self, other: "HamiltonianSpec") -> "HamiltonianSpec":
        if not isinstance(other, HamiltonianSpec):
            return NotImplemented
        return self + other.scaled(-1.0)

    def scaled(self, factor: float) -> "HamiltonianSpec":
        return HamiltonianSpec(factor * self.omega_minus, factor * self.omega_plus)

    def allclose(self, other: "HamiltonianSpec", atol: float = 1e-10) -> bool:
        return (self.n == other.n
                and np.allclose(self.omega_minus, other.omega_minus, rtol=0, atol=atol)
                and np.allclose(self.omega_plus, other.omega_plus, rtol=0, atol=atol))


@dataclass(frozen=True, eq=False)
class SlhTriple:
    """An open oscillator network ``(S, L, H)`` with ``m`` channels and ``n`` modes.

    The coupling operator is ``L = c_minus a + c_plus a#``.
    """

    s: np.ndarray
    c_minus: np.ndarray
    c_plus: np.ndarray
    h: HamiltonianSpec

    def __post_init__(self):
        s = _as_matrix(self.s, "s")
        m = s.shape[0]
        if s.shape != (m, m):
            raise DimensionError(f"scattering matrix must be square, got {s.shape}")
        n = self.h.n
        c_minus = _as_block(self.c_minus, m, n)
        c_plus = _as_block(self.c_plus, m, n)
        if c_minus.shape != (m, n) or c_plus.shape != (m, n):
            raise DimensionError(
                f"coupling blocks must be {m}x{n}, got {c_minus.shape} and {c_plus.shape}")
        dev = np.max(np.abs(s.conj().T @ s - np.eye(m)), initial=0.0)
        if dev > UNITARY_TOL:
            raise ValidationError(f"scattering matrix is not unitary (deviation {dev:.3g})")
        object.__setattr__(self, "s", _frozen(s))
        object.__setattr__(self, "c_minus", _frozen(c_minus))
        object.__setattr__(self, "c_plus", _frozen(c_plus))

    @classmethod
    def identity(cls, m: int, n: int) -> "SlhTriple":
        """The neutral element of the series product: ``(I, 0, 0)``."""
        return cls(np.eye(m), np.zeros((m, n)), np.zeros((m, n)), HamiltonianSpec.zero(n))

    @property
    def m(self) -> int:
        return self.s.shape[0]

    @property
    def n(self) -> int:
        return self.h.n

    @property
    def coupling(self) -> DoubledMatrix:
        return DoubledMatrix(self.c_minus, self.c_plus)

    def allclose(self, other: "SlhTriple", atol: float = 1e-10) -> bool:
        return (self.m == other.m and self.n == other.n
                and np.allclose(self.s, other.s, rtol=0, atol=atol)
                and self.coupling.allclose(other.coupling, atol)
                and self.h.allclose(other.h, atol))


def _check_even(z: np.ndarray, square: bool = False) -> None:
    rows, cols = z.shape
    if rows % 2 or cols % 2:
        raise DimensionError(f"doubled operation needs even dimensions, got {z.shape}")
    if square and rows != cols:
        raise DimensionError(f"square matrix required, got {z.shape}")


def flat(z) -> np.ndarray:
    """``J_n z^dagger J_m`` for a ``2m x 2n`` matrix ``z``."""
    z = _as_matrix(z, "z")
    _check_even(z)
    rows, cols = z.shape
    return j_matrix(cols // 2) @ z.conj().T @ j_matrix(rows // 2)


def re_flat(x) -> np.ndarray:
    """Structured real part ``(x + flat(x)) / 2``."""
    x = _as_matrix(x, "x")
    _check_even(x, square=True)
    return 0.5 * (x + flat(x))


def canonical_hamiltonian(m_coef) -> HamiltonianSpec:
    """Reduce the quadratic form ``X^dagger N X`` (``X = (a; a#)``) to canonical coefficients.

    The scalar ``trace(N22)`` produced by reordering ``a a*`` is dropped.
    """
    nmat = _as_matrix(m_coef, "m_coef")
    _check_even(nmat, square=True)
    dev = np.max(np.abs(nmat - nmat.conj().T), initial=0.0)
    if dev > HERMITIAN_TOL:
        raise ValidationError(f"quadratic-form coefficient is not Hermitian (deviation {dev:.3g})")
    n = nmat.shape[0] // 2
    n11, n12, n22 = nmat[:n, :n], nmat[:n, n:], nmat[n:, n:]
    omega_minus = n11 + n22.T
    omega_minus = 0.5 * (omega_minus + omega_minus.conj().T)
    return HamiltonianSpec(omega_minus, n12 + n12.T)


def imag_quadratic(m_coef) -> HamiltonianSpec:
    """Canonical coefficients of ``Im(X^dagger M X) = X^dagger (M - M^dagger)/(2i) X``."""
    mat = _as_matrix(m_coef, "m_coef")
    _check_even(mat, square=True)
    return canonical_hamiltonian((mat - mat.conj().T) / 2j)


def coupling_rows(g: SlhTriple) -> np.ndarray:
    """``[c_minus, c_plus]``: the ``m x 2n`` map with ``L = rows @ (a; a#)``."""
    return np.hstack([g.c_minus, g.c_plus])


def series_product(g2: SlhTriple, g1: SlhTriple) -> SlhTriple:
    """Cascade ``g2 <| g1``: the outputs of ``g1`` drive the inputs of ``g2``.

    Both triples must act on the same ``n`` modes (matched by position) and
    have the same channel count.
    """
    if g1.m != g2.m:
        raise DimensionError(f"channel counts differ: {g2.m} vs {g1.m}")
    if g1.n != g2.n:
        raise DimensionError(f"mode counts differ: {g2.n} vs {g1.n}")
    s = g2.s @ g1.s
    coupling = g2.coupling + DoubledMatrix(g2.s, np.zeros_like(g2.s)) @ g1.coupling
    # Im(L2^dagger S2 L1) only involves the upper (L, not L#) rows
    cross = coupling_rows(g2).conj().T @ g2.s @ coupling_rows(g1)
    h = g1.h + g2.h + imag_quadratic(cross)
    try:
        return SlhTriple(s, coupling.minus, coupling.plus, h)
    except ValidationError as exc:
        raise NumericalError(f"series product lost unitarity: {exc}") from exc
