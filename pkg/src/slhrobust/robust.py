"""Robust stability certificates for a nominal state matrix under norm-bounded perturbation.

Two sufficient tests are provided.  The small-gain test compares the
perturbation bound ``eta`` with the distance to instability
``inf_w sigma_min(iwI - A_n)``.  The Lyapunov test looks for ``P > 0`` with
``A_n^dagger P + P A_n + eta^2 I + P P < 0``.  Both tests accept exactly the
same ``eta`` values, so the optimal LMI value ``zeta`` equals
``1 / margin**2``.  The witness ``P`` is taken from the stabilizing solution
of the matching Riccati equation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from .doubled import SlhTriple
from .errors import (DimensionError, DomainError, InfeasibleError,
                     NumericalError, ValidationError)
from .realization import (STABILITY_TOL, is_doubled, is_mean_square_stable,
                          to_state_space)
from .uncertainty import UncertaintySample, additive_perturbation, theta_scale

__all__ = [
    "DEFAULT_TOL",
    "DEFAULT_SWEEP_POINTS",
    "MarginResult",
    "LyapunovCertificate",
    "sigma_min_curve",
    "sweep_grid",
    "instability_distance",
    "smallgain_verdict",
    "smallgain_from_margin",
    "lyapunov_block",
    "verify_lyapunov_condition",
    "synthesize_witness",
    "minimize_zeta",
    "marginal_destabilization",
]

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_SWEEP_POINTS = 2048
_AXIS_REL = 1e-9
_SVD_CHUNK = 1 << 14


def _square(a, name="a") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class MarginResult:
    """Distance to instability of a state matrix.

    ``margin`` is zero (and ``nominal_unstable`` set) when the matrix is not
    Hurwitz.  ``sweep_margin`` is the value found by the independent frequency
    sweep; a disagreement is recorded in ``warnings``.
    """

    margin: float
    minimizing_omega: float
    method_tolerance: float
    nominal_unstable: bool = False
    sweep_margin: float = float("nan")
    warnings: tuple[str, ...] = field(default=())


@dataclass(frozen=True, eq=False)
class LyapunovCertificate:
    """Strictly feasible point ``(zeta, P)`` of the Lyapunov LMI.

    ``residual_max_eig`` is the largest eigenvalue of the block matrix at
    ``eta = 1/sqrt(zeta)``; it is negative for a valid certificate.
    """

    zeta: float
    p_witness: np.ndarray
    residual_max_eig: float
    margin: float = float("nan")

    @property
    def bound(self) -> float:
        """Largest perturbation norm the certificate tolerates, ``1/sqrt(zeta)``."""
        return 1.0 / np.sqrt(self.zeta)

    def certifies(self, eta: float) -> bool:
        """Robust stability verdict for perturbation bound ``eta``: ``zeta < 1/eta**2``."""
        return eta == 0 or self.zeta * eta * eta < 1.0


def sigma_min_curve(a, omegas) -> np.ndarray:
    """Smallest singular value of ``i w I - a`` for each ``w`` in ``omegas``."""
    a = _square(a)
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    eye = np.eye(a.shape[0])
    out = np.empty(omegas.shape[0])
    for start in range(0, omegas.shape[0], _SVD_CHUNK):
        w = omegas[start:start + _SVD_CHUNK]
        mats = 1j * w[:, None, None] * eye - a
        out[start:start + _SVD_CHUNK] = np.linalg.svd(mats, compute_uv=False)[:, -1]
    return out


def sweep_grid(scale: float, points: int = DEFAULT_SWEEP_POINTS,
               symmetric: bool = False) -> np.ndarray:
    """Sorted frequency grid: half linear, half logarithmic over ``[0, 10*scale]``, plus 0."""
    wmax = 10.0 * max(scale, 1e-12)
    half = max(points // 2, 2)
    lin = np.linspace(0.0, wmax, half)
    logp = np.logspace(np.log10(wmax) - 6, np.log10(wmax), points - half)
    grid = np.unique(np.concatenate([[0.0], lin, logp]))
    if symmetric:
        grid = np.unique(np.concatenate([-grid, grid]))
    return grid


def _sweep_minimum(a, grid) -> tuple[float, float]:
    values = sigma_min_curve(a, grid)
    k = int(np.argmin(values))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    best_w, best = grid[k], values[k]
    if hi > lo:
        res = minimize_scalar(lambda w: sigma_min_curve(a, [w])[0], bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-12 * max(1.0, abs(hi))})
        if res.fun < best:
            best_w, best = float(res.x), float(res.fun)
    return float(best), float(best_w)


def _axis_frequencies(a, sigma, eye, axis_tol) -> np.ndarray:
    k = a.shape[0]
    ham = np.block([[a, -sigma * eye], [sigma * eye, -a.conj().T]])
    try:
        eigs = scipy.linalg.eigvals(ham)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigenvalue computation failed: {exc}") from exc
    if not np.all(np.isfinite(eigs)):
        raise NumericalError("non-finite eigenvalues in the level-set test")
    assert eigs.shape[0] == 2 * k
    return eigs.imag[np.abs(eigs.real) <= axis_tol]


def instability_distance(a_n, tol: float = DEFAULT_TOL,
                         sweep_points: int = DEFAULT_SWEEP_POINTS) -> MarginResult:
    """``inf_w sigma_min(i w I - a_n)`` by bisection on the singular-value level.

    ``sigma`` is at or above the infimum exactly when the matrix
    ``[[a, -sigma I], [sigma I, -a^dagger]]`` has an eigenvalue on the imaginary
    axis, and that eigenvalue ``i w`` marks a frequency where ``sigma`` is
    attained.  Each such hit also tightens the upper end of the bracket to
    the singular value actually found there.
    """
    a = _square(a_n, "a_n")
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol}")
    if not is_mean_square_stable(a):
        return MarginResult(0.0, float("nan"), tol, nominal_unstable=True,
                            warnings=("nominal state matrix is not Hurwitz; margin set to 0",))

    structured = is_doubled(a)
    norm_a = np.linalg.norm(a, 2)
    axis_tol = _AXIS_REL * norm_a
    eye = np.eye(a.shape[0])

    lo, hi = 0.0, float(sigma_min_curve(a, [0.0])[0])
    best_w = 0.0
    for _ in range(200):
        if hi - lo <= tol * hi:
            break
        mid = 0.5 * (lo + hi)
        freqs = _axis_frequencies(a, mid, eye, axis_tol)
        if structured:
            freqs = np.abs(freqs)
        if freqs.size == 0:
            lo = mid
            continue
        values = sigma_min_curve(a, freqs)
        k = int(np.argmin(values))
        hi = min(mid, float(values[k])) if values[k] >= lo else mid
        best_w = float(freqs[k])
    else:
        raise NumericalError("bisection on the singular-value level did not converge")

    notes = []
    sweep, sweep_w = _sweep_minimum(a, sweep_grid(norm_a, sweep_points, symmetric=not structured))
    if abs(sweep - hi) > 10 * tol * max(1.0, hi):
        msg = (f"frequency sweep minimum {sweep:.12g} at w={sweep_w:.6g} disagrees with "
               f"bisection value {hi:.12g}")
        log.warning(msg)
        notes.append(msg)
    return MarginResult(hi, best_w, tol, sweep_margin=sweep, warnings=tuple(notes))


def smallgain_verdict(a_n, eta: float, tol: float = DEFAULT_TOL) -> bool:
    """Small-gain test: ``eta`` strictly below the distance to instability, with a guard band.

    An unstable nominal matrix yields ``False``.
    """
    return smallgain_from_margin(instability_distance(a_n, tol), eta)


def smallgain_from_margin(result: MarginResult, eta: float) -> bool:
    """Small-gain verdict for an already computed margin."""
    if result.nominal_unstable:
        log.info("small-gain verdict false: nominal unstable")
        return False
    guard = 10 * result.method_tolerance * result.margin
    return bool(eta < result.margin - guard)


def lyapunov_block(a_n, eta: float, p) -> np.ndarray:
    """``[[A^dagger P + P A + eta^2 I, P], [P, -I]]``, Hermitian-symmetrized."""
    a = _square(a_n, "a_n")
    p = np.asarray(p, dtype=complex)
    k = a.shape[0]
    top = a.conj().T @ p + p @ a + eta * eta * np.eye(k)
    block = np.block([[top, p], [p, -np.eye(k)]])
    return 0.5 * (block + block.conj().T)


def verify_lyapunov_condition(a_n, eta: float, p) -> tuple[bool, float]:
    """Check the block Lyapunov inequality for a candidate ``P``.

    Returns the verdict and the largest eigenvalue of the block matrix.
    Raises :class:`ValidationError` unless ``P`` is Hermitian positive definite.
    """
    a = _square(a_n, "a_n")
    p = _square(p, "p")
    if p.shape != a.shape:
        raise DimensionError(f"P has shape {p.shape}, expected {a.shape}")
    scale = max(1.0, np.max(np.abs(p)))
    if np.max(np.abs(p - p.conj().T)) > 1e-10 * scale:
        raise ValidationError("witness P is not Hermitian")
    if np.min(np.linalg.eigvalsh(0.5 * (p + p.conj().T))) <= 0:
        raise ValidationError("witness P is not positive definite")
    top = float(np.max(np.linalg.eigvalsh(lyapunov_block(a, eta, p))))
    return top < 0, top


def synthesize_witness(a_n, eta: float, *, slack: float | None = None,
                       margin: float | None = None, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Hermitian ``P > 0`` satisfying the block Lyapunov inequality at ``eta``.

    ``P`` is the stabilizing solution of
    ``A^dagger P + P A + P P + (eta^2 + slack) I = 0``, read off the stable
    invariant subspace of ``[[A, I], [-(eta^2 + slack) I, -A^dagger]]``.
    The default slack is ``1e-6 * (margin**2 - eta**2)``.
    """
    a = _square(a_n, "a_n")
    if margin is None:
        res = instability_distance(a, tol)
        if res.nominal_unstable:
            raise InfeasibleError("nominal state matrix is not Hurwitz; no witness exists")
        margin = res.margin
    if not 0 <= eta < margin:
        raise InfeasibleError(f"eta={eta:.12g} is not below the margin {margin:.12g}")
    if slack is None:
        slack = 1e-6 * (margin * margin - eta * eta)
    k = a.shape[0]
    eye = np.eye(k)
    q = eta * eta + slack
    ham = np.block([[a, eye], [-q * eye, -a.conj().T]])
    _, z, sdim = scipy.linalg.schur(ham, output="complex", sort="lhp")
    if sdim != k:
        raise NumericalError(
            f"Riccati pencil has {sdim} stable eigenvalues, expected {k}; "
            "the level eta^2 + slack reaches the instability boundary")
    x1, x2 = z[:k, :k], z[k:, :k]
    cond = np.linalg.cond(x1)
    if not np.isfinite(cond) or cond > 1e12:
        raise NumericalError(f"stable subspace is ill-conditioned (cond = {cond:.3g})")
    p = np.linalg.solve(x1.T, x2.T).T
    if np.max(np.abs(p - p.conj().T)) > 1e-8 * max(1.0, np.max(np.abs(p))):
        raise NumericalError("Riccati solution is not Hermitian")
    p = 0.5 * (p + p.conj().T)
    ok, top = verify_lyapunov_condition(a, eta, p)
    if not ok:
        raise NumericalError(
            f"synthesized witness fails the Lyapunov test (max eigenvalue {top:.3g})")
    return p


def minimize_zeta(a_n, tol: float = DEFAULT_TOL) -> LyapunovCertificate:
    """Smallest ``zeta`` for which the LMI with the ``-zeta I`` corner block is feasible.

    The optimum is ``1 / margin**2``.  The returned ``zeta`` is padded by the
    relative amount ``10 * tol`` so the certificate is strictly feasible.  The
    padding grows tenfold, up to 1%, if the witness cannot be verified.
    """
    a = _square(a_n, "a_n")
    res = instability_distance(a, tol)
    if res.nominal_unstable:
        raise InfeasibleError("nominal state matrix is not Hurwitz; the LMI is infeasible")
    margin = res.margin
    zeta_opt = 1.0 / (margin * margin)
    pad = 10 * tol
    last_error = None
    while pad <= 1e-2:
        zeta = zeta_opt * (1 + pad)
        eta = 1.0 / np.sqrt(zeta)
        try:
            p = synthesize_witness(a, eta, slack=0.5 * (margin * margin - eta * eta),
                                   margin=margin, tol=tol)
        except NumericalError as exc:
            last_error = exc
            pad *= 10
            continue
        _, top = verify_lyapunov_condition(a, eta, p)
        return LyapunovCertificate(zeta, p, top, margin)
    raise NumericalError(f"no verifiable Lyapunov witness within 1% of the optimum: {last_error}")


def marginal_destabilization(nominal: SlhTriple, s: UncertaintySample,
                             tol: float = DEFAULT_TOL) -> tuple[float, complex]:
    """Scale a destabilizing sample down until the state matrix is marginal.

    Bisects ``theta`` in ``[0, 1]`` on the spectral abscissa of
    ``A_n + dA(theta_scale(s, theta))``; returns ``theta`` and the eigenvalue of
    largest real part there.
    """
    a_n = to_state_space(nominal).a_mat

    def abscissa(theta):
        mat = a_n + additive_perturbation(nominal, theta_scale(s, theta))
        eigs = scipy.linalg.eigvals(mat)
        k = int(np.argmax(eigs.real))
        return float(eigs[k].real), complex(eigs[k])

    g0, _ = abscissa(0.0)
    if g0 >= -STABILITY_TOL:
        raise DomainError("nominal state matrix is not Hurwitz; no marginal point exists on this homotopy")
    g1, eig1 = abscissa(1.0)
    if abs(g1) <= tol:
        return 1.0, eig1
    if g1 < 0:
        raise DomainError("sample does not destabilize the nominal system; "
                          "no marginal point exists on this homotopy")

    lo, hi = 0.0, 1.0
    mid, eig = 0.5, eig1
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm, eig = abscissa(mid)
        if abs(gm) <= tol and hi - lo <= tol:
            break
        if gm < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= np.finfo(float).eps:
            break
    return mid, eig

