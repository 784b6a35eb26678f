"""End-to-end analysis of a model file: the data behind the ``analyze``, ``sweep`` and ``decompose`` commands."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidModelError, SlhError
from .netdesc import grid_points, instantiate, load
from .realization import spectral_abscissa, to_state_space
from .robust import (DEFAULT_SWEEP_POINTS, DEFAULT_TOL, instability_distance,
                     minimize_zeta, sigma_min_curve, smallgain_from_margin,
                     verify_lyapunov_condition)
from .uncertainty import (EtaBoundWarning, UncertainModel, decompose, eta_bound,
                          perturbed_triple, sample_norms)

__all__ = ["AnalysisOptions", "UsageError", "RobustStabilityReport", "REPORT_KEYS", "load_model",
           "run_analyze", "run_sweep", "run_decompose", "matrix_json", "triple_json"]

GRID_NOTE = ("eta is the maximum over a finite parameter grid, a lower estimate of the "
             "true supremum; declare a proven bound with 'eta' to be rigorous")


class UsageError(SlhError, ValueError):
    """Invalid command-line arguments."""


@dataclass
class AnalysisOptions:
    tol: Optional[float] = None
    eta: Optional[float] = None
    sweep_points: Optional[int] = None
    verbose: bool = False


@dataclass
class RobustStabilityReport:
    model_name: str
    nominal_stable: bool
    spectral_abscissa: float
    margin: float
    eta: float
    theorem2_verdict: bool
    zeta: Optional[float]
    lyapunov_bound: Optional[float]
    theorem3_verdict: bool
    witness_residual: Optional[float]
    worst_sample_index: int
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = asdict(self)
        for key, value in out.items():
            if isinstance(value, float) and not math.isfinite(value):
                out[key] = None
        return out


REPORT_KEYS = tuple(RobustStabilityReport.__dataclass_fields__)


def load_model(path, declared_eta=None):
    """Parse and instantiate a model file; ``declared_eta`` overrides the file's bound."""
    try:
        doc = load(path)
    except OSError as exc:
        raise InvalidModelError(f"cannot open '{path}': {exc.strerror or exc}") from exc
    model = instantiate(doc)
    if declared_eta is not None:
        model = UncertainModel(model.nominal, model.samples, declared_eta)
    return doc, model


def run_analyze(path, options: AnalysisOptions | None = None) -> RobustStabilityReport:
    """Run the full pipeline on a model file.

    1. instantiate the model and bound the additive perturbation;
    2. decompose the worst sample into nominal and perturbation subsystems;
    3. small-gain test against the distance to instability;
    4. Lyapunov certificate ``(zeta, P)`` and its verdict.
    """
    options = options or AnalysisOptions()
    doc, model = load_model(path, options.eta)
    tol = options.tol or doc.analysis.tol or DEFAULT_TOL
    sweep_points = options.sweep_points or doc.analysis.sweep_points or DEFAULT_SWEEP_POINTS
    notes = []

    norms = sample_norms(model)
    worst = int(np.argmax(norms))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", EtaBoundWarning)
        eta = eta_bound(model)
    notes.extend(str(w.message) for w in caught if issubclass(w.category, EtaBoundWarning))
    if model.declared_eta is None and len(model.samples) > 1:
        notes.append(GRID_NOTE)

    parts = decompose(model.nominal, model.samples[worst])
    a_n = parts.a_n
    full = to_state_space(_perturbed(model, worst)).a_mat
    residual = float(np.max(np.abs(full - (a_n + parts.delta_a)), initial=0.0))
    if residual > 1e-10 * (1 + np.max(np.abs(full))):
        notes.append(f"reconstruction residual {residual:.3g} for sample {worst}")

    margin = instability_distance(a_n, tol, sweep_points)
    notes.extend(margin.warnings)
    t2 = smallgain_from_margin(margin, eta)

    zeta = bound = residual_w = None
    t3 = False
    if not margin.nominal_unstable:
        cert = minimize_zeta(a_n, tol)
        zeta, bound = cert.zeta, cert.bound
        t3 = cert.certifies(eta)
        _, residual_w = verify_lyapunov_condition(a_n, eta, cert.p_witness)
    else:
        notes.append("nominal unstable: both verdicts false")

    return RobustStabilityReport(
        model_name=str(path),
        nominal_stable=not margin.nominal_unstable,
        spectral_abscissa=spectral_abscissa(a_n),
        margin=margin.margin,
        eta=eta,
        theorem2_verdict=t2,
        zeta=zeta,
        lyapunov_bound=bound,
        theorem3_verdict=t3,
        witness_residual=residual_w,
        worst_sample_index=worst,
        warnings=notes,
    )


def _perturbed(model, index):
    return perturbed_triple(model.nominal, model.samples[index])


def _fmt(x: float) -> str:
    text = repr(float(x))
    return text[:-2] if text.endswith(".0") else text


def run_sweep(path, omega_max: float, points: int, out, plot=None) -> tuple[np.ndarray, np.ndarray]:
    """Write ``omega,sigma_min`` rows for ``points`` frequencies uniformly spaced on ``[0, omega_max]``.

    With ``plot`` the curve is also rendered to that image file.
    """
    if points < 1:
        raise UsageError(f"--points must be at least 1, got {points}")
    if not omega_max >= 0:
        raise UsageError(f"--wmax must be nonnegative, got {omega_max}")
    doc, model = load_model(path)
    a_n = to_state_space(model.nominal).a_mat
    margin = instability_distance(a_n, doc.analysis.tol or DEFAULT_TOL)
    if margin.nominal_unstable:
        raise InvalidModelError("nominal state matrix is not Hurwitz; sweep needs a stable nominal")
    omegas = np.linspace(0.0, omega_max, points)
    sigmas = sigma_min_curve(a_n, omegas)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["omega", "sigma_min"])
        for w, s in zip(omegas, sigmas):
            writer.writerow([_fmt(w), _fmt(s)])
    if plot is not None:
        from .plotting import plot_sweep
        plot_sweep(omegas, sigmas, plot, margin=margin.margin, title=str(path))
    return omegas, sigmas


def matrix_json(z) -> dict:
    z = np.asarray(z, dtype=complex)
    return {"re": z.real.tolist(), "im": z.imag.tolist()}


def triple_json(g) -> dict:
    return {
        "S": matrix_json(g.s),
        "Cminus": matrix_json(g.c_minus),
        "Cplus": matrix_json(g.c_plus),
        "Hminus": matrix_json(g.h.omega_minus),
        "Hplus": matrix_json(g.h.omega_plus),
    }


def run_decompose(path, sample_index: int) -> dict:
    """Nominal/perturbation split of one sample, with the reconstruction residual."""
    doc, model = load_model(path)
    if not 0 <= sample_index < len(model.samples):
        raise UsageError(
            f"sample index {sample_index} out of range (model has {len(model.samples)} samples)")
    parts = decompose(model.nominal, model.samples[sample_index])
    full = to_state_space(_perturbed(model, sample_index)).a_mat
    residual = float(np.max(np.abs(full - (parts.a_n + parts.delta_a)), initial=0.0))
    params = grid_points(doc)[sample_index]
    return {
        "model_name": str(path),
        "sample_index": sample_index,
        "sample_params": params,
        "g_n": triple_json(parts.g_n),
        "delta_sub": triple_json(parts.delta_sub),
        "a_n": matrix_json(parts.a_n),
        "delta_a": matrix_json(parts.delta_a),
        "residual": residual,
    }
