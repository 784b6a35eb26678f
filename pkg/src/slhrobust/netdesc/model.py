"""Canonical serialization and numeric instantiation of parsed documents."""

from __future__ import annotations

import itertools
from functools import reduce
from typing import Mapping

import numpy as np

from ..doubled import HamiltonianSpec, SlhTriple, series_product
from ..errors import InvalidModelError, SlhError
from ..uncertainty import MAX_SAMPLES, UncertainModel, UncertaintySample
from .expr import eval_expr, to_source
from .parser import Identity, ModelDocument

__all__ = ["serialize", "grid_points", "evaluate_component", "evaluate_network",
           "instantiate", "InstantiationError"]


class InstantiationError(InvalidModelError):
    """A document parses but does not describe a valid network at some grid point."""


def _num(x: float) -> str:
    return repr(float(x))


def _matrix_source(value) -> str:
    if isinstance(value, Identity):
        return f"I({value.size})"
    rows = ("; ".join(", ".join(to_source(e) for e in row) for row in value.rows))
    return f"[{rows}]"


def serialize(doc: ModelDocument) -> str:
    """Render ``doc`` in canonical ``.slhnet`` form; ``parse(serialize(doc)) == doc``."""
    out = []
    for p in doc.params.values():
        out.append(f"param {p.name} nominal {_num(p.nominal)} in [{_num(p.lo)}, {_num(p.hi)}] "
                   f"grid {p.grid_points}")
    for c in doc.components.values():
        out.append(f"component {c.name} modes {c.modes} channels {c.channels} {{")
        for key, value in c.fields.items():
            out.append(f"  {key} = {_matrix_source(value)}")
        out.append("}")
    if doc.cascade:
        out.append("cascade " + " <| ".join(doc.cascade))
    a = doc.analysis
    items = []
    if a.tol is not None:
        items.append(f"tol = {_num(a.tol)}")
    if a.eta is not None:
        items.append(f"eta = {_num(a.eta)}")
    if a.sweep_points is not None:
        items.append(f"sweep_points = {a.sweep_points}")
    if items:
        out.append("analysis { " + "  ".join(items) + " }")
    return "\n".join(out) + "\n"


def _param_values(p) -> np.ndarray:
    if p.grid_points == 1 or p.lo == p.hi:
        return np.array([p.nominal]) if p.grid_points == 1 else np.full(p.grid_points, p.lo)
    return np.linspace(p.lo, p.hi, p.grid_points)


def grid_points(doc: ModelDocument) -> list[dict]:
    """Parameter bindings for every sample, row-major over parameters in declaration order.

    The nominal point is appended when the grid misses it.
    """
    names = list(doc.params)
    axes = [_param_values(doc.params[k]) for k in names]
    total = int(np.prod([len(ax) for ax in axes])) if axes else 1
    if total > MAX_SAMPLES:
        raise InstantiationError(f"parameter grid has {total} points, more than {MAX_SAMPLES}")
    nominal = {k: doc.params[k].nominal for k in names}
    points = [dict(zip(names, map(float, combo))) for combo in itertools.product(*axes)]
    # degenerate intervals collapse to repeated identical points
    unique = []
    seen = set()
    for pt in points:
        key = tuple(pt[k] for k in names)
        if key not in seen:
            seen.add(key)
            unique.append(pt)
    if not any(all(np.isclose(pt[k], nominal[k], rtol=1e-12, atol=1e-15) for k in names)
               for pt in unique):
        unique.append(nominal)
    return unique


def _evaluate_matrix(value, shape, bindings) -> np.ndarray:
    if value is None:
        return np.zeros(shape, dtype=complex)
    if isinstance(value, Identity):
        return np.eye(value.size, dtype=complex)
    return np.array([[eval_expr(e, bindings) for e in row] for row in value.rows],
                    dtype=complex).reshape(shape)


def evaluate_component(decl, bindings: Mapping[str, float]) -> SlhTriple:
    def get(key):
        return _evaluate_matrix(decl.fields.get(key), decl.expected_shape(key), bindings)
    try:
        h = HamiltonianSpec(get("Hminus"), get("Hplus"))
        return SlhTriple(get("S"), get("Cminus"), get("Cplus"), h)
    except SlhError as exc:
        where = ", ".join(f"{k}={v:.6g}" for k, v in bindings.items())
        raise InstantiationError(f"component '{decl.name}' at ({where}): {exc}") from exc


def evaluate_network(doc: ModelDocument, bindings: Mapping[str, float]) -> SlhTriple:
    """The cascade ``c[0] <| c[1] <| ... <| c[-1]`` evaluated at ``bindings``."""
    parts = [evaluate_component(doc.components[name], bindings) for name in doc.cascade]
    return reduce(lambda inner, outer: series_product(outer, inner), reversed(parts[:-1]), parts[-1])


def instantiate(doc: ModelDocument) -> UncertainModel:
    """Evaluate the nominal network and one perturbation per grid point.

    Each sample reproduces the network at its grid point exactly:
    ``dc = C(point) - C_n``, ``dH = H(point) - H_n``, ``dS = S_n^dagger S(point)``.
    """
    nominal_bindings = {k: p.nominal for k, p in doc.params.items()}
    nominal = evaluate_network(doc, nominal_bindings)
    samples = []
    for pt in grid_points(doc):
        g = evaluate_network(doc, pt)
        try:
            samples.append(UncertaintySample(nominal.s.conj().T @ g.s,
                                             g.c_minus - nominal.c_minus,
                                             g.c_plus - nominal.c_plus,
                                             g.h - nominal.h))
        except SlhError as exc:
            raise InstantiationError(f"grid point {pt}: {exc}") from exc
    return UncertainModel(nominal, samples, doc.analysis.eta)
