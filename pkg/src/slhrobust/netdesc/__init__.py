"""Textual network descriptions (``.slhnet``): parsing, serialization, instantiation."""

from .expr import EvalError, eval_expr
from .model import (InstantiationError, evaluate_network, grid_points,
                    instantiate, serialize)
from .parser import (AnalysisConfig, ComponentDecl, Diagnostic, ModelDocument,
                     ParamSpec, ParseError, parse, parse_expr)

__all__ = [
    "AnalysisConfig", "ComponentDecl", "Diagnostic", "EvalError", "InstantiationError",
    "ModelDocument", "ParamSpec", "ParseError", "eval_expr", "evaluate_network",
    "grid_points", "instantiate", "parse", "parse_expr", "serialize", "load",
]


def load(path) -> ModelDocument:
    """Read and parse a ``.slhnet`` file."""
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
