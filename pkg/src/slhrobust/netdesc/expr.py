"""Arithmetic expression trees for matrix entries."""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Mapping, Union

from ..errors import SlhError

__all__ = ["Num", "ImagUnit", "Name", "Neg", "BinOp", "Call", "Expr",
           "EvalError", "eval_expr", "to_source", "free_names", "FUNCTIONS"]

FUNCTIONS = ("sqrt", "conj")


class EvalError(SlhError, ValueError):
    """An expression cannot be evaluated with the given bindings."""


@dataclass(frozen=True)
class Num:
    value: float
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ImagUnit:
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Name:
    name: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


Expr = Union[Num, ImagUnit, Name, Neg, BinOp, Call]


def eval_expr(e: Expr, bindings: Mapping[str, float]) -> complex:
    """Evaluate ``e`` to a complex number.

    ``sqrt`` takes the principal branch, so ``sqrt(-4) == 2i``.
    """
    if isinstance(e, Num):
        return complex(e.value)
    if isinstance(e, ImagUnit):
        return 1j
    if isinstance(e, Name):
        try:
            return complex(bindings[e.name])
        except KeyError:
            raise EvalError(f"{e.line}:{e.col}: unbound parameter '{e.name}'") from None
    if isinstance(e, Neg):
        return -eval_expr(e.operand, bindings)
    if isinstance(e, Call):
        z = eval_expr(e.arg, bindings)
        if e.func == "sqrt":
            # a signed zero imaginary part would select the lower branch
            return cmath.sqrt(complex(z.real, z.imag + 0.0))
        if e.func == "conj":
            return z.conjugate()
        raise EvalError(f"{e.line}:{e.col}: unknown function '{e.func}'")
    if isinstance(e, BinOp):
        lhs = eval_expr(e.left, bindings)
        rhs = eval_expr(e.right, bindings)
        if e.op == "+":
            return lhs + rhs
        if e.op == "-":
            return lhs - rhs
        if e.op == "*":
            return lhs * rhs
        if e.op == "/":
            if rhs == 0:
                raise EvalError(f"{e.line}:{e.col}: division by zero")
            return lhs / rhs
        raise EvalError(f"{e.line}:{e.col}: unknown operator '{e.op}'")
    raise TypeError(f"not an expression node: {e!r}")


def free_names(e: Expr):
    """Yield every :class:`Name` node in ``e``."""
    if isinstance(e, Name):
        yield e
    elif isinstance(e, Neg):
        yield from free_names(e.operand)
    elif isinstance(e, Call):
        yield from free_names(e.arg)
    elif isinstance(e, BinOp):
        yield from free_names(e.left)
        yield from free_names(e.right)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    return 4


def to_source(e: Expr) -> str:
    """Render ``e`` with the minimum parentheses needed to reparse the same tree."""
    if isinstance(e, Num):
        return repr(float(e.value))
    if isinstance(e, ImagUnit):
        return "i"
    if isinstance(e, Name):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_source(e.arg)})"
    if isinstance(e, Neg):
        inner = to_source(e.operand)
        return f"-({inner})" if _prec(e.operand) < 3 else f"-{inner}"
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        left = to_source(e.left)
        right = to_source(e.right)
        if _prec(e.left) < p:
            left = f"({left})"
        if _prec(e.right) <= p:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression node: {e!r}")
