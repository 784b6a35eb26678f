"""Recursive-descent parser for ``.slhnet`` network descriptions.

A document is a sequence of four statement kinds::

    param gamma nominal 0 in [-0.5, 0.5] grid 3
    component cavity modes 1 channels 3 {
      S = I(3)
      Cminus = [sqrt(1 + gamma); 1; 1]
      Hminus = [delta]
    }
    cascade cavity            # a <| b <| c feeds c into b into a; '◁' also accepted
    analysis { tol = 1e-8  eta = 0.5  sweep_points = 2048 }

``#`` starts a comment.  Whitespace, including newlines, only separates
tokens.  Every failure is reported as a :class:`ParseError` carrying
positioned :class:`Diagnostic` records.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional, Union

from ..errors import SlhError
from .expr import FUNCTIONS, BinOp, Call, Expr, ImagUnit, Name, Neg, Num, free_names

__all__ = [
    "KEYWORDS", "RESERVED", "FIELDS", "MAX_GRID",
    "Diagnostic", "ParseError", "Token", "tokenize",
    "ParamSpec", "Identity", "MatrixLiteral", "ComponentDecl", "AnalysisConfig",
    "ModelDocument", "parse", "parse_expr",
]

KEYWORDS = ("param", "nominal", "in", "grid", "component", "modes", "channels",
            "cascade", "analysis")
RESERVED = frozenset(KEYWORDS) | {"i", "I", *FUNCTIONS}
FIELDS = ("S", "Cminus", "Cplus", "Hminus", "Hplus")
ANALYSIS_KEYS = ("tol", "eta", "sweep_points")
MAX_GRID = 10**6


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str

    def __str__(self):
        return f"{self.line}:{self.col}: {self.message}"


class ParseError(SlhError, ValueError):
    """The document is malformed; ``diagnostics`` lists every problem found."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class Token:
    kind: str  # NAME, NUMBER, PUNCT, CASCADE, EOF
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<cascade>◁|<\|)
  | (?P<punct>[\[\](){},;=+\-*/])
""", re.VERBOSE)


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError([Diagnostic(line, col, f"unexpected character {text[pos]!r}")])
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("number", "name", "cascade", "punct"):
            tokens.append(Token(kind.upper(), m.group(), line, col))
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


@dataclass(frozen=True)
class ParamSpec:
    """Uncertain real parameter with its admissible interval and grid resolution."""

    name: str
    nominal: float
    lo: float
    hi: float
    grid_points: int = 1
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    @property
    def interval(self) -> tuple[float, float]:
        return self.lo, self.hi


@dataclass(frozen=True)
class Identity:
    size: int
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    @property
    def shape(self):
        return self.size, self.size


@dataclass(frozen=True)
class MatrixLiteral:
    rows: tuple[tuple[Expr, ...], ...]
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    @property
    def shape(self):
        return len(self.rows), len(self.rows[0]) if self.rows else 0


MatrixValue = Union[Identity, MatrixLiteral]


@dataclass(frozen=True)
class ComponentDecl:
    name: str
    modes: int
    channels: int
    fields: dict  # field name -> MatrixValue, in declaration order
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def expected_shape(self, key: str) -> tuple[int, int]:
        if key == "S":
            return self.channels, self.channels
        if key in ("Cminus", "Cplus"):
            return self.channels, self.modes
        return self.modes, self.modes


@dataclass(frozen=True)
class AnalysisConfig:
    """Analysis settings; ``None`` means "use the default"."""

    tol: Optional[float] = None
    eta: Optional[float] = None
    sweep_points: Optional[int] = None


@dataclass(frozen=True)
class ModelDocument:
    params: dict
    components: dict
    cascade: tuple
    analysis: AnalysisConfig = AnalysisConfig()


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.errors: list[Diagnostic] = []

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def fail(self, expected: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "EOF" else repr(tok.text)
        raise ParseError(self.errors + [Diagnostic(tok.line, tok.col, f"expected {expected}, found {found}")])

    def at(self, text: str) -> bool:
        return self.tok.kind in ("PUNCT", "NAME", "CASCADE") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"'{text}'")
        return self.advance()

    def expect_name(self, what: str = "a name") -> Token:
        if self.tok.kind != "NAME":
            self.fail(what)
        return self.advance()

    def semantic(self, tok_or_node, message: str):
        self.errors.append(Diagnostic(tok_or_node.line, tok_or_node.col, message))

    def signed_number(self) -> float:
        sign = 1.0
        if self.at("-") or self.at("+"):
            sign = -1.0 if self.advance().text == "-" else 1.0
        if self.tok.kind != "NUMBER":
            self.fail("a number")
        return sign * float(self.advance().text)

    def integer(self, what: str) -> tuple[int, Token]:
        tok = self.tok
        if tok.kind != "NUMBER" or not tok.text.isdigit():
            self.fail(what)
        self.advance()
        return int(tok.text), tok

    # -- grammar

    def document(self) -> ModelDocument:
        params, components, cascades, analyses = {}, {}, [], []
        while self.tok.kind != "EOF" or not (params or components or cascades or analyses):
            tok = self.tok
            if tok.kind == "NAME" and tok.text == "param":
                p = self.param()
                if p.name in params:
                    self.semantic(p, f"duplicate parameter '{p.name}'")
                params.setdefault(p.name, p)
            elif tok.kind == "NAME" and tok.text == "component":
                c = self.component()
                if c.name in components:
                    self.semantic(c, f"duplicate component '{c.name}'")
                components.setdefault(c.name, c)
            elif tok.kind == "NAME" and tok.text == "cascade":
                cascades.append(self.cascade())
            elif tok.kind == "NAME" and tok.text == "analysis":
                analyses.append(self.analysis())
            else:
                self.fail("'param', 'component', 'cascade', or 'analysis'")
        return self.check(params, components, cascades, analyses)

    def param(self) -> ParamSpec:
        start = self.expect("param")
        name_tok = self.expect_name("a parameter name")
        seen = {}
        while self.tok.kind == "NAME" and self.tok.text in ("nominal", "in", "grid"):
            clause = self.advance()
            if clause.text in seen:
                self.semantic(clause, f"duplicate '{clause.text}' clause")
            if clause.text == "nominal":
                seen["nominal"] = self.signed_number()
            elif clause.text == "in":
                self.expect("[")
                lo = self.signed_number()
                self.expect(",")
                hi = self.signed_number()
                self.expect("]")
                seen["in"] = (lo, hi)
            else:
                seen["grid"], _ = self.integer("a positive integer grid size")
        for required in ("nominal", "in"):
            if required not in seen:
                self.fail(f"'{required}' clause")
        lo, hi = seen["in"]
        spec = ParamSpec(name_tok.text, seen["nominal"], lo, hi, seen.get("grid", 1),
                         name_tok.line, name_tok.col)
        if name_tok.text in RESERVED:
            self.semantic(name_tok, f"parameter name '{name_tok.text}' is reserved")
        if lo > hi:
            self.semantic(start, f"empty interval [{_fmt(lo)}, {_fmt(hi)}]")
        elif not lo <= spec.nominal <= hi:
            self.semantic(start, f"nominal {_fmt(spec.nominal)} outside interval "
                                 f"[{_fmt(lo)}, {_fmt(hi)}]")
        if spec.grid_points < 1:
            self.semantic(start, "grid must be at least 1")
        return spec

    def component(self) -> ComponentDecl:
        self.expect("component")
        name_tok = self.expect_name("a component name")
        self.expect("modes")
        modes, _ = self.integer("a mode count")
        self.expect("channels")
        channels, _ = self.integer("a channel count")
        self.expect("{")
        fields = {}
        while not self.at("}"):
            key = self.tok
            if key.kind != "NAME" or key.text not in FIELDS:
                self.fail("one of 'S', 'Cminus', 'Cplus', 'Hminus', 'Hplus', or '}'")
            self.advance()
            self.expect("=")
            value = self.matrix_value()
            if key.text in fields:
                self.semantic(key, f"duplicate field '{key.text}'")
            fields.setdefault(key.text, value)
        self.expect("}")
        decl = ComponentDecl(name_tok.text, modes, channels, fields, name_tok.line, name_tok.col)
        for required in ("S", "Cminus"):
            if required not in fields:
                self.semantic(name_tok, f"component '{decl.name}' lacks required field '{required}'")
        for key, value in fields.items():
            want = decl.expected_shape(key)
            if value.shape != want:
                self.semantic(value, f"{key} of '{decl.name}' is {value.shape[0]}x{value.shape[1]}, "
                                     f"expected {want[0]}x{want[1]}")
        return decl

    def matrix_value(self) -> MatrixValue:
        tok = self.tok
        if tok.kind == "NAME" and tok.text == "I":
            self.advance()
            self.expect("(")
            size, _ = self.integer("an identity size")
            self.expect(")")
            return Identity(size, tok.line, tok.col)
        self.expect("[")
        rows = [self.matrix_row()]
        while self.at(";"):
            self.advance()
            rows.append(self.matrix_row())
        self.expect("]")
        widths = {len(r) for r in rows}
        if len(widths) != 1:
            self.semantic(tok, "matrix rows have different lengths")
        return MatrixLiteral(tuple(rows), tok.line, tok.col)

    def matrix_row(self) -> tuple:
        row = [self.expr()]
        while self.at(","):
            self.advance()
            row.append(self.expr())
        return tuple(row)

    def cascade(self) -> list[Token]:
        self.expect("cascade")
        names = [self.expect_name("a component name")]
        while self.tok.kind == "CASCADE":
            self.advance()
            names.append(self.expect_name("a component name"))
        return names

    def analysis(self) -> tuple[Token, AnalysisConfig]:
        start = self.expect("analysis")
        self.expect("{")
        values = {}
        while not self.at("}"):
            key = self.tok
            if key.kind != "NAME" or key.text not in ANALYSIS_KEYS:
                self.fail("one of 'tol', 'eta', 'sweep_points', or '}'")
            self.advance()
            self.expect("=")
            if key.text == "sweep_points":
                value, _ = self.integer("a positive integer")
                if value < 1:
                    self.semantic(key, "sweep_points must be at least 1")
            else:
                value = self.signed_number()
                if key.text == "tol" and not value > 0:
                    self.semantic(key, f"tol must be positive, got {_fmt(value)}")
                if key.text == "eta" and value < 0:
                    self.semantic(key, f"eta must be nonnegative, got {_fmt(value)}")
            if key.text in values:
                self.semantic(key, f"duplicate analysis key '{key.text}'")
            values[key.text] = value
        self.expect("}")
        return start, AnalysisConfig(**values)

    # expr := term (('+'|'-') term)*
    def expr(self) -> Expr:
        node = self.term()
        while self.at("+") or self.at("-"):
            op = self.advance()
            node = BinOp(op.text, node, self.term(), op.line, op.col)
        return node

    # term := factor (('*'|'/') factor)*
    def term(self) -> Expr:
        node = self.factor()
        while self.at("*") or self.at("/"):
            op = self.advance()
            node = BinOp(op.text, node, self.factor(), op.line, op.col)
        return node

    def factor(self) -> Expr:
        tok = self.tok
        if tok.kind == "NUMBER":
            self.advance()
            return Num(float(tok.text), tok.line, tok.col)
        if self.at("-"):
            self.advance()
            return Neg(self.factor(), tok.line, tok.col)
        if self.at("("):
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "NAME":
            self.advance()
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg, tok.line, tok.col)
            if tok.text == "i":
                return ImagUnit(tok.line, tok.col)
            return Name(tok.text, tok.line, tok.col)
        self.fail("an expression")

    # -- whole-document checks

    def check(self, params, components, cascades, analyses) -> ModelDocument:
        total = 1
        for p in params.values():
            total *= max(p.grid_points, 1)
        if total > MAX_GRID:
            first = next(iter(params.values()))
            self.semantic(first, f"parameter grid has {total} points, more than {MAX_GRID}")

        for comp in components.values():
            for value in comp.fields.values():
                if isinstance(value, MatrixLiteral):
                    for row in value.rows:
                        for entry in row:
                            for ref in free_names(entry):
                                if ref.name not in params:
                                    self.semantic(ref, f"unknown parameter '{ref.name}'")

        if not components:
            tok = self.tokens[0]
            self.semantic(tok, "document declares no component")
        if len(cascades) > 1:
            self.semantic(cascades[1][0], "more than one 'cascade' statement")
        if cascades:
            order = cascades[0]
        elif len(components) == 1:
            order = []
        else:
            order = []
            if components:
                self.semantic(self.tokens[0], "missing 'cascade' statement for several components")
        for tok in order:
            if tok.text not in components:
                self.semantic(tok, f"cascade names undeclared component '{tok.text}'")
        used = [components[t.text] for t in order if t.text in components]
        if not cascades and len(components) == 1:
            used = list(components.values())
        if used:
            n, m = used[0].modes, used[0].channels
            for decl in used[1:]:
                if (decl.modes, decl.channels) != (n, m):
                    self.semantic(decl, f"component '{decl.name}' has {decl.modes} modes / "
                                        f"{decl.channels} channels, cascade expects {n} / {m}")

        analysis = AnalysisConfig()
        if len(analyses) > 1:
            self.semantic(analyses[1][0], "more than one 'analysis' block")
        if analyses:
            analysis = analyses[0][1]

        if self.errors:
            raise ParseError(self.errors)
        return ModelDocument(params, components, tuple(d.name for d in used), analysis)


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() and math.isfinite(x) else repr(x)


def parse(text: str) -> ModelDocument:
    """Parse ``.slhnet`` source into a :class:`ModelDocument`.

    Raises :class:`ParseError` with positioned diagnostics on any syntax or
    semantic problem.
    """
    try:
        return _Parser(text).document()
    except RecursionError:
        raise ParseError([Diagnostic(1, 1, "expression nesting too deep")]) from None


def parse_expr(text: str) -> Expr:
    """Parse a single arithmetic expression."""
    try:
        p = _Parser(text)
        node = p.expr()
        if p.tok.kind != "EOF":
            p.fail("end of expression")
        return node
    except RecursionError:
        raise ParseError([Diagnostic(1, 1, "expression nesting too deep")]) from None
