"""Text DSL for weights and operators, and the canonical printer.

Grammar:

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := base ('^' uint)?
    base   := uint | param | 'x' | 'dx' | 'i' | '(' expr ')' | matrix
    matrix := '[' row (',' row)* ']'
    row    := '[' expr (',' expr)* ']'

`dx` is the right-acting derivative, products are noncommutative operator products,
`#` starts a comment. Rationals are written p/q; decimals are rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping

from sympy.polys.fields import FracElement

from mopcheck.errors import SpecSemanticError, SpecSyntaxError
from mopcheck.exact import (
    FIELD,
    X,
    CMat,
    MatRF,
    crat,
    imag_part,
    poly_coeffs,
    real_part,
)
from mopcheck.opalg import DiffOp, op_mul

RESERVED = {"x", "dx", "i"}

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<decimal>\d+\.\d*|\.\d+)
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()\[\],])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # num | name | op | eof
    text: str
    offset: int
    line: int
    column: int


def tokenize(src: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        column = pos - line_start + 1
        if not m:
            raise SpecSyntaxError(f"unexpected character {src[pos]!r}", line, column, pos)
        kind = m.lastgroup
        text = m.group()
        if kind == "decimal":
            raise SpecSyntaxError("decimals are not exact, write p/q", line, column, pos)
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, text, pos, line, column))
        for k, ch in enumerate(text):
            if ch == "\n":
                line, line_start = line + 1, pos + k + 1
        pos = m.end()
    tokens.append(Token("eof", "", pos, line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# Values
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Val:
    obj: FracElement | MatRF | DiffOp
    broadcast: bool  # built from scalars and dx only, so it lifts to any size


def _lift(v: _Val, n: int) -> DiffOp:
    """Scalar-like value as an n x n operator."""
    obj = v.obj
    if isinstance(obj, FracElement):
        return DiffOp.scalar(obj, n)
    if isinstance(obj, MatRF):
        return DiffOp.mult(obj)
    if not v.broadcast or n == 1:
        return obj
    return DiffOp.of([MatRF.scalar(c[0, 0], n) for c in obj.coeffs], (n, n))


def _shape(v: _Val) -> tuple[int, int]:
    obj = v.obj
    return (1, 1) if isinstance(obj, FracElement) else obj.shape


def _mul(a: _Val, b: _Val) -> _Val:
    if isinstance(a.obj, FracElement) and isinstance(b.obj, FracElement):
        return _Val(a.obj * b.obj, True)
    if isinstance(a.obj, FracElement) and isinstance(b.obj, MatRF):
        return _Val(b.obj.scale(a.obj), b.broadcast)
    if isinstance(a.obj, MatRF) and isinstance(b.obj, FracElement):
        return _Val(a.obj.scale(b.obj), a.broadcast)
    if isinstance(a.obj, MatRF) and isinstance(b.obj, MatRF):
        return _Val(a.obj * b.obj, False)
    if a.broadcast and not b.broadcast:
        left, right = _lift(a, _shape(b)[0]), _lift(b, 0)
    elif b.broadcast and not a.broadcast:
        left, right = _lift(a, 0), _lift(b, _shape(a)[1])
    else:
        left, right = _lift(a, 1), _lift(b, 1)
    return _Val(op_mul(left, right), a.broadcast and b.broadcast)


def _add(a: _Val, b: _Val) -> _Val:
    if isinstance(a.obj, FracElement) and isinstance(b.obj, FracElement):
        return _Val(a.obj + b.obj, True)
    if a.broadcast and b.broadcast:
        return _Val(_lift(a, 1) + _lift(b, 1), True)
    shape = _shape(b) if a.broadcast else _shape(a)
    if (a.broadcast or b.broadcast) and shape[0] != shape[1]:
        raise SpecSemanticError(f"cannot add a scalar to a {shape[0]}x{shape[1]} value")
    if isinstance(a.obj, MatRF) and isinstance(b.obj, MatRF):
        return _Val(a.obj + b.obj, False)
    if isinstance(a.obj, MatRF) and isinstance(b.obj, FracElement):
        return _Val(a.obj + MatRF.scalar(b.obj, shape[0]), False)
    if isinstance(a.obj, FracElement) and isinstance(b.obj, MatRF):
        return _Val(MatRF.scalar(a.obj, shape[0]) + b.obj, False)
    left = _lift(a, shape[0]) if a.broadcast else _lift(a, 0)
    right = _lift(b, shape[0]) if b.broadcast else _lift(b, 0)
    if left.shape != right.shape:
        raise SpecSemanticError(f"cannot add {left.shape} and {right.shape} values")
    return _Val(left + right, False)


def _neg(a: _Val) -> _Val:
    return _Val(-a.obj, a.broadcast)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, src: str, params: Mapping[str, Fraction]):
        self.tokens = tokenize(src)
        self.pos = 0
        self.params = params

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        if tok.kind == "eof":
            message = f"{message}: unexpected end of input"
        raise SpecSyntaxError(message, tok.line, tok.column, tok.offset)

    def accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.pos += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            self.fail(f"expected {text!r}")

    def parse(self) -> _Val:
        value = self.expr()
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self.tok.text!r}")
        return value

    def expr(self) -> _Val:
        value = self.term()
        while True:
            if self.accept("+"):
                value = _add(value, self.term())
            elif self.accept("-"):
                value = _add(value, _neg(self.term()))
            else:
                return value

    def term(self) -> _Val:
        value = self.unary()
        while True:
            if self.accept("*"):
                value = _mul(value, self.unary())
            elif self.tok.kind == "op" and self.tok.text == "/":
                tok = self.tok
                self.pos += 1
                divisor = self.unary()
                if not isinstance(divisor.obj, FracElement):
                    raise SpecSemanticError(f"division by a non-scalar at offset {tok.offset}")
                if not divisor.obj:
                    raise SpecSemanticError(f"division by zero at offset {tok.offset}")
                value = _mul(value, _Val(1 / divisor.obj, True))
            else:
                return value

    def unary(self) -> _Val:
        if self.accept("-"):
            return _neg(self.unary())
        return self.power()

    def power(self) -> _Val:
        base = self.base()
        if not self.accept("^"):
            return base
        tok = self.tok
        if tok.kind == "op" and tok.text == "-":
            raise SpecSemanticError(f"negative exponent at line {tok.line}, column {tok.column}")
        if tok.kind != "num":
            self.fail("expected a nonnegative integer exponent")
        self.pos += 1
        k = int(tok.text)
        if isinstance(base.obj, FracElement):
            return _Val(base.obj**k, True)
        out = base
        for _ in range(k - 1):
            out = _mul(out, base)
        if k == 0:
            n = _shape(base)[0]
            return _Val(FIELD.one, True) if base.broadcast else _Val(MatRF.identity(n), False)
        return out

    def base(self) -> _Val:
        tok = self.tok
        if tok.kind == "num":
            self.pos += 1
            return _Val(FIELD(crat(int(tok.text))), True)
        if tok.kind == "name":
            self.pos += 1
            if tok.text == "x":
                return _Val(X, True)
            if tok.text == "i":
                return _Val(FIELD(crat(0, 1)), True)
            if tok.text == "dx":
                return _Val(DiffOp.dx(1), True)
            if tok.text not in self.params:
                raise SpecSemanticError(f"unknown parameter {tok.text!r} at line {tok.line}, column {tok.column}")
            return _Val(FIELD(crat(self.params[tok.text])), True)
        if self.accept("("):
            value = self.expr()
            self.expect(")")
            return value
        if tok.kind == "op" and tok.text == "[":
            return self.matrix()
        self.fail("expected a value")

    def matrix(self) -> _Val:
        self.expect("[")
        rows = [self.row()]
        while self.accept(","):
            rows.append(self.row())
        self.expect("]")
        if len({len(r) for r in rows}) != 1:
            raise SpecSemanticError("non-rectangular matrix literal")
        for row in rows:
            for v in row:
                if not v.broadcast:
                    raise SpecSemanticError("matrix entries must be scalars or scalar operators")
        if all(isinstance(v.obj, FracElement) for row in rows for v in row):
            return _Val(MatRF(tuple(tuple(v.obj for v in row) for row in rows)), False)
        return _Val(DiffOp.from_grid([[_lift(v, 1) for v in row] for row in rows]), False)

    def row(self) -> list[_Val]:
        self.expect("[")
        out = [self.expr()]
        while self.accept(","):
            out.append(self.expr())
        self.expect("]")
        return out


def _check_params(params: Mapping[str, object]) -> dict[str, Fraction]:
    out = {}
    for name, value in params.items():
        if name in RESERVED:
            raise SpecSemanticError(f"parameter name {name!r} is reserved")
        out[name] = Fraction(value)
    return out


def parse_expression(src: str, params: Mapping[str, object] | None = None):
    """Lower the source to a rational function, a MatRF or a DiffOp."""
    return _Parser(src, _check_params(params or {})).parse().obj


def parse_operator(src: str, params: Mapping[str, object] | None = None, size: int = 1) -> DiffOp:
    """Square operator of the given size; scalar-like input is lifted to size x size."""
    value = _Parser(src, _check_params(params or {})).parse()
    op = _lift(value, size) if value.broadcast else _lift(value, 0)
    if op.shape != (size, size):
        raise SpecSemanticError(f"expected a {size}x{size} operator, got {op.shape[0]}x{op.shape[1]}")
    return op


def parse_row_operator(src: str, params: Mapping[str, object] | None = None) -> DiffOp:
    value = _Parser(src, _check_params(params or {})).parse()
    op = _lift(value, 1) if value.broadcast else _lift(value, 0)
    if op.shape[0] != 1:
        raise SpecSemanticError(f"expected a row operator, got {op.shape[0]} rows")
    return op


def parse_matrix(src: str, params: Mapping[str, object] | None = None) -> MatRF:
    value = parse_expression(src, params)
    if isinstance(value, FracElement):
        return MatRF(((value,),))
    if not isinstance(value, MatRF):
        raise SpecSemanticError("expected a matrix, got an operator")
    return value


def read_source(arg: str) -> str:
    """The text of a .mop file, or the argument itself when it is inline DSL."""
    if arg.endswith(".mop"):
        return Path(arg).read_text(encoding="utf-8")
    return arg


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_crat(c) -> str:
    re_, im = real_part(c), imag_part(c)
    if not im:
        return format_rational(re_)
    im_text = {1: "i", -1: "-i"}.get(im, f"{format_rational(im)}*i")
    if not re_:
        return im_text
    sign = "" if im_text.startswith("-") else "+"
    return f"({format_rational(re_)}{sign}{im_text})"


def _format_term(c, k: int, var: str) -> str:
    if k == 0:
        return format_crat(c)
    mono = var if k == 1 else f"{var}^{k}"
    text = format_crat(c)
    if text == "1":
        return mono
    if text == "-1":
        return f"-{mono}"
    return f"{text}*{mono}"


def format_poly(coeffs, var: str = "x") -> str:
    """Descending powers from ascending coefficients."""
    parts = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if c.x or c.y:
            parts.append(_format_term(c, k, var))
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        out += p if p.startswith("-") else f"+{p}"
    return out


def format_ratfun(f: FracElement, var: str = "x") -> str:
    if not f:
        return "0"
    lc = f.denom.LC
    num = format_poly(poly_coeffs(FIELD.new(f.numer.quo_ground(lc))), var)
    den_f = FIELD.new(f.denom.quo_ground(lc))
    if den_f == FIELD.one:
        return num
    return f"({num})/({format_poly(poly_coeffs(den_f), var)})"


def format_matrix(m: MatRF | CMat, var: str = "x") -> str:
    if isinstance(m, CMat):
        cell = format_crat
    else:
        cell = lambda f: format_ratfun(f, var)
    return "[" + ",".join("[" + ",".join(cell(v) for v in row) + "]" for row in m.rows) + "]"


def format_op(d: DiffOp) -> str:
    """Lowest order first: A_0 + dx*A_1 + dx^2*A_2 ..."""
    if d.is_zero():
        return "0"
    parts = []
    for j, c in enumerate(d.coeffs):
        if c.is_zero():
            continue
        body = f"({format_ratfun(c[0, 0])})" if d.shape == (1, 1) else format_matrix(c)
        if j == 0:
            parts.append(body)
        else:
            parts.append(f"{'dx' if j == 1 else f'dx^{j}'}*{body}")
    return " + ".join(parts)


def format_eigen(lam) -> str:
    """Lambda(n) as a matrix of polynomials in n."""
    mono = lam.to_monomial()
    rows, cols = lam.shape
    cells = [[format_poly([c[i, k] for c in mono], "n") for k in range(cols)] for i in range(rows)]
    return "[" + ",".join("[" + ",".join(r) + "]" for r in cells) + "]"


def format_poly_t(coeffs) -> str:
    """A polynomial p(t) from ascending constant coefficients."""
    return format_poly([crat(c) for c in coeffs], "t")
