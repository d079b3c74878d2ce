"""Recursive-descent parser for the operator notation used on the command line.

Weyl context::

    D            d/dz
    z            multiplication by z
    A B, A*B     composition
    [A, B]       commutator
    3, 3/2       rational scalars

Jets context::

    p3, t2               jet and time coordinates
    Dx, Dt2, T, V(m,j)   operators, applied with parentheses: V(1,1)(p0)
    Dx T(p0)             operators compose right to left
    [Dx, T](p0)          commutator of operators

Both contexts accept ``+``, ``-``, ``^`` with an integer exponent and
parentheses.  Errors carry the byte offset where parsing failed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from ..errors import ExprSyntaxError, UnknownSymbol
from ..jets import JetExpression, apply_T, apply_V, d_t, total_x
from ..rings import Polynomial, p, t
from ..weyl import D as WEYL_D, Z as WEYL_Z, WeylElement, weyl_commutator
from ..window import TruncationWindow

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z]*\d*)|(.))")


@dataclass
class Token:
    kind: str  # "int", "name", "op", "eof"
    text: str
    offset: int


def tokenize(src: str, context: str) -> list[Token]:
    out = []
    pos = 0
    data = src.encode("utf-8")
    # offsets are byte offsets; the grammar is ASCII so char and byte offsets agree
    # until the first non-ASCII character, which is rejected anyway
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m.group(0).strip() == "":
            break
        start = m.start(m.lastindex)
        text = m.group(m.lastindex)
        if m.lastindex == 1:
            out.append(Token("int", text, start))
        elif m.lastindex == 2:
            if context == "weyl":
                # single letters so that ``zD`` reads as z . D
                for i, ch in enumerate(text):
                    if ch.isdigit():
                        raise ExprSyntaxError(f"unexpected digit in {text!r}", start + i)
                    out.append(Token("name", ch, start + i))
            else:
                out.append(Token("name", text, start))
        else:
            if not text.isascii():
                raise ExprSyntaxError(f"unexpected character {text!r}", len(src[:start].encode()))
            if text not in "+-*^()[],/":
                raise ExprSyntaxError(f"unexpected character {text!r}", start)
            out.append(Token("op", text, start))
        pos = m.end()
    out.append(Token("eof", "", len(data)))
    return out


class _Parser:
    def __init__(self, src: str, context: str, window: TruncationWindow | None):
        if not src.strip():
            raise ExprSyntaxError("empty expression", 0)
        self.src = src
        self.context = context
        self.window = window or TruncationWindow()
        self.tokens = tokenize(src, context)
        self.i = 0

    # -- token helpers -------------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            what = "end of input" if self.tok.kind == "eof" else repr(self.tok.text)
            raise ExprSyntaxError(f"expected {text!r}, found {what}", self.tok.offset)
        return self.advance()

    def expect_int(self) -> int:
        if self.tok.kind != "int":
            what = "end of input" if self.tok.kind == "eof" else repr(self.tok.text)
            raise ExprSyntaxError(f"expected an integer, found {what}", self.tok.offset)
        return int(self.advance().text)

    # -- values ----------------------------------------------------------------
    def scalar(self, c):
        if self.context == "weyl":
            return WeylElement.scalar(c)
        return JetExpression.of(Polynomial.const(c), self.window)

    def mul(self, a, b):
        return a * b

    # -- grammar ---------------------------------------------------------------
    def parse(self):
        value = self.expr()
        if self.tok.kind != "eof":
            raise ExprSyntaxError(f"unexpected {self.tok.text!r}", self.tok.offset)
        return value

    def expr(self):
        if self.at("-"):
            self.advance()
            value = -self.term()
        else:
            value = self.term()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def _starts_factor(self) -> bool:
        tok = self.tok
        if tok.kind in ("int", "name"):
            return True
        return tok.kind == "op" and tok.text in "(["

    def term(self):
        value = self.factor()
        while True:
            if self.at("*"):
                self.advance()
                value = self.mul(value, self.factor())
            elif self._starts_factor():
                value = self.mul(value, self.factor())
            else:
                return value

    def factor(self):
        value = self.primary()
        if self.at("^"):
            self.advance()
            n = self.expect_int()
            value = value ** n
        return value

    def number(self):
        num = int(self.advance().text)
        if self.at("/"):
            self.advance()
            den = self.expect_int()
            if den == 0:
                raise ExprSyntaxError("zero denominator", self.tokens[self.i - 1].offset)
            return Fraction(num, den)
        return num

    def primary(self):
        tok = self.tok
        if tok.kind == "int":
            return self.scalar(self.number())
        if self.at("("):
            self.advance()
            value = self.expr()
            self.expect(")")
            return value
        if self.context == "weyl":
            return self.weyl_primary()
        return self.jets_primary()

    def weyl_primary(self):
        tok = self.tok
        if self.at("["):
            self.advance()
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect("]")
            return weyl_commutator(a, b)
        if tok.kind == "name":
            self.advance()
            if tok.text == "D":
                return WEYL_D
            if tok.text == "z":
                return WEYL_Z
            raise UnknownSymbol(f"unknown symbol {tok.text!r} at offset {tok.offset}", tok.offset)
        what = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ExprSyntaxError(f"expected an operand, found {what}", tok.offset)

    # jets: coordinates, or an operator sequence applied to a parenthesized argument
    def jets_primary(self):
        tok = self.tok
        if tok.kind == "name" and re.fullmatch(r"[pt]\d+", tok.text):
            self.advance()
            k = int(tok.text[1:])
            gen = p(k) if tok.text[0] == "p" else t(k)
            return JetExpression.of(gen, self.window)
        if tok.kind == "name" or self.at("["):
            ops = [self.operator()]
            while self.tok.kind == "name" or self.at("["):
                ops.append(self.operator())
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            for op in reversed(ops):
                arg = op(arg)
            return arg
        what = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ExprSyntaxError(f"expected an operand, found {what}", tok.offset)

    def operator(self):
        tok = self.tok
        if self.at("["):
            self.advance()
            a = self.operator_sequence()
            self.expect(",")
            b = self.operator_sequence()
            self.expect("]")
            return lambda e: a(b(e)) - b(a(e))
        self.advance()
        name = tok.text
        if name == "Dx":
            return total_x
        if name == "T":
            return apply_T
        m = re.fullmatch(r"Dt(\d+)", name)
        if m:
            i = int(m.group(1))
            if i < 1:
                raise UnknownSymbol(f"flow index must be >= 1 in {name!r}", tok.offset)
            return lambda e: d_t(i, e)
        if name == "V":
            self.expect("(")
            mm = self.expect_int()
            self.expect(",")
            jj = self.expect_int()
            self.expect(")")
            return lambda e: apply_V(mm, jj, e)
        raise UnknownSymbol(f"unknown symbol {name!r} at offset {tok.offset}", tok.offset)

    def operator_sequence(self):
        ops = [self.operator()]
        while self.tok.kind == "name" or self.at("["):
            ops.append(self.operator())

        def composed(e):
            for op in reversed(ops):
                e = op(e)
            return e

        return composed


def parse_expression(src: str, context: str = "weyl", window: TruncationWindow | None = None):
    """Parse ``src`` into a :class:`WeylElement` or a :class:`JetExpression`."""
    if context not in ("weyl", "jets"):
        raise ValueError(f"unknown context {context!r}")
    return _Parser(src, context, window).parse()
