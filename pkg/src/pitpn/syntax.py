"""Infix formula syntax shared by model files, query files and the CLI.

    formula := disj ('=>' disj)*
    disj    := conj (('or' | '||') conj)*
    conj    := unary (('and' | '&&') unary)*
    unary   := ('not' | '!') unary | '(' formula ')' | 'true' | 'false'
             | call | expr CMP expr (CMP expr)*
    expr    := term (('+' | '-') term)*
    term    := factor ('*' factor)*          (one side must be constant)
    factor  := number | number '/' number | ident | call | '(' expr ')' | '-' factor

Identifiers are resolved through a callback so the same grammar serves
parameters, places, clocks and the global clock.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Callable, Optional

from .logic import (
    FALSE,
    TRUE,
    Formula,
    LinExpr,
    compare,
    conj,
    const,
    disj,
    implies,
    negate,
)


class SyntaxError_(Exception):
    """Raised for malformed model, query or formula text."""

    def __init__(self, msg, line=None):
        super().__init__(f"line {line}: {msg}" if line else msg)
        self.line = line


_TOK = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<id>k-safe\b|[A-Za-z_#][A-Za-z0-9_#.']*)"
    r"|(?P<op>\[\]|<>|/\\|\\/|<=|>=|==|!=|=>|&&|\|\||->|[-+*/()<>=!~,\[\]:;]))"
)


def tokenize(text: str) -> list:
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOK.match(text, pos)
        if not m or m.end() == pos:
            raise SyntaxError_(f"unexpected character {text[pos:pos + 10]!r}")
        pos = m.end()
        if m.group("num") is not None:
            toks.append(("num", m.group("num")))
        elif m.group("id") is not None:
            toks.append(("id", m.group("id")))
        else:
            toks.append(("op", m.group("op")))
    return toks


Resolver = Callable[[str], LinExpr]
CallHandler = Callable[[str, list], object]

CMP_OPS = ("<=", "<", "=", "==", ">=", ">", "!=")
KEYWORDS = {"and", "or", "not", "true", "false", "inf"}


class Parser:
    def __init__(self, text: str, resolve: Resolver, call: Optional[CallHandler] = None):
        self.toks = tokenize(text)
        self.i = 0
        self.resolve = resolve
        self.call = call

    # -- helpers

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else ("eof", None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def accept(self, value) -> bool:
        kind, v = self.peek()
        if kind in ("op", "id") and v == value:
            self.i += 1
            return True
        return False

    def expect(self, value):
        if not self.accept(value):
            raise SyntaxError_(f"expected {value!r}, found {self.peek()[1]!r}")

    def at_end(self) -> bool:
        return self.i >= len(self.toks)

    # -- formulas

    def formula(self) -> Formula:
        left = self.disjunction()
        while self.accept("=>"):
            right = self.disjunction()
            left = implies(left, right)
        return left

    def disjunction(self) -> Formula:
        parts = [self.conjunction()]
        while self.accept("or") or self.accept("||"):
            parts.append(self.conjunction())
        return disj(parts)

    def conjunction(self) -> Formula:
        parts = [self.unary()]
        while self.accept("and") or self.accept("&&"):
            parts.append(self.unary())
        return conj(parts)

    def unary(self) -> Formula:
        if self.accept("not") or self.accept("!"):
            return negate(self.unary())
        if self.accept("true"):
            return TRUE
        if self.accept("false"):
            return FALSE
        if self.peek() == ("op", "("):
            save = self.i
            self.take()
            try:
                f = self.formula()
                self.expect(")")
                if self.peek()[0] == "op" and self.peek()[1] in CMP_OPS + ("+", "-", "*"):
                    raise SyntaxError_("parenthesized expression")
                return f
            except SyntaxError_:
                self.i = save
        kind, v = self.peek()
        if kind == "id" and self.peek(1) == ("op", "(") and self.call is not None:
            save = self.i
            result = self._call()
            if not isinstance(result, LinExpr):
                return result
            self.i = save
        return self.comparison()

    def comparison(self) -> Formula:
        left = self.expr()
        kind, op = self.peek()
        if kind != "op" or op not in CMP_OPS:
            raise SyntaxError_(f"expected comparison, found {op!r}")
        parts = []
        while self.peek()[0] == "op" and self.peek()[1] in CMP_OPS:
            op = self.take()[1]
            right = self.expr()
            parts.append(compare(left, op, right))
            left = right
        return conj(parts)

    def _call(self):
        name = self.take()[1]
        self.expect("(")
        args = []
        if not self.accept(")"):
            while True:
                args.append(self._arg())
                if self.accept(")"):
                    break
                self.expect(",")
        return self.call(name, args)

    def _arg(self):
        """Call arguments: a number, identifier, or expression."""
        save = self.i
        try:
            return self.expr()
        except SyntaxError_:
            self.i = save
            kind, v = self.take()
            return v

    # -- arithmetic

    def expr(self) -> LinExpr:
        acc = self.term()
        while True:
            if self.accept("+"):
                acc = acc + self.term()
            elif self.accept("-"):
                acc = acc - self.term()
            else:
                return acc

    def term(self) -> LinExpr:
        acc = self.factor()
        while self.accept("*"):
            rhs = self.factor()
            if acc.is_const:
                acc = rhs * acc.const
            elif rhs.is_const:
                acc = acc * rhs.const
            else:
                raise SyntaxError_("nonlinear product")
        return acc

    def factor(self) -> LinExpr:
        kind, v = self.peek()
        if kind == "op" and v == "-":
            self.take()
            return -self.factor()
        if kind == "op" and v == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        if kind == "num":
            self.take()
            n = Fraction(v)
            if self.peek() == ("op", "/") and self.peek(1)[0] == "num":
                self.take()
                n = n / Fraction(self.take()[1])
            return const(n)
        if kind == "id" and v not in KEYWORDS:
            if self.peek(1) == ("op", "(") and self.call is not None:
                result = self._call()
                if isinstance(result, LinExpr):
                    return result
                raise SyntaxError_(f"{v}(...) is not a number")
            self.take()
            return self.resolve(v)
        raise SyntaxError_(f"unexpected token {v!r}")


def parse_formula(text: str, resolve: Resolver, call: Optional[CallHandler] = None) -> Formula:
    p = Parser(text, resolve, call)
    f = p.formula()
    if not p.at_end():
        raise SyntaxError_(f"trailing input at {p.peek()[1]!r}")
    return f


def parse_expr(text: str, resolve: Resolver, call: Optional[CallHandler] = None) -> LinExpr:
    p = Parser(text, resolve, call)
    e = p.expr()
    if not p.at_end():
        raise SyntaxError_(f"trailing input at {p.peek()[1]!r}")
    return e
