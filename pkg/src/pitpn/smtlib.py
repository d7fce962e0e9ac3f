"""SMT-LIB2 text: printing formulas and parsing solver output back."""

from __future__ import annotations

import re
from fractions import Fraction

from .logic import (
    INT,
    REAL,
    And,
    BoolConst,
    Cmp,
    Exists,
    FALSE,
    Formula,
    Ite,
    LinExpr,
    Not,
    Or,
    TRUE,
    Var,
    compare,
    conj,
    const,
    disj,
    exists,
    implies,
    iff,
    ite,
    negate,
)

_SIMPLE = re.compile(r"^[A-Za-z~!@$%^&*_+=<>.?/][A-Za-z0-9~!@$%^&*_\-+=<>.?/]*$")


def symbol(name: str) -> str:
    if _SIMPLE.match(name) and name not in ("true", "false", "and", "or", "not", "ite"):
        return name
    if "|" in name or "\\" in name:
        raise ValueError(f"name cannot be quoted in SMT-LIB: {name!r}")
    return f"|{name}|"


def number(c: Fraction, sort: str = REAL) -> str:
    def nat(n: int) -> str:
        return f"{n}.0" if sort == REAL else str(n)

    if c.denominator == 1:
        n = c.numerator
        return nat(n) if n >= 0 else f"(- {nat(-n)})"
    body = f"(/ {nat(abs(c.numerator))} {nat(c.denominator)})"
    return body if c > 0 else f"(- {body})"


def term(t: LinExpr) -> str:
    sort = t.sort
    parts = []
    for atom, c in t.terms:
        if isinstance(atom, Var):
            a = symbol(atom.name)
            if sort == REAL and atom.sort == INT:
                a = f"(to_real {a})"
        else:
            a = _ite(atom, sort)
        parts.append(a if c == 1 else f"(* {number(c, sort)} {a})")
    if t.const != 0 or not parts:
        parts.append(number(t.const, sort))
    return parts[0] if len(parts) == 1 else "(+ " + " ".join(parts) + ")"


def _ite(atom: Ite, sort: str) -> str:
    then, other = term(atom.then), term(atom.other)
    if sort == REAL:
        if atom.then.sort == INT:
            then = f"(to_real {then})"
        if atom.other.sort == INT:
            other = f"(to_real {other})"
    return f"(ite {formula(atom.cond)} {then} {other})"


def formula(f: Formula) -> str:
    if isinstance(f, BoolConst):
        return "true" if f.value else "false"
    if isinstance(f, Cmp):
        return f"({f.op} {term(f.expr)} {number(Fraction(0), f.expr.sort)})"
    if isinstance(f, Not):
        return f"(not {formula(f.arg)})"
    if isinstance(f, And):
        return "(and " + " ".join(formula(a) for a in f.args) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(formula(a) for a in f.args) + ")"
    if isinstance(f, Exists):
        binders = " ".join(f"({symbol(v.name)} {v.sort})" for v in f.vars)
        return f"(exists ({binders}) {formula(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


# --------------------------------------------------------------------------
# s-expressions


class ParseError(Exception):
    pass


_TOKEN = re.compile(r'\s*(?:(;[^\n]*)|(\()|(\))|(\|[^|]*\|)|("(?:[^"]|"")*")|([^\s()|";]+))')


def tokenize(text: str):
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                return
            raise ParseError(f"bad token at {text[pos:pos + 20]!r}")
        pos = m.end()
        if m.group(1) is not None:
            continue
        tok = m.group(2) or m.group(3) or m.group(4) or m.group(5) or m.group(6)
        if tok:
            yield tok


def parse_sexprs(text: str) -> list:
    stack = [[]]
    for tok in tokenize(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise ParseError("unbalanced '('")
    return stack[0]


def paren_balance(text: str) -> int:
    """Open-paren depth at the end of ``text``; a quoted symbol or string
    still open at the end counts as one extra level (incomplete input)."""
    depth = 0
    try:
        for tok in tokenize(text):
            if tok == "(":
                depth += 1
            elif tok == ")":
                depth -= 1
    except ParseError:
        return depth + 1
    return depth


# --------------------------------------------------------------------------
# reading formulas back


def _unquote(tok: str) -> str:
    return tok[1:-1] if tok.startswith("|") else tok


def parse_number(tok: str) -> Fraction | None:
    try:
        if re.fullmatch(r"\d+(\.\d+)?", tok):
            return Fraction(tok)
    except ValueError:
        return None
    return None


class FormulaReader:
    """Convert solver s-expressions to Formula / LinExpr.

    ``sorts`` maps known variable names to their sort; unknown names default
    to Real.
    """

    def __init__(self, sorts: dict[str, str] | None = None):
        self.sorts = dict(sorts or {})

    def var(self, name: str, bound: dict) -> LinExpr:
        if name in bound:
            return bound[name]
        return LinExpr.of(Var(name, self.sorts.get(name, REAL)))

    def read_term(self, s, bound=None) -> LinExpr:
        bound = bound or {}
        if isinstance(s, str):
            n = parse_number(s)
            if n is not None:
                return const(n)
            name = _unquote(s)
            if name in bound and not isinstance(bound[name], LinExpr):
                raise ParseError(f"boolean {name} used as term")
            return self.var(name, bound)
        if not s:
            raise ParseError("empty term")
        head, args = s[0], s[1:]
        if head == "+":
            acc = const(0)
            for a in args:
                acc = acc + self.read_term(a, bound)
            return acc
        if head == "-":
            if len(args) == 1:
                return -self.read_term(args[0], bound)
            acc = self.read_term(args[0], bound)
            for a in args[1:]:
                acc = acc - self.read_term(a, bound)
            return acc
        if head == "*":
            vals = [self.read_term(a, bound) for a in args]
            acc = const(1)
            for v in vals:
                if v.is_const:
                    acc = acc * v.const
                elif acc.is_const:
                    acc = v * acc.const
                else:
                    raise ParseError("nonlinear product")
            return acc
        if head == "/":
            num = self.read_term(args[0], bound)
            den = self.read_term(args[1], bound)
            if not den.is_const or den.const == 0:
                raise ParseError("non-constant division")
            return num * (1 / den.const)
        if head in ("to_real", "to_int"):
            return self.read_term(args[0], bound)
        if head == "ite":
            return ite(self.read_formula(args[0], bound), self.read_term(args[1], bound), self.read_term(args[2], bound))
        if head == "let":
            return self.read_term(args[1], self._let(args[0], bound))
        raise ParseError(f"unsupported term head {head!r}")

    def _let(self, bindings, bound):
        inner = dict(bound)
        for name, value in bindings:
            name = _unquote(name)
            try:
                inner[name] = self.read_term(value, bound)
            except ParseError:
                inner[name] = self.read_formula(value, bound)
        return inner

    def read_formula(self, s, bound=None) -> Formula:
        bound = bound or {}
        if isinstance(s, str):
            if s == "true":
                return TRUE
            if s == "false":
                return FALSE
            name = _unquote(s)
            if name in bound and not isinstance(bound[name], LinExpr):
                return bound[name]
            raise ParseError(f"unexpected atom {s!r} in formula")
        head, args = s[0], s[1:]
        if head == "and":
            return conj([self.read_formula(a, bound) for a in args])
        if head == "or":
            return disj([self.read_formula(a, bound) for a in args])
        if head == "not":
            return negate(self.read_formula(args[0], bound))
        if head == "=>":
            return implies(self.read_formula(args[0], bound), self.read_formula(args[1], bound))
        if head in ("<=", "<", ">=", ">", "=", "distinct"):
            if head == "=":
                try:
                    terms = [self.read_term(a, bound) for a in args]
                except ParseError:
                    fs = [self.read_formula(a, bound) for a in args]
                    return conj([iff(fs[0], f) for f in fs[1:]])
            else:
                terms = [self.read_term(a, bound) for a in args]
            return conj([compare(terms[i], head, terms[i + 1]) for i in range(len(terms) - 1)])
        if head == "ite":
            c = self.read_formula(args[0], bound)
            a = self.read_formula(args[1], bound)
            b = self.read_formula(args[2], bound)
            return disj(conj(c, a), conj(negate(c), b))
        if head == "let":
            return self.read_formula(args[1], self._let(args[0], bound))
        if head == "exists":
            vs = []
            inner = dict(bound)
            for name, sort in args[0]:
                v = Var(_unquote(name), sort)
                vs.append(v)
                inner.pop(v.name, None)
                self.sorts.setdefault(v.name, sort)
            return exists(vs, self.read_formula(args[1], inner))
        raise ParseError(f"unsupported formula head {head!r}")


def parse_formula(text: str, sorts: dict[str, str] | None = None) -> Formula:
    exprs = parse_sexprs(text)
    if len(exprs) != 1:
        raise ParseError("expected exactly one formula")
    return FormulaReader(sorts).read_formula(exprs[0])


def declare(v: Var) -> str:
    return f"(declare-const {symbol(v.name)} {v.sort})"
