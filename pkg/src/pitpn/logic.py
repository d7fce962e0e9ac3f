"""Linear arithmetic terms and first-order formulas with if-then-else terms.

Everything is exact: coefficients and constants are ``Fraction``.  Formulas are
immutable and hashable so they can be shared freely between engines.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Union

INT = "Int"
REAL = "Real"

Number = Union[int, Fraction]


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"not an exact number: {value!r}")


def _cached_hash(self):
    h = self.__dict__.get("_h")
    if h is None:
        h = hash((type(self).__name__,) + tuple(getattr(self, f) for f in self.__dataclass_fields__))
        object.__setattr__(self, "_h", h)
    return h


@dataclass(frozen=True, order=True)
class Var:
    name: str
    sort: str = REAL

    def __post_init__(self):
        if not self.name:
            raise ValueError("variable name must be non-empty")
        if self.sort not in (INT, REAL):
            raise ValueError(f"unknown sort {self.sort}")

    def __str__(self):
        return self.name


@dataclass(frozen=True, eq=True)
class Ite:
    """``cond ? then : other`` over linear expressions."""

    cond: "Formula"
    then: "LinExpr"
    other: "LinExpr"

    def __post_init__(self):
        text = f"ite({render_formula(self.cond)}, {render_term(self.then)}, {render_term(self.other)})"
        object.__setattr__(self, "_text", text)
        object.__setattr__(self, "_hash", hash((self.cond, self.then, self.other)))

    def __hash__(self):
        return self._hash

    @property
    def sort(self) -> str:
        if self.then.sort == REAL or self.other.sort == REAL:
            return REAL
        return INT

    def __str__(self):
        return self._text


Atom = Union[Var, Ite]


def _key(atom: Atom) -> tuple:
    if isinstance(atom, Var):
        return (0, atom.name, atom.sort)
    return (1, str(atom))


@dataclass(frozen=True)
class LinExpr:
    __hash__ = _cached_hash
    """``const + sum(coef * atom)`` where atoms are variables or ITE terms."""

    terms: tuple = ()
    const: Fraction = Fraction(0)

    @staticmethod
    def build(coeffs: Mapping[Atom, Number], const: Number = 0) -> "LinExpr":
        items = [(a, as_fraction(c)) for a, c in coeffs.items() if c != 0]
        items.sort(key=lambda it: _key(it[0]))
        return LinExpr(tuple(items), as_fraction(const))

    @staticmethod
    def of(value) -> "LinExpr":
        if isinstance(value, LinExpr):
            return value
        if isinstance(value, (Var, Ite)):
            return LinExpr(((value, Fraction(1)),), Fraction(0))
        return LinExpr((), as_fraction(value))

    def coeffs(self) -> dict:
        return dict(self.terms)

    @property
    def is_const(self) -> bool:
        return not self.terms

    @property
    def sort(self) -> str:
        if self.const.denominator != 1:
            return REAL
        for atom, c in self.terms:
            if atom.sort == REAL or c.denominator != 1:
                return REAL
        return INT

    def __add__(self, other) -> "LinExpr":
        other = LinExpr.of(other)
        acc = dict(self.terms)
        for a, c in other.terms:
            acc[a] = acc.get(a, 0) + c
        return LinExpr.build(acc, self.const + other.const)

    __radd__ = __add__

    def __neg__(self) -> "LinExpr":
        return LinExpr(tuple((a, -c) for a, c in self.terms), -self.const)

    def __sub__(self, other) -> "LinExpr":
        return self + (-LinExpr.of(other))

    def __rsub__(self, other) -> "LinExpr":
        return LinExpr.of(other) - self

    def __mul__(self, k) -> "LinExpr":
        k = as_fraction(k)
        if k == 0:
            return LinExpr()
        return LinExpr(tuple((a, c * k) for a, c in self.terms), self.const * k)

    __rmul__ = __mul__

    def __str__(self):
        return render_term(self)

    def __repr__(self):
        return f"LinExpr({render_term(self)})"


Term = LinExpr


def const(value) -> LinExpr:
    return LinExpr.of(value)


def real(name: str) -> LinExpr:
    return LinExpr.of(Var(name, REAL))


def integer(name: str) -> LinExpr:
    return LinExpr.of(Var(name, INT))


def ite(cond: "Formula", then, other) -> LinExpr:
    then, other = LinExpr.of(then), LinExpr.of(other)
    if isinstance(cond, BoolConst):
        return then if cond.value else other
    if then == other:
        return then
    return LinExpr.of(Ite(cond, then, other))


# --------------------------------------------------------------------------
# formulas


@dataclass(frozen=True)
class BoolConst:
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


TRUE = BoolConst(True)
FALSE = BoolConst(False)

# Comparison atoms are normalized to ``expr OP 0`` with OP in {<=, <, =}.
OPS = ("<=", "<", "=")


@dataclass(frozen=True)
class Cmp:
    __hash__ = _cached_hash
    op: str
    expr: LinExpr

    def __str__(self):
        return render_formula(self)


@dataclass(frozen=True)
class Not:
    __hash__ = _cached_hash
    arg: "Formula"

    def __str__(self):
        return render_formula(self)


@dataclass(frozen=True)
class And:
    __hash__ = _cached_hash
    args: tuple

    def __str__(self):
        return render_formula(self)


@dataclass(frozen=True)
class Or:
    __hash__ = _cached_hash
    args: tuple

    def __str__(self):
        return render_formula(self)


@dataclass(frozen=True)
class Exists:
    __hash__ = _cached_hash
    vars: tuple  # of Var
    body: "Formula"

    def __str__(self):
        return render_formula(self)


Formula = Union[BoolConst, Cmp, Not, And, Or, Exists]


def compare(lhs, op: str, rhs) -> Formula:
    """Build ``lhs op rhs`` for op in <, <=, =, >=, >, != ; folds constants."""
    lhs, rhs = LinExpr.of(lhs), LinExpr.of(rhs)
    if op == ">=":
        return compare(rhs, "<=", lhs)
    if op == ">":
        return compare(rhs, "<", lhs)
    if op in ("!=", "distinct"):
        return negate(compare(lhs, "=", rhs))
    if op == "==":
        op = "="
    if op not in OPS:
        raise ValueError(f"unknown comparison {op}")
    e = lhs - rhs
    if e.is_const:
        c = e.const
        return TRUE if {"<=": c <= 0, "<": c < 0, "=": c == 0}[op] else FALSE
    return Cmp(op, e)


def le(a, b):
    return compare(a, "<=", b)


def lt(a, b):
    return compare(a, "<", b)


def ge(a, b):
    return compare(a, ">=", b)


def gt(a, b):
    return compare(a, ">", b)


def eq(a, b):
    return compare(a, "=", b)


def conj(*args) -> Formula:
    out = []
    for a in _flatten(args):
        if isinstance(a, And):
            out.extend(a.args)
        elif a == TRUE:
            continue
        elif a == FALSE:
            return FALSE
        else:
            out.append(a)
    out = list(dict.fromkeys(out))
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(*args) -> Formula:
    out = []
    for a in _flatten(args):
        if isinstance(a, Or):
            out.extend(a.args)
        elif a == FALSE:
            continue
        elif a == TRUE:
            return TRUE
        else:
            out.append(a)
    out = list(dict.fromkeys(out))
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def _flatten(args):
    for a in args:
        if isinstance(a, (list, tuple)) and not isinstance(a, (And, Or)):
            yield from _flatten(a)
        else:
            yield a


def negate(f: Formula) -> Formula:
    if isinstance(f, BoolConst):
        return FALSE if f.value else TRUE
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def implies(a: Formula, b: Formula) -> Formula:
    return disj(negate(a), b)


def iff(a: Formula, b: Formula) -> Formula:
    return conj(implies(a, b), implies(b, a))


def exists(variables: Iterable[Var], body: Formula) -> Formula:
    fv = free_vars(body)
    vs = tuple(sorted({v for v in variables if v in fv}))
    if not vs or isinstance(body, BoolConst):
        return body
    return Exists(vs, body)


# --------------------------------------------------------------------------
# traversal


def term_vars(t: LinExpr) -> set:
    out = set()
    for atom, _ in t.terms:
        if isinstance(atom, Var):
            out.add(atom)
        else:
            out |= free_vars(atom.cond) | term_vars(atom.then) | term_vars(atom.other)
    return out


def free_vars(f) -> set:
    if isinstance(f, LinExpr):
        return term_vars(f)
    if isinstance(f, BoolConst):
        return set()
    if isinstance(f, Cmp):
        return term_vars(f.expr)
    if isinstance(f, Not):
        return free_vars(f.arg)
    if isinstance(f, (And, Or)):
        out = set()
        for a in f.args:
            out |= free_vars(a)
        return out
    if isinstance(f, Exists):
        return free_vars(f.body) - set(f.vars)
    raise TypeError(f"not a formula: {f!r}")


def substitute(f, mapping: Mapping[Var, LinExpr]):
    """Replace free variables by linear expressions (capture is not possible
    because bound variables are never substituted)."""
    if not mapping:
        return f
    if isinstance(f, LinExpr):
        acc = LinExpr.of(f.const)
        for atom, c in f.terms:
            if isinstance(atom, Var):
                acc = acc + LinExpr.of(mapping.get(atom, atom)) * c
            else:
                acc = acc + ite(
                    substitute(atom.cond, mapping),
                    substitute(atom.then, mapping),
                    substitute(atom.other, mapping),
                ) * c
        return acc
    if isinstance(f, BoolConst):
        return f
    if isinstance(f, Cmp):
        e = substitute(f.expr, mapping)
        return compare(e, f.op, 0)
    if isinstance(f, Not):
        return negate(substitute(f.arg, mapping))
    if isinstance(f, And):
        return conj([substitute(a, mapping) for a in f.args])
    if isinstance(f, Or):
        return disj([substitute(a, mapping) for a in f.args])
    if isinstance(f, Exists):
        inner = {k: v for k, v in mapping.items() if k not in f.vars}
        return exists(f.vars, substitute(f.body, inner))
    raise TypeError(f"not a formula: {f!r}")


def rename(f, names: Mapping[str, str]):
    mapping = {}
    for v in free_vars(f):
        if v.name in names:
            mapping[v] = LinExpr.of(Var(names[v.name], v.sort))
    return substitute(f, mapping)


class EvaluationError(Exception):
    pass


def eval_term(t: LinExpr, env: Mapping[str, Fraction]) -> Fraction:
    total = t.const
    for atom, c in t.terms:
        if isinstance(atom, Var):
            if atom.name not in env:
                raise EvaluationError(f"unbound variable {atom.name}")
            total += c * as_fraction(env[atom.name])
        else:
            branch = atom.then if evaluate(atom.cond, env) else atom.other
            total += c * eval_term(branch, env)
    return total


def evaluate(f: Formula, env: Mapping[str, Fraction]) -> bool:
    """Exact evaluation of a quantifier-free formula under a total valuation."""
    if isinstance(f, BoolConst):
        return f.value
    if isinstance(f, Cmp):
        v = eval_term(f.expr, env)
        return {"<=": v <= 0, "<": v < 0, "=": v == 0}[f.op]
    if isinstance(f, Not):
        return not evaluate(f.arg, env)
    if isinstance(f, And):
        return all(evaluate(a, env) for a in f.args)
    if isinstance(f, Or):
        return any(evaluate(a, env) for a in f.args)
    if isinstance(f, Exists):
        raise EvaluationError("cannot evaluate a quantified formula")
    raise TypeError(f"not a formula: {f!r}")


def partial_eval(f: Formula, env: Mapping[str, Fraction]) -> Formula:
    """Substitute known constants and fold."""
    mapping = {}
    for v in free_vars(f):
        if v.name in env:
            mapping[v] = const(env[v.name])
    return substitute(f, mapping)


def expand_ite(f: Formula) -> Formula:
    """Case-split every ITE term away (exponential; used only in tests and
    by solvers lacking native ITE support)."""
    if isinstance(f, BoolConst):
        return f
    if isinstance(f, Cmp):
        ites = [a for a, _ in f.expr.terms if isinstance(a, Ite)]
        if not ites:
            return f
        it = ites[0]
        c = f.expr.coeffs()[it]
        rest = f.expr - LinExpr.of(it) * c
        pos = compare(rest + it.then * c, f.op, 0)
        neg = compare(rest + it.other * c, f.op, 0)
        cond = expand_ite(it.cond)
        return disj(conj(cond, expand_ite(pos)), conj(negate(cond), expand_ite(neg)))
    if isinstance(f, Not):
        return negate(expand_ite(f.arg))
    if isinstance(f, And):
        return conj([expand_ite(a) for a in f.args])
    if isinstance(f, Or):
        return disj([expand_ite(a) for a in f.args])
    if isinstance(f, Exists):
        return exists(f.vars, expand_ite(f.body))
    raise TypeError(f"not a formula: {f!r}")


def atoms_of(f: Formula) -> list:
    out = []

    def walk(g):
        if isinstance(g, Cmp):
            out.append(g)
        elif isinstance(g, Not):
            walk(g.arg)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                walk(a)
        elif isinstance(g, Exists):
            walk(g.body)

    walk(f)
    return out


def map_formula(f: Formula, fn: Callable[[Formula], Formula]) -> Formula:
    """Bottom-up rebuild applying ``fn`` to every node."""
    if isinstance(f, Not):
        return fn(negate(map_formula(f.arg, fn)))
    if isinstance(f, And):
        return fn(conj([map_formula(a, fn) for a in f.args]))
    if isinstance(f, Or):
        return fn(disj([map_formula(a, fn) for a in f.args]))
    if isinstance(f, Exists):
        return fn(exists(f.vars, map_formula(f.body, fn)))
    return fn(f)


# --------------------------------------------------------------------------
# infix rendering (human readable)


def _num(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def render_term(t: LinExpr) -> str:
    parts = []
    for atom, c in t.terms:
        name = str(atom)
        if c == 1:
            s = name
        elif c == -1:
            s = "-" + name
        else:
            s = f"{_num(c)}*{name}"
        parts.append(s)
    if t.const != 0 or not parts:
        parts.append(_num(t.const))
    out = parts[0]
    for p in parts[1:]:
        out += " - " + p[1:] if p.startswith("-") else " + " + p
    return out


def _split_cmp(f: Cmp):
    """Pick a readable orientation: variables left, constant right."""
    e = f.expr
    lhs = LinExpr(e.terms, Fraction(0))
    rhs = LinExpr.of(-e.const)
    op = f.op
    if lhs.terms and lhs.terms[0][1] < 0:
        lhs, rhs = -lhs, -rhs
        op = {"<=": ">=", "<": ">", "=": "="}[op]
    return lhs, op, rhs


def render_formula(f: Formula) -> str:
    if isinstance(f, BoolConst):
        return str(f)
    if isinstance(f, Cmp):
        lhs, op, rhs = _split_cmp(f)
        return f"{render_term(lhs)} {op} {render_term(rhs)}"
    if isinstance(f, Not):
        if isinstance(f.arg, Cmp):
            lhs, op, rhs = _split_cmp(f.arg)
            flipped = {"<=": ">", "<": ">=", ">=": "<", ">": "<=", "=": "!="}[op]
            return f"{render_term(lhs)} {flipped} {render_term(rhs)}"
        return f"not ({render_formula(f.arg)})"
    if isinstance(f, And):
        return " and ".join(_paren(a) for a in f.args)
    if isinstance(f, Or):
        return " or ".join(_paren(a) for a in f.args)
    if isinstance(f, Exists):
        vs = ", ".join(v.name for v in f.vars)
        return f"exists {vs} . ({render_formula(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


def _paren(f: Formula) -> str:
    s = render_formula(f)
    return f"({s})" if isinstance(f, (And, Or, Exists)) else s
