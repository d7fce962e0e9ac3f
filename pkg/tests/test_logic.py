from fractions import Fraction

import pytest
from hypothesis import given

from pitpn import smtlib
from pitpn.logic import (FALSE, TRUE, Exists, LinExpr, compare, conj, disj, eq, eval_term,
                         evaluate, exists, expand_ite, free_vars, ge, le, lt, negate, real, render_formula,
                         substitute)
from pitpn.syntax import SyntaxError_, parse_expr, parse_formula
from strategies import POOL, envs, formulas, lin_terms

SORTS = {v.name: v.sort for v in POOL}
NAMES = {v.name: LinExpr.of(v) for v in POOL}


def resolve(name):
    return NAMES[name]


@given(formulas(allow_ite=True))
def test_smtlib_round_trip_is_structural(f):
    assert smtlib.parse_formula(smtlib.formula(f), SORTS) == f


@given(formulas(), envs())
def test_infix_round_trip_preserves_meaning(f, env):
    text = render_formula(f)
    g = parse_formula(text, resolve)
    assert render_formula(g) == text
    assert evaluate(g, env) == evaluate(f, env)


@given(formulas(allow_ite=True), envs())
def test_expand_ite_preserves_truth(f, env):
    assert evaluate(expand_ite(f), env) == evaluate(f, env)


@given(formulas(), envs())
def test_negate_flips_truth(f, env):
    assert evaluate(negate(f), env) == (not evaluate(f, env))


@given(lin_terms(), lin_terms(), envs())
def test_linear_arithmetic_is_exact(a, b, env):
    assert eval_term(a + b, env) == eval_term(a, env) + eval_term(b, env)
    assert eval_term(a * Fraction(1, 3), env) * 3 == eval_term(a, env)


def test_constant_comparisons_fold():
    assert compare(LinExpr.of(1), "<=", LinExpr.of(2)) == TRUE
    assert compare(LinExpr.of(3), "<", LinExpr.of(2)) == FALSE
    assert conj(TRUE, FALSE) == FALSE
    assert disj(FALSE, TRUE) == TRUE


def test_exists_drops_unused_variables():
    x, a = real("x"), real("a")
    f = exists([x.terms[0][0]], le(a, 3))
    assert free_vars(f) == {a.terms[0][0]}


def test_substitute_replaces_free_variables_only():
    x, a = real("x"), real("a")
    xv = x.terms[0][0]
    f = conj(eq(x, a), exists([xv], ge(x, 0)))
    g = substitute(f, {xv: LinExpr.of(5)})
    assert free_vars(g) == {a.terms[0][0]}
    bound = [h for h in g.args if isinstance(h, Exists)]
    assert bound and xv in free_vars(bound[0].body)


def test_parser_rejects_garbage():
    with pytest.raises(SyntaxError_):
        parse_formula("x <= ", resolve)
    with pytest.raises(SyntaxError_):
        parse_expr("x * y", resolve)


def test_parser_accepts_chained_comparison():
    f = parse_formula("0 <= x < 4", resolve)
    assert evaluate(f, {"x": Fraction(0)})
    assert not evaluate(f, {"x": Fraction(4)})
    assert evaluate(lt(real("x"), 4), {"x": Fraction(3)})
