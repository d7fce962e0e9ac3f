from fractions import Fraction

import pytest
from hypothesis import given, settings

from pitpn.logic import (INT, TRUE, LinExpr, Var, conj, evaluate, exists, expand_ite,
                         free_vars, ge, gt, le, lt, real)
from pitpn.smt import QE_TACTIC, Unsupported, model_satisfies, open_solver
from strategies import formulas

a, b, x = real("a"), real("b"), real("x")
XV = x.terms[0][0]


@settings(max_examples=40)
@given(formulas(allow_ite=True))
def test_models_satisfy_formula(solver, f):
    r = solver.check_sat(f)
    if r.is_sat:
        env = {v.name: Fraction(0) for v in free_vars(f)}
        env.update(r.model)
        assert model_satisfies(env, f)


@settings(max_examples=30)
@given(formulas(allow_ite=True))
def test_ite_expansion_is_equisatisfiable(solver, f):
    assert solver.check_sat(f, want_model=False).is_sat == \
        solver.check_sat(expand_ite(f), want_model=False).is_sat


def test_sat_unsat_valid(solver):
    assert solver.check_sat(conj(ge(a, 1), le(a, 2))).is_sat
    assert solver.check_sat(conj(ge(a, 3), le(a, 2))).is_unsat
    assert solver.check_valid(le(a, a + 1)) is True
    assert solver.check_valid(le(a, 1)) is False


def test_equiv_and_entails(solver):
    assert solver.equiv(gt(a, 4), lt(-a, -4)) is True
    assert solver.entails(ge(a, 4), ge(a, 0)) is True
    assert solver.entails(ge(a, 0), ge(a, 4)) is False


def test_qe_single_bound_variable(solver):
    f = solver.qe(exists([XV], conj(le(x, a), ge(x, 0))))
    assert XV not in free_vars(f)
    assert solver.equiv(f, ge(a, 0)) is True


def test_qe_interval_between_parameters(solver):
    f = solver.qe(exists([XV], conj(le(a, x), le(x, b))))
    assert solver.equiv(f, le(a, b)) is True


def test_qe_over_integers(solver):
    n, k = Var("n", INT), LinExpr.of(Var("k", INT))
    nn = LinExpr.of(n)
    f = solver.qe(exists([n], conj(le(k, nn), le(nn, k + 1), ge(nn, 3))))
    assert solver.equiv(f, ge(k, 2)) is True


def test_push_pop_keeps_session_clean(solver):
    solver.push()
    solver.assert_(le(a, 0))
    solver.assert_(ge(a, 1))
    assert solver.check(want_model=False).is_unsat
    solver.pop()
    assert solver.check_sat(TRUE, want_model=False).is_sat


def test_qf_adapter_refuses_quantifiers():
    s = open_solver(kind="qf")
    try:
        assert not s.supports_quantifiers
        with pytest.raises(Unsupported):
            s.qe(exists([XV], le(x, a)))
        assert s.check_sat(le(a, 1)).is_sat
    finally:
        s.close()


def test_tactic_is_recorded():
    assert "qe" in QE_TACTIC


def test_model_soundness_on_rationals(solver):
    f = conj(le(3 * a, 1), gt(3 * a, 0))
    r = solver.check_sat(f)
    assert r.is_sat
    assert evaluate(f, r.model)
    assert 0 < r.model["a"] <= Fraction(1, 3)
