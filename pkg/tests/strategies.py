"""Hypothesis strategies for small linear formulas over a fixed variable pool."""

from fractions import Fraction

from hypothesis import strategies as st

from pitpn.logic import INT, REAL, LinExpr, Var, compare, conj, disj, ite, negate

REALS = [Var("x", REAL), Var("y", REAL)]
INTS = [Var("n", INT)]
POOL = REALS + INTS

small = st.fractions(min_value=-6, max_value=6, max_denominator=3)
coef = st.integers(min_value=-3, max_value=3)


@st.composite
def lin_terms(draw, allow_ite=False, depth=0):
    coeffs = {v: draw(coef) for v in POOL}
    e = LinExpr.build(coeffs, draw(small))
    if allow_ite and depth == 0 and draw(st.booleans()):
        cond = draw(atoms(allow_ite=False))
        a = draw(lin_terms(allow_ite=False, depth=1))
        b = draw(lin_terms(allow_ite=False, depth=1))
        e = e + ite(cond, a, b)
    return e


@st.composite
def atoms(draw, allow_ite=False):
    op = draw(st.sampled_from(["<=", "<", "=", ">=", ">"]))
    return compare(draw(lin_terms(allow_ite)), op, draw(lin_terms(allow_ite)))


def formulas(allow_ite=False, max_leaves=6):
    return st.recursive(
        atoms(allow_ite),
        lambda sub: st.one_of(
            st.lists(sub, min_size=2, max_size=3).map(conj),
            st.lists(sub, min_size=2, max_size=3).map(disj),
            sub.map(negate),
        ),
        max_leaves=max_leaves,
    )


@st.composite
def envs(draw):
    env = {v.name: draw(small) for v in REALS}
    env.update({v.name: Fraction(draw(st.integers(-5, 5))) for v in INTS})
    return env
