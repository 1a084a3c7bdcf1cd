import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from hbar_miura.skew import (DERIVATION, HB, SHIFT, U, NotAPolynomial, SkewPoly, TwistMismatch, baxter_check,
                             baxter_s, classical_miura_check, miura_factor_check, parse_q, verify_baxter)

small = st.integers(-3, 3)
coeff = st.tuples(small, small, st.integers(0, 2)).map(lambda t: sympy.Integer(t[0]) + t[1] * U ** t[2])
twists = st.sampled_from([SHIFT, DERIVATION])


def poly(cs, twist):
    return SkewPoly(tuple(cs), twist)


polys = st.lists(coeff, min_size=1, max_size=3)


def test_commutation_rules():
    D = SkewPoly.generator()
    assert D * U == SkewPoly((0, U - HB))
    d = SkewPoly.generator(DERIVATION)
    assert d * U == SkewPoly((1, U), DERIVATION)


def test_twist_mismatch():
    with pytest.raises(TwistMismatch):
        SkewPoly.generator() * SkewPoly.generator(DERIVATION)


@given(twists, polys, polys, polys)
def test_associativity(tw, a, b, c):
    A, B, C = poly(a, tw), poly(b, tw), poly(c, tw)
    assert (A * B) * C == A * (B * C)


@given(twists, polys, polys)
def test_distributivity_and_action(tw, a, b):
    A, B = poly(a, tw), poly(b, tw)
    f = U**3 + 2 * U
    assert sympy.simplify((A * B).apply(f) - A.apply(B.apply(f))) == 0
    assert (A + B) * A == A * A + B * A


def test_miura_factorization():
    rep = miura_factor_check()
    assert rep.passed and len(rep.details["coefficients"]) == 3


def test_classical_miura():
    assert classical_miura_check().passed


def test_baxter_square():
    assert sympy.simplify(baxter_s(U**2) - (2 * HB**2 + 2 * U**2) / U**2) == 0
    assert baxter_check("u**2").passed
    assert baxter_check("3*u**4 - u/2 + 7", hbar=sympy.Rational(2, 3)).passed


def test_baxter_wrong_s_is_detected():
    op = SkewPoly((1, -(2 + 0 * U), 1))
    assert op.apply((U + HB) ** 2) != 0


def test_parse_q_rejects_non_polynomials():
    for text in ("1/u", "sin(u)", "0", "u +"):
        with pytest.raises(NotAPolynomial):
            parse_q(text)
    assert parse_q("u^2 + 1/3").degree() == 2


def test_random_baxter_suite():
    reps = verify_baxter(count=10, seed=3)
    assert all(r.passed for r in reps)
