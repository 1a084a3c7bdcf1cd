import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hbar_miura.factors import (FactorProduct, GammaRatio, UnbalancedGamma, UnbalancedProduct, gamma_to_product,
                                rho_gamma, rho_minus, rho_plus)

offsets = st.fractions(min_value=0, max_value=3, max_denominator=4)
steps = st.sampled_from([Fraction(1), Fraction(2), Fraction(1, 2), Fraction(-1), Fraction(-2)])
exps = st.integers(1, 2)


@st.composite
def balanced_products(draw):
    """Quadruples b1 - b2 - b3 + b4 with b1 + b4 = b2 + b3 balance every step class."""
    p = FactorProduct.const(draw(st.sampled_from([1, 2, Fraction(-1, 3)])))
    for _ in range(draw(st.integers(1, 2))):
        step, e = draw(steps), draw(exps)
        b1, b2, b3 = draw(offsets), draw(offsets), draw(offsets)
        b4 = b2 + b3 - b1
        for b, sign in ((b1, 1), (b2, -1), (b3, -1), (b4, 1)):
            p = p * FactorProduct.family(b, step, sign * e)
    for s in draw(st.lists(offsets, max_size=2)):
        p = p * FactorProduct.linear(s, draw(st.sampled_from([-1, 1])))
    return p


@st.composite
def balanced_gammas(draw):
    b1, b2, b3 = draw(offsets), draw(offsets), draw(offsets)
    e = draw(exps)
    scale = draw(st.sampled_from([Fraction(1), Fraction(1, 2)]))
    return GammaRatio(((b1 + 1, e), (b2 + 1, -e), (b3 + 1, -e), (b2 + b3 - b1 + 1, e)), scale)


def test_empty_product_is_one():
    assert FactorProduct.one().is_one()
    assert FactorProduct.one().eval_truncated(0.3) == 1.0


def test_telescoping_families_collapse_to_a_finite_factor():
    p = FactorProduct.family(1, 2, 1) * FactorProduct.family(3, 2, -1)
    assert p.normalize() == FactorProduct.linear(1).normalize()
    assert p.normalize().eval_truncated(2, 1, 0, 50) == pytest.approx(3.0, abs=1e-12)


def test_gamma_functional_equation_twice():
    # Gamma(x/h + 2)/Gamma(x/h) = h^-2 x (x + h)
    p = gamma_to_product(GammaRatio(((2, 1), (0, -1))))
    assert p.equals(FactorProduct(1, FactorProduct.ratio([0, 1], []).factors, -2))


def test_gamma_half_ratio_matches_lgamma():
    g = GammaRatio(((Fraction(1, 2), 2), (0, -1), (1, -1)))
    p = gamma_to_product(g)
    assert not p.factors.finite
    assert p.eval_truncated(0.7, L=10_000, tail=True) == pytest.approx(g.value(0.7), rel=1e-8)


def test_rho_at_minus_hbar_is_two_over_pi():
    exact = math.gamma(1) ** 2 / (math.gamma(0.5) * math.gamma(1.5))
    assert rho_gamma(+1).value(-1.0) == pytest.approx(2 / math.pi, rel=1e-14)
    assert abs(rho_plus().eval_truncated(-1, 1, 0, 10_000) - exact) < 1e-4


def test_rho_unitarity():
    assert (rho_plus() * rho_minus().negated()).is_one()


def test_unbalanced_inputs_are_rejected():
    with pytest.raises(UnbalancedGamma):
        gamma_to_product(GammaRatio(((0, 1),)))
    with pytest.raises(UnbalancedProduct):
        FactorProduct.family(0, 1, 1).eval_truncated(0.5)


@given(balanced_products())
def test_normalize_is_idempotent(p):
    n = p.normalize()
    assert n.normalize() == n


@given(balanced_products(), balanced_products())
def test_normalize_is_multiplicative(p, q):
    assert (p * q).normalize() == (p.normalize() * q.normalize()).normalize()


@given(balanced_products())
def test_balanced_products_stay_balanced(p):
    assert p.is_balanced()
    assert p.normalize().is_balanced()


@given(balanced_products())
def test_normalize_preserves_numeric_value(p):
    a = p.eval_truncated(0.37, L=10_000, tail=True)
    b = p.normalize().eval_truncated(0.37, L=10_000, tail=True)
    assert a == pytest.approx(b, rel=1e-6, abs=1e-9)


@given(balanced_gammas())
def test_gamma_to_product_matches_lgamma(g):
    p = gamma_to_product(g)
    assert p.eval_truncated(0.7, L=10_000, tail=True) == pytest.approx(g.value(0.7), rel=1e-6)


@given(balanced_products())
def test_inverse_cancels(p):
    assert (p * p.inverse()).is_one()
    assert p.equals(p.normalize())
