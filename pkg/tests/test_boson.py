from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hbar_miura.boson import (BOSONS, NonScalarExchange, VertexOperator, VOSum, contraction, exchange_factor,
                              normal_order_ef, pairing)
from hbar_miura.exact import KCoeff
from hbar_miura.factors import FactorProduct
from hbar_miura.fock import FockOperator, FockState, product_series
from hbar_miura.wakimoto import TWO_OVER_KAPPA, build, charge_shift

SCALAR_CURRENTS = ("e", "f", "h_plus", "h_minus", "k1_plus", "k2_plus", "k1_minus", "k2_minus")
weights = st.fractions(min_value=-3, max_value=3, max_denominator=4).filter(bool)
offsets = st.fractions(min_value=-3, max_value=3, max_denominator=4)


def test_pairing_constants():
    assert pairing("lambda") == KCoeff.monomial(Fraction(1, 2), 1)
    assert pairing("b") == KCoeff.of(-1)
    assert pairing("c") == KCoeff.of(1)


def test_legs_on_different_bosons_do_not_contract():
    px, pu = contraction(VertexOperator.plus("b", 1, 0), VertexOperator.minus("c", 1, 0))
    assert px.is_one() and pu.is_one()


def test_b_boson_contraction_against_mode_computation():
    # engine: e^{b+(u)} e^{b-(v)} = u/(u-v) :...:, i.e. sum_n (v/u)^n on the vacuum
    px, pu = contraction(VertexOperator.plus("b", 1, 0), VertexOperator.minus("b", 1, 0))
    assert px.equals(FactorProduct.linear(0, -1)) and pu.equals(FactorProduct.linear(0))
    A = FockOperator(VertexOperator.plus("b", 1, 0), 1)
    B = FockOperator(VertexOperator.minus("b", 1, 0), 1)
    vac = FockState.vacuum()
    table = product_series(A, B, vac, 0, -6, 0, margin=8)
    for n in range(6):
        assert table[(-n, n)].get(vac) == 1


def test_lambda_contraction_exponent_is_integral():
    px, pu = contraction(VertexOperator.full("lambda", 1, 0), VertexOperator.minus("lambda", TWO_OVER_KAPPA, 0))
    assert px.exponents_integral() and pu.exponents_integral()
    (_, e), = px.factors.finite
    assert e == KCoeff.of(1)


def test_named_exchange_factors():
    x = lambda s: FactorProduct.linear(s)  # noqa: E731
    assert exchange_factor(build("e"), build("e")).equals(x(1) / x(-1))
    assert exchange_factor(build("h_plus"), build("h_plus")).is_one()
    with pytest.raises(NonScalarExchange):
        exchange_factor(build("e"), build("f"))


@pytest.mark.parametrize("a", SCALAR_CURRENTS)
@pytest.mark.parametrize("b", SCALAR_CURRENTS)
def test_exchange_reciprocity(a, b):
    try:
        r = exchange_factor(build(a), build(b))
    except NonScalarExchange:
        pytest.skip("delta-supported pair")
    s = exchange_factor(build(b), build(a))
    assert (r * s.negated()).is_one()


@given(st.sampled_from(BOSONS), weights, weights, weights, offsets, offsets)
def test_contraction_exponent_additivity(X, g1, g1b, g2, B, A):
    c = lambda g: contraction(VertexOperator.plus(X, g, B), VertexOperator.minus(X, g2, A))  # noqa: E731
    px, pu = c(g1 + g1b)
    qx, qu = c(g1)
    rx, ru = c(g1b)
    assert px.equals(qx * rx) and pu.equals(qu * ru)


@given(st.sampled_from(BOSONS), weights, offsets, offsets)
def test_one_sided_inverse(X, g, A, B):
    v = VertexOperator.plus(X, g, B).legs_concat(VertexOperator.zero_power(X, g, B))
    assert v.legs_concat(v.inverse()).key() == VertexOperator.identity().key()
    w = VertexOperator.minus(X, g, A)
    assert w.legs_concat(w.inverse()).key() == VertexOperator.identity().key()


def test_normal_ordering_with_zero_f_is_zero():
    assert normal_order_ef(build("e"), VOSum()).is_zero()


def test_vosum_linearity():
    e = build("e")
    assert (e + e - e.scale(2)).is_zero()
    assert len(e.collect()) == 2


def test_charge_shift_table():
    assert charge_shift(build("e"), 1) == (0, -1, -1)
    assert charge_shift(build("f"), 1) == (0, 1, 1)
    for name in ("h_plus", "h_minus", "k1_plus", "k2_minus", "lambda_cap"):
        assert charge_shift(build(name), 1) == (0, 0, 0)
