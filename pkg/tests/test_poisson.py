import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hbar_miura.poisson import (UV, VU, A_plus, B_minus, Lambda, Lambda_minus, Lambda_plus, delta_function,
                                digamma_log_derivative, evaluate, jacobiator, pbracket, random_field, rho_bracket,
                                rho_half_bracket, s_bracket, verify_jacobi, verify_s_bracket)

fields = st.integers(0, 10_000).map(lambda seed: random_field(random.Random(seed)))


def test_positive_modes_commute():
    assert pbracket(A_plus(), A_plus(1)).is_zero()


def test_A_plus_B_minus():
    sf = pbracket(A_plus(), B_minus(), order=8, hbar=Fraction(1, 3))
    want = {(-n, n - 1): Fraction(1, 3) for n in range(1, 9)}
    assert sf.parts[UV] == want and not sf.parts[VU]


def test_lambda_plus_minus_is_rho_log_derivative():
    for hbar in (Fraction(1), Fraction(2, 3)):
        got = pbracket(Lambda_plus(), Lambda_minus(), 10, hbar)
        want = rho_half_bracket(10, hbar)
        assert (got - want).is_zero()


def test_full_lambda_bracket():
    assert (pbracket(Lambda(), Lambda(), 10) - rho_bracket(10)).is_zero()


def test_delta_convention():
    d = delta_function(0, 1, 6)
    # delta(u - v) = sum over n + m = -1 of u^n v^m
    assert all(c == 1 for c in d.parts[UV].values()) and all(c == 1 for c in d.parts[VU].values())
    assert set(d.parts[UV]) == {(-m - 1, m) for m in range(6)}
    assert set(d.parts[VU]) == {(m, -m - 1) for m in range(6)}


@pytest.mark.parametrize("x", [-40.3, -25.5, -12.5])
def test_rho_series_against_digamma(x):
    series = rho_bracket(14).parts[UV]
    # asymptotic in 1/u: valid away from the poles of rho on the positive axis
    assert evaluate(series, x + 0.3, 0.3) == pytest.approx(-digamma_log_derivative(x), rel=1e-6, abs=1e-8)


def test_s_bracket_derived_signs():
    rep = verify_s_bracket(12)
    assert rep.passed, rep.residual
    assert rep.details["delta atoms"] == {Fraction(1): Fraction(-1), Fraction(-1): Fraction(1)}
    assert verify_s_bracket(8, Fraction(2, 3)).passed


def test_s_bracket_printed_signs_are_detected():
    assert not verify_s_bracket(8, signs="printed").passed


def test_s_bracket_non_scalar_atoms_cancel():
    sb = s_bracket(8)
    assert not sb.residual
    assert set(sb.deltas) == {(Fraction(1), frozenset()), (Fraction(-1), frozenset())}


@given(fields, fields)
def test_antisymmetry(F, G):
    assert (pbracket(F, G, 8) + pbracket(G, F, 8).swapped()).is_zero()


@given(fields, fields, fields)
def test_leibniz(F, G, H):
    assert (pbracket(F, G * H, 8) - pbracket(F, G, 8) - pbracket(F, H, 8)).is_zero()


@given(fields, fields)
def test_order_stability(F, G):
    assert (pbracket(F, G, 10).truncated(7) - pbracket(F, G, 7)).is_zero()


@given(fields, fields, fields)
def test_jacobi_random(F, G, H):
    assert not jacobiator(F, G, H, 5)


def test_jacobi_suite():
    assert verify_jacobi(6, 10).passed
