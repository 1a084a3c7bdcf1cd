from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hbar_miura.exact import AffineShift, CriticalLevelError, KCoeff, rat, shift

rats = st.fractions(min_value=-20, max_value=20, max_denominator=12)
kcoeffs = st.dictionaries(st.integers(-3, 3), rats, max_size=4).map(KCoeff)
shifts = st.builds(AffineShift, rats, rats)
levels = rats.filter(lambda k: k != -2)


def test_rat_canonical_form():
    q = rat("-6/4")
    assert (q.numerator, q.denominator) == (-3, 2)
    with pytest.raises(TypeError):
        rat(0.5)


def test_affine_shift_kappa_form():
    s = shift(1, Fraction(1, 2))
    a, alpha = s.kappa_form()
    for k in (Fraction(1), Fraction(-1, 2), Fraction(7, 3)):
        assert a + alpha * (k + 2) == s.at(k)


def test_affine_shift_str():
    assert str(shift(0, 1)) == "k"
    assert str(shift(Fraction(-1, 2), -1)) == "-k-1/2"
    assert str(shift(3)) == "3"


@given(shifts, shifts, levels)
def test_affine_shift_evaluation_is_additive(a, b, k):
    assert (a + b).at(k) == a.at(k) + b.at(k)
    assert (a - b).at(k) == a.at(k) - b.at(k)
    assert a.scale(3).at(k) == 3 * a.at(k)


@given(kcoeffs, kcoeffs, levels)
def test_kcoeff_evaluation_is_a_ring_map(a, b, k):
    assert (a + b).at(k) == a.at(k) + b.at(k)
    assert (a * b).at(k) == a.at(k) * b.at(k)
    assert (-a).at(k) == -a.at(k)


@given(kcoeffs, kcoeffs, kcoeffs)
def test_kcoeff_ring_axioms(a, b, c):
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a - a == KCoeff()


def test_kcoeff_collapses_level_dependent_exponents():
    two_over_kappa = KCoeff.monomial(2, -1)
    half_kappa = KCoeff.monomial(Fraction(1, 2), 1)
    prod = two_over_kappa * half_kappa
    assert prod.is_constant and prod.constant() == 1 and prod.is_integer()


def test_kcoeff_critical_level():
    assert KCoeff.monomial(3, 1).at(-2) == 0
    with pytest.raises(CriticalLevelError):
        KCoeff.monomial(2, -1).at(-2)


def test_kcoeff_equality_and_hash():
    a = KCoeff({0: 1, 1: Fraction(1, 2)})
    b = KCoeff([(1, Fraction(1, 4)), (0, 1), (1, Fraction(1, 4))])
    assert a == b and hash(a) == hash(b)
    assert not KCoeff({2: 0})
