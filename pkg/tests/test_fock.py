from fractions import Fraction
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hbar_miura.boson import VertexOperator, VOSum, specialize
from hbar_miura.exact import CriticalLevelError
from hbar_miura.fock import (DerivationCharge, FockOperator, FockState, FockVector, apply_vo, charge_sectors,
                             hurwitz_power_sum, pair_series, product_series, series_difference, states_up_to)
from hbar_miura.wakimoto import build, h_plus

STATES3 = states_up_to(3)
states = st.sampled_from(STATES3)


def _p3(d):
    # partitions of d spread over three bosons
    p = [1] + [0] * d
    for part in range(1, d + 1):
        for n in range(part, d + 1):
            p[n] += p[n - part]
    return sum(p[a] * p[b] * p[d - a - b] for a in range(d + 1) for b in range(d + 1 - a))


def test_state_enumeration_counts():
    assert len(states_up_to(4)) == sum(_p3(d) for d in range(5))
    assert len(charge_sectors(1)) == 27


def test_identity_operator_acts_trivially():
    op = FockOperator(VertexOperator.identity(), 1)
    for stt in STATES3[:10]:
        assert op.series(stt, 3) == {0: FockVector.basis(stt)}


def test_k1_plus_on_vacuum_starts_with_one():
    op = FockOperator(build("k1_plus"), 1)
    vac = FockState.vacuum()
    assert op.series(vac, 3, floor=-3)[0] == FockVector.basis(vac)


def test_h_plus_factorwise_oracle():
    # h+ is a product of commuting one-sided factors; applying them one at a time is an independent route
    k, cutoff, floor = Fraction(1), 3, -4
    state = FockState(*FockState.vacuum()[:3], ((), (1,), ()))
    whole = FockOperator(VOSum.of(h_plus()), k).series(state, cutoff, floor)
    v = h_plus()
    pieces = [VertexOperator(annihilation=v.annihilation, zero_p=v.zero_p), VertexOperator(prefactor=v.prefactor)]
    series = {Fraction(0): FockVector.basis(state)}
    for piece in pieces:
        op = FockOperator(piece, k)
        nxt = {}
        for p, vec in series.items():
            for q, w in op.series(vec, cutoff, floor - 4).items():
                nxt.setdefault(p + q, FockVector()).add(w)
        series = nxt
    diff = series_difference({p: w for p, w in whole.items() if p >= floor},
                             {p: w for p, w in series.items() if p >= floor})
    assert not diff


@given(states, states, st.integers(-3, 3))
def test_apply_is_linear(a, b, c):
    op = FockOperator(build("e"), 1)
    vec = FockVector.basis(a).add(FockVector.basis(b), c)
    lhs = op.series(vec, 3, floor=-3)
    rhs = op.series(a, 3, floor=-3)
    for p, w in op.series(b, 3, floor=-3).items():
        rhs.setdefault(p, FockVector()).add(w, c)
    assert not series_difference({p: w for p, w in lhs.items() if p >= -3},
                                 {p: w for p, w in rhs.items() if p >= -3})


@given(st.sampled_from(states_up_to(2)), st.sampled_from(["e", "f", "h_plus", "h_minus"]))
def test_truncation_monotonicity(stt, name):
    op = FockOperator(build(name), 1)
    lo = op.series(stt, 2, floor=-3)
    hi = {p: w.truncated(2) for p, w in op.series(stt, 3, floor=-3).items()}
    assert not series_difference({p: w for p, w in lo.items() if p >= -3},
                                 {p: w for p, w in hi.items() if p >= -3})


@pytest.mark.parametrize("names", [("e", "f"), ("f", "e"), ("e", "e"), ("h_plus", "f")])
def test_pair_engine_matches_sequential_product(names):
    A, B = (FockOperator(build(n), 1) for n in names)
    for stt in states_up_to(1):
        fast = pair_series(A, B, stt, 2, -2, -2, 1, 1)
        slow = product_series(A, B, stt, 2, -2, -2, margin=6)
        window = lambda t: {key: w for key, w in t.items() if -2 <= key[0] <= 1 and -2 <= key[1] <= 1}  # noqa: E731
        assert not series_difference(window(fast), window(slow))


@given(st.integers(0, 5), st.fractions(-3, 3, max_denominator=4), st.sampled_from([Fraction(1), Fraction(2),
                                                                                       Fraction(-1, 2)]),
       st.integers(1, 6))
def test_hurwitz_sum_telescopes(m, c, S, N):
    # regularized sum over l >= 0 minus the one over l >= N is the finite sum over l < N
    head = hurwitz_power_sum(m, c, S)
    tail = hurwitz_power_sum(m, c + N * S, S)
    finite = {}
    for l in range(N):
        a = c + l * S
        for i in range(m + 1):
            finite[i] = finite.get(i, 0) + comb(m, i) * a ** (m - i)
    for i in range(m + 1):
        assert head.get(i, 0) - tail.get(i, 0) == finite.get(i, 0)


def test_derivation_charge():
    assert DerivationCharge(1).act(FockState.vacuum()).is_zero()
    st1 = FockState(*FockState.vacuum()[:3], ((), (1,), ()))
    out = DerivationCharge(1).act(st1)
    assert out == FockVector({FockState(*st1[:3], ((), (2,), ())): 1})
    with pytest.raises(CriticalLevelError):
        DerivationCharge(-2)


def test_apply_vo_respects_cutoff():
    vo = build("f").terms[0][1]
    for p, w in apply_vo(specialize(vo, Fraction(1)), FockState.vacuum(), 2, 1).items():
        assert all(s.degree <= 2 for s in w)
