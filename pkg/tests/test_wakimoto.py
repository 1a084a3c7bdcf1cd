import pytest

from hbar_miura.boson import exchange_factor
from hbar_miura.sugawara import lambda_exchange_expected
from hbar_miura.wakimoto import (CURRENT_NAMES, VARIANT_SITES, UnknownCurrent, UnknownVariant, build, h_minus, h_plus,
                                 k_current, reconstruct_k_from_h, resolve_variants)

BUILDABLE = [n for n in CURRENT_NAMES if n != "d_charge"]


@pytest.mark.parametrize("name", BUILDABLE)
def test_build_is_deterministic(name):
    a, b = build(name), build(name)
    assert [v.key() for _, v in a.terms] == [v.key() for _, v in b.terms]
    assert [c for c, _ in a.terms] == [c for c, _ in b.terms]


def test_d_charge_and_unknown_names():
    with pytest.raises(UnknownCurrent):
        build("d_charge")
    with pytest.raises(UnknownCurrent):
        build("nope")
    with pytest.raises(UnknownVariant):
        build("e", {"ef": "bogus"})
    with pytest.raises(UnknownVariant):
        resolve_variants("hminus")


def test_variant_resolution():
    assert resolve_variants(None) == resolve_variants("reconciled")
    assert resolve_variants("hminus=printed")["hminus"] == "printed"
    assert set(resolve_variants({})) == set(VARIANT_SITES)


@pytest.mark.parametrize("sign", [1, -1])
def test_h_is_ratio_of_k(sign):
    h = h_plus() if sign > 0 else h_minus()
    assert k_current(sign, 2).legs_concat(k_current(sign, 1).inverse()).key() == h.key()


@pytest.mark.parametrize("sign", [1, -1])
@pytest.mark.parametrize("i", [1, 2])
def test_closed_form_k_matches_reconstruction_from_h(sign, i):
    assert k_current(sign, i).key() == reconstruct_k_from_h(sign, i).key()


@pytest.mark.parametrize("sign", [1, -1])
@pytest.mark.parametrize("i", [1, 2])
def test_literal_k_differs_from_reconstruction(sign, i):
    literal = k_current(sign, i, {"kbos": "literal"})
    assert literal.key() != reconstruct_k_from_h(sign, i).key()


@pytest.mark.parametrize("K", ["K_plus", "K_minus"])
def test_heisenberg_center_vanishes_identically(K):
    assert build(K).is_zero()


def test_lambda_exchange_is_rho_ratio():
    r = exchange_factor(build("lambda_cap_plus"), build("lambda_cap_minus"))
    assert r.equals(lambda_exchange_expected())
    assert r.is_balanced()
    assert not r.is_one()
