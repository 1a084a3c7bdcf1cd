from fractions import Fraction

import pytest

from hbar_miura.relations import (RELATION_IDS, RELATIONS, CriticalLevelUnsupported, default_manifest,
                                  parse_manifest, reconcile_variants, verify_defining, verify_derivation,
                                  verify_ef_display, verify_relation, verify_rho_properties)
from hbar_miura.wakimoto import DEFAULT_VARIANTS

LEVELS = [None, Fraction(1), Fraction(3, 2), Fraction(-1, 2)]


@pytest.mark.parametrize("k", LEVELS)
def test_defining_relations_symbolic(k):
    reports = verify_defining(k, fock=False)
    assert len(reports) == len(RELATIONS)
    assert all(r.passed for r in reports), [r.check for r in reports if not r.passed]


def test_verdicts_do_not_depend_on_sampled_level():
    verdicts = [tuple(r.passed for r in verify_defining(k, {"kbos": "literal"}, fock=False)) for k in LEVELS]
    assert len(set(verdicts)) == 1
    assert not all(verdicts[0])


@pytest.mark.parametrize("rel", ["e-e", "f-f", "hplus-e", "k1minus-f", "hplus-hminus"])
def test_fock_and_symbolic_verdicts_agree(rel):
    sym = verify_relation(rel, None)
    fock = verify_relation(rel, 1, 2, mode="fock", radius=0)
    assert sym.passed and fock.passed and fock.mode == "fock"


def test_fock_mode_detects_a_wrong_variant():
    assert not verify_relation("hminus-e", 1, 2, {"hminus": "printed"}, mode="fock", radius=0).passed


def test_ef_delta_relation_small_window():
    rep = verify_relation("e-f", 1, 2, mode="fock", radius=0)
    assert rep.passed and rep.residual == []


def test_ef_display():
    assert verify_ef_display().passed
    assert not verify_ef_display({"ef": "printed"}).passed


def test_rho_properties():
    rep = verify_rho_properties(2000)
    assert rep.details["unitarity"] and rep.details["crossing +"] and rep.details["crossing -"]
    assert rep.details["C^2 = -1"]


def test_derivation_generic_level():
    assert all(r.passed for r in verify_derivation(1, 2))
    with pytest.raises(CriticalLevelUnsupported):
        verify_derivation(-2, 2)


def test_manifest_round_trip():
    parsed = parse_manifest(default_manifest())
    assert [spec.id for spec, _ in parsed] == list(RELATION_IDS)
    assert parsed[0][1]["mode"] in ("symbolic", "fock")
    with pytest.raises(ValueError):
        parse_manifest("e-e cutoff")
    with pytest.raises(KeyError):
        parse_manifest("no-such-relation")


def test_reconciliation_selects_defaults():
    rec = reconcile_variants()
    assert rec.selected == DEFAULT_VARIANTS
    assert len(rec.matrix) == 12
    assert len(rec.failing()) == 11
