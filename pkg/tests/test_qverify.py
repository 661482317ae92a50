from fractions import Fraction as F

import pytest

from qprob import qverify
from qprob.errors import DomainError
from qprob.qverify import (
    CATALOG,
    EXACT,
    INTERVAL,
    GridSpec,
    IdentityCheck,
    UnknownIdentity,
    limit_table,
    run_catalog,
    run_identity,
)

SMALL = GridSpec(qs=(F(1, 2), F(1)), super_qs=(F(2),), ps=(F(1, 5),), vs=(F(1, 2),), max_int=4)


def test_explicit_binding_passes():
    check = run_identity("I5_3", bindings=[{"q": F(1, 2), "m": 2, "u": 2, "n": 2}])
    assert check.passed and check.failures == 0
    assert check.grid == [{"q": F(1, 2), "m": 2, "u": 2, "n": 2}]


@pytest.mark.parametrize("ident", ["I2_39", "I7_12", "I5_20", "I3_9"])
def test_selected_identities_pass(ident):
    check = run_identity(ident, SMALL)
    assert check.passed, check.counterexample
    assert check.grid


def test_interval_entries_report_width():
    check = run_identity("I3_9", SMALL)
    assert check.mode == INTERVAL
    assert check.max_width is not None and check.max_width <= check.tolerance


def test_unknown_identity():
    with pytest.raises(UnknownIdentity):
        run_identity("NOPE")
    with pytest.raises(UnknownIdentity):
        run_catalog(["I2_39", "NOPE"])
    with pytest.raises(UnknownIdentity):
        limit_table("NOPE")


def test_grid_exclusions_are_listed():
    grid = GridSpec(qs=(F(1, 4),), super_qs=(), ps=(F(1, 2),), vs=(F(1, 2),), max_int=3)
    check = run_identity("I4_6", grid)
    reasons = {r for _, r in check.excluded}
    assert check.passed
    assert any("diverges" in r for r in reasons)


def test_explicit_out_of_domain_binding_fails():
    check = run_identity("I4_6", bindings=[{"q": F(1, 2), "lam": F(4)}])
    assert not check.passed
    assert check.counterexample is not None
    assert check.excluded == []


def test_printed_superunit_limit_is_on_the_watchlist():
    check = run_identity("I4_24_printed")
    assert check.watchlist and not check.passed
    assert run_identity("I4_24").passed


def test_limit_tables():
    table = limit_table("L4_3", points=(5, 10, 20))
    assert table.strictly_decreasing
    assert table.distances[-1].hi < table.distances[0].lo
    with pytest.raises(DomainError):
        limit_table("L4_3", bogus=1)


def test_grid_overrides():
    g = SMALL.with_overrides({"q": "1/3,5", "max_int": "2", "p": ["1/2"]})
    assert g.qs == (F(1, 3),) and g.super_qs == (F(5),)
    assert g.max_int == 2 and g.ps == (F(1, 2),)
    assert list(g.ints()) == [0, 1, 2]
    with pytest.raises(DomainError):
        SMALL.with_overrides({"zeta": "1"})
    with pytest.raises(DomainError):
        GridSpec(qs=(F(2),))


def test_exact_checks_take_no_tolerance():
    with pytest.raises(ValueError):
        IdentityCheck("X", "x", EXACT, F(1, 10))


def test_catalog_metadata():
    ids = qverify.catalog_ids()
    assert len(ids) == len(set(ids))
    for entry in CATALOG.values():
        assert entry.mode in (qverify.EXACT, qverify.INTERVAL, qverify.MONOTONE)
        if entry.mode == EXACT:
            assert entry.tolerance is None


def test_small_grid_catalog_gate():
    results = run_catalog(grid=SMALL)
    failed = [r.id for r in results if not r.passed and not r.watchlist]
    assert failed == []
