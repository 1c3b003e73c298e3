import pytest

from errors import BudgetExceededError, PreconditionError
from kernels import boxtimes
from microlocal import (SignAssignment, is_constructible_wrt, is_realizable, link_keys, microlocal_constructibility,
                        microstalk, microstalk_corep, negative_region, sign_assignments, singular_support,
                        thom_sebastiani_records)
from posets import subdivision_map
from sheaves import constant_sheaf, derived_hom, indicator

V0, V1, E = (0,), (1,), (0, 1)


def test_sign_assignment_basics():
    xi = SignAssignment(V0, ((1, -1),))
    assert xi.label() == "1-"
    assert xi.negative() == frozenset({1})
    assert not xi.is_zero_section()
    with pytest.raises(PreconditionError):
        SignAssignment(V0, ((1, 0),))


def test_enumeration_and_budget(interval, square):
    assert len(list(sign_assignments(interval, V0))) == 2
    assert len(list(sign_assignments(interval, E))) == 1
    assert link_keys(square, (V0, V0)) == [(0, 1), (1, 1)]
    with pytest.raises(BudgetExceededError):
        list(sign_assignments(interval, V0, budget=0))


def test_negative_region(interval):
    assert negative_region(interval, SignAssignment(V0, ((1, -1),))) == [E]
    assert negative_region(interval, SignAssignment(V0, ((1, 1),))) == []


def test_microstalks_on_the_interval(interval, field):
    inward = SignAssignment(V0, ((1, -1),))
    assert microstalk(constant_sheaf(interval, field), inward).cohomology() == {}
    assert microstalk(indicator(interval, field, E), inward).cohomology() == {1: 1}
    zero = SignAssignment(V0, ((1, 1),))
    assert microstalk(indicator(interval, field, V0), zero).cohomology() == {0: 1}


def test_corepresentative_computes_microstalk(interval, field):
    xi = SignAssignment(V0, ((1, -1),))
    corep = microstalk_corep(interval, field, xi)
    for s in interval.elements:
        F = indicator(interval, field, s)
        assert derived_hom(corep, F).cohomology() == microstalk(F, xi).cohomology()


def test_singular_support_of_constant_sheaf(interval, field):
    table = singular_support(constant_sheaf(interval, field))
    assert list(table.columns) == ["stratum", "signs", "cohomology", "zero_section"]
    assert len(table) == 3
    assert table["zero_section"].all()


def test_realizable_covectors(path2):
    assert is_realizable(path2, SignAssignment((1,), ((0, -1), (2, 1))))
    assert not is_realizable(path2, SignAssignment((1,), ((0, -1), (2, -1))))


def test_constructibility(path2, field):
    q = subdivision_map(2)
    k = constant_sheaf(path2, field)
    assert is_constructible_wrt(k, q)
    assert microlocal_constructibility(k, q)
    edge = indicator(path2, field, (0, 1))
    assert not is_constructible_wrt(edge, q)
    assert not microlocal_constructibility(edge, q)
    with pytest.raises(BudgetExceededError):
        microlocal_constructibility(k, q, budget=1)


def test_thom_sebastiani_on_generators(interval, field):
    F, G = indicator(interval, field, V0), indicator(interval, field, E)
    records = thom_sebastiani_records(F, G, boxtimes(F, G))
    assert len(records) == 5 * 5
    assert all(r["passed"] for r in records)
