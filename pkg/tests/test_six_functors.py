import pytest

from errors import PreconditionError
from posets import inclusion, to_point
from sheaves import constant_sheaf, indicator
from six_functors import (dualizing, extend_by_zero, gamma_c, naive_dual, open_unit, pullback_star, push_closed,
                          push_shriek_proj, push_star, restrict_closed, restrict_open, shriek_restrict_closed,
                          verdier_dual)

V0, V1, E = (0,), (1,), (0, 1)


def test_pullback_to_point_is_constant(interval, point, field):
    k = constant_sheaf(point, field)
    pulled = pullback_star(to_point(interval), k)
    assert pulled.stalk_cohomology() == constant_sheaf(interval, field).stalk_cohomology()


def test_pullback_checks_base(interval, field):
    with pytest.raises(PreconditionError):
        pullback_star(to_point(interval), constant_sheaf(interval, field))


def test_push_to_point_is_global_sections(circle, field):
    pushed = push_star(to_point(circle), constant_sheaf(circle, field))
    assert pushed.value((0,)).cohomology() == {0: 1, 1: 1}


def test_push_shriek_to_point_is_compact_sections(interval, field):
    pushed = push_shriek_proj(to_point(interval), indicator(interval, field, E))
    assert pushed.value((0,)).cohomology() == {1: 1}


def test_compact_support_oracles(interval, circle, field):
    k = constant_sheaf(interval, field)
    assert gamma_c(k).cohomology() == {0: 1}
    assert gamma_c(k, [E]).cohomology() == {1: 1}
    assert gamma_c(constant_sheaf(circle, field)).cohomology() == {0: 1, 1: 1}
    with pytest.raises(PreconditionError):
        gamma_c(k, [V0])


def test_open_restriction_and_zero_extension(interval, field):
    k = constant_sheaf(interval, field)
    j = inclusion(interval, [V0, E])
    assert j.kind == "open-inclusion"
    extended = extend_by_zero(j, restrict_open(j, k))
    assert extended.stalk_cohomology() == indicator(interval, field, V0).stalk_cohomology()


def test_closed_restriction_and_push(interval, field):
    k = constant_sheaf(interval, field)
    i = inclusion(interval, [V1])
    assert i.kind == "closed-inclusion"
    pushed = push_closed(i, restrict_closed(i, k))
    assert pushed.stalk_cohomology() == {V0: {}, V1: {0: 1}, E: {}}
    with pytest.raises(PreconditionError):
        restrict_open(i, k)


def test_open_unit_on_the_whole_space_is_invertible(interval, field):
    k = constant_sheaf(interval, field)
    assert open_unit(k, interval.elements).is_quasi_isomorphism()


def test_local_cohomology_at_points(interval, circle, field):
    at_end = shriek_restrict_closed(inclusion(interval, [V1]), constant_sheaf(interval, field))
    assert at_end.value(V1).cohomology() == {}
    at_vertex = shriek_restrict_closed(inclusion(circle, [(0,)]), constant_sheaf(circle, field))
    assert at_vertex.value((0,)).cohomology() == {1: 1}


def test_dualizing_sheaf(interval, circle, field):
    omega = dualizing(circle, field)
    assert all(c == {-1: 1} for c in omega.stalk_cohomology().values())
    assert dualizing(interval, field).stalk_cohomology() == {V0: {}, V1: {}, E: {-1: 1}}


def test_verdier_dual_of_constant_is_dualizing(circle, field):
    k = constant_sheaf(circle, field)
    assert verdier_dual(k).stalk_cohomology() == dualizing(circle, field).stalk_cohomology()


def test_naive_dual_of_open_indicator(interval, field):
    dual = naive_dual(indicator(interval, field, E))
    assert dual.stalk_cohomology() == constant_sheaf(interval, field).stalk_cohomology()
