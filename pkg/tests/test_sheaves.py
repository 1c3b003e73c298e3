import numpy as np
import pytest

from errors import PreconditionError, ValidationError
from linalg import ChainMap, Complex, Matrix
from posets import SimplicialComplex, face_poset
from sheaves import (IndicatorComplex, IndicatorMap, Sheaf, SheafMap, bar_map, bar_resolution, constant_sheaf,
                     derived_hom, direct_sum_sheaves, global_sections, hom_precompose, indicator,
                     locally_closed_constant, proj_resolve, random_sheaf, sections_open, sheaf_cone, skyscraper, tensor,
                     zero_sheaf)

V0, V1, E = (0,), (1,), (0, 1)


def test_indicator_is_supported_on_the_star(interval, field):
    one = indicator(interval, field, V0)
    assert one.stalk_cohomology() == {V0: {0: 1}, V1: {}, E: {0: 1}}
    assert one.support() == [V0, E]


def test_unknown_stratum(interval, field):
    with pytest.raises(PreconditionError):
        indicator(interval, field, (7,))


def test_global_sections_of_constant_sheaves(point, interval, circle, field):
    assert global_sections(constant_sheaf(point, field)).cohomology() == {0: 1}
    assert global_sections(constant_sheaf(interval, field)).cohomology() == {0: 1}
    assert global_sections(constant_sheaf(circle, field)).cohomology() == {0: 1, 1: 1}


def test_global_sections_of_indicators(interval, field):
    assert global_sections(indicator(interval, field, V0)).cohomology() == {}
    assert global_sections(indicator(interval, field, E)).cohomology() == {1: 1}


def test_sections_over_open_sets(interval, field):
    k = constant_sheaf(interval, field)
    assert sections_open(k, [E]).cohomology() == {0: 1}
    with pytest.raises(PreconditionError):
        sections_open(k, [V0])


def test_indicators_represent_stalks(interval, field):
    k = constant_sheaf(interval, field)
    assert derived_hom(indicator(interval, field, E), k).cohomology() == {0: 1}
    assert derived_hom(indicator(interval, field, V0), indicator(interval, field, E)).cohomology() == {}
    assert derived_hom(indicator(interval, field, E), indicator(interval, field, V0)).cohomology() == {0: 1}


def test_endomorphisms_of_constant_circle(circle, field):
    k = constant_sheaf(circle, field)
    assert derived_hom(k, k).cohomology() == {0: 1, 1: 1}


def test_hom_needs_same_base(interval, circle, field):
    with pytest.raises(PreconditionError):
        derived_hom(constant_sheaf(interval, field), constant_sheaf(circle, field))


def test_non_functorial_sheaf_is_rejected(field):
    triangle = face_poset(SimplicialComplex([0, 1, 2], [(0, 1, 2)]))
    unit = Complex.unit(field)
    restrictions = {(s, t): ChainMap.identity(unit) for s, t in triangle.covering_pairs()}
    top, edge = (0, 1, 2), (0, 1)
    restrictions[(top, edge)] = ChainMap(unit, unit, {0: Matrix.from_rows(field, [[2]])})
    with pytest.raises(ValidationError, match="non-functorial"):
        Sheaf(triangle, field, {s: unit for s in triangle.elements}, restrictions)


def test_locally_closed_subsets(field):
    triangle = face_poset(SimplicialComplex([0, 1, 2], [(0, 1, 2)]))
    F = locally_closed_constant(triangle, field, [(0, 1, 2), (0, 1)])
    assert F.support() == [(0, 1), (0, 1, 2)]
    with pytest.raises(PreconditionError):
        locally_closed_constant(triangle, field, [(0, 1, 2), (0,)])


def test_sheaf_map_must_commute(interval, field):
    k = constant_sheaf(interval, field)
    unit = Complex.unit(field)
    with pytest.raises(ValidationError):
        SheafMap(k, k, {V0: ChainMap.identity(unit)})


def test_cone_of_identity_is_zero(interval, field):
    k = constant_sheaf(interval, field)
    assert sheaf_cone(SheafMap.identity(k)).is_acyclic()


def test_presented_sheaves_resolve_by_their_presentation(interval, field):
    one = indicator(interval, field, V0)
    resolution = proj_resolve(one)
    assert resolution.complex.generators == [(V0, 0)]


def test_bar_resolution_of_constant_sheaf(interval, field):
    k = constant_sheaf(interval, field)
    resolution = bar_resolution(k)
    # chains of length 0 and 1 in a three element poset with two relations
    assert len(resolution.complex) == 5
    assert resolution.complex.realize().stalk_cohomology() == k.stalk_cohomology()
    assert resolution.augmentation.is_quasi_isomorphism()
    assert bar_resolution(k) is resolution


def test_bar_map_of_identity_is_identity(interval, field):
    k = constant_sheaf(interval, field)
    f = bar_map(SheafMap.identity(k))
    assert f.M == Matrix.identity(field, len(f.source))


def test_indicator_differential_checks(interval, field):
    with pytest.raises(ValidationError):
        IndicatorComplex(interval, field, [(V0, 0), (E, 1)], Matrix.from_entries(field, 2, 2, [(1, 0, field.one)]))


def test_generator_map_precomposition(interval, field):
    source = IndicatorComplex.indicator(interval, field, E)
    target = IndicatorComplex.indicator(interval, field, V0)
    f = IndicatorMap(source, target, Matrix.identity(field, 1))
    k = constant_sheaf(interval, field)
    assert hom_precompose(f, k).is_quasi_isomorphism()


def test_tensor_of_indicators_is_indicator_of_meet(interval, field):
    product = tensor(indicator(interval, field, V0), indicator(interval, field, V1))
    assert product.stalk_cohomology() == indicator(interval, field, E).stalk_cohomology()


def test_random_sheaves_are_reproducible(circle, field):
    a = random_sheaf(circle, field, np.random.default_rng(3))
    b = random_sheaf(circle, field, np.random.default_rng(3))
    assert a == b
    assert a.presentation is not None


def test_zero_sheaf(interval, field):
    assert zero_sheaf(interval, field).is_zero()


def test_skyscraper_at_a_vertex(interval, field):
    F = skyscraper(interval, field, V0)
    assert F.support() == [V0]
    assert global_sections(F).cohomology() == {0: 1}
    assert skyscraper(interval, field, E, Complex.unit(field).shift(1)).stalk_cohomology()[E] == {-1: 1}


def test_direct_sums_keep_presentations_when_they_can(interval, field):
    both = direct_sum_sheaves([indicator(interval, field, V0), indicator(interval, field, V1)])
    assert both.presentation is not None
    assert both.stalk_cohomology() == {V0: {0: 1}, V1: {0: 1}, E: {0: 2}}
    mixed = direct_sum_sheaves([indicator(interval, field, V0), skyscraper(interval, field, V1)])
    assert mixed.presentation is None
    assert mixed.stalk_cohomology() == {V0: {0: 1}, V1: {0: 1}, E: {0: 1}}
