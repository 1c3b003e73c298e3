import pytest

from errors import BudgetExceededError, PreconditionError
from kernels import (boxtimes, check_triangles, compose_kernels, convolve, duality_data, generator_map,
                     identity_kernel, kernel_action, kernel_factors, left_kan_localize, pairing_dims,
                     reconstruct_kernel, standard_dual, swap_kernel)
from posets import SimplicialComplex, product_poset, subdivision_map, to_point
from sheaves import constant_sheaf, indicator

V0, V1, E = (0,), (1,), (0, 1)


def test_exterior_product_of_generators(interval, circle, field):
    P = product_poset(circle, interval)
    for s in circle.elements:
        for t in interval.elements:
            product = boxtimes(indicator(circle, field, s), indicator(interval, field, t))
            assert product.base == P
            assert product.stalk_cohomology() == indicator(P, field, (s, t)).stalk_cohomology()


def test_kernel_factors(interval, square, field):
    assert kernel_factors(constant_sheaf(square, field)) == (interval, interval)
    with pytest.raises(PreconditionError):
        kernel_factors(constant_sheaf(interval, field))


def test_convolution_with_exterior_product(interval, field):
    K = boxtimes(indicator(interval, field, E), indicator(interval, field, V0))
    result = convolve(K, constant_sheaf(interval, field))
    assert result.stalk_cohomology() == {V0: {1: 1}, V1: {}, E: {1: 1}}


def test_convolution_checks_source(interval, circle, field):
    K = boxtimes(indicator(interval, field, E), indicator(interval, field, V0))
    with pytest.raises(PreconditionError):
        convolve(K, constant_sheaf(circle, field))


def test_identity_kernel_acts_as_identity_on_vertex(interval, field):
    K = identity_kernel(SimplicialComplex.interval(), field)
    one = indicator(interval, field, V0)
    assert convolve(K, one).stalk_cohomology() == one.stalk_cohomology()


def test_swap_kernel(interval, circle, field):
    K = boxtimes(indicator(circle, field, (0,)), indicator(interval, field, E))
    swapped = swap_kernel(K)
    expected = boxtimes(indicator(interval, field, E), indicator(circle, field, (0,)))
    assert swapped.base == expected.base
    assert swapped.stalk_cohomology() == expected.stalk_cohomology()


def test_triple_product_budget(interval, field):
    K = boxtimes(indicator(interval, field, E), indicator(interval, field, V0))
    with pytest.raises(BudgetExceededError):
        compose_kernels(K, K, budget=10)


def test_generator_maps_follow_the_order(interval, field):
    iota = generator_map(interval, field, E, V0)
    assert iota.cohomology_ranks() == {V0: {}, V1: {}, E: {0: 1}}
    with pytest.raises(PreconditionError):
        generator_map(interval, field, V0, E)


def test_standard_dual_of_generators(interval, field):
    assert standard_dual(indicator(interval, field, E)).stalk_cohomology() == {V0: {}, V1: {}, E: {-1: 1}}
    assert standard_dual(indicator(interval, field, V0)).stalk_cohomology() == {V0: {0: 1}, V1: {}, E: {}}


def test_duality_pairing_against_constant_sheaf(interval, field):
    k = constant_sheaf(interval, field)
    for s in interval.elements:
        hom, pushed = pairing_dims(indicator(interval, field, s), k)
        assert hom == pushed


def test_localization_along_subdivision(interval, path2, field):
    q = subdivision_map(2)
    assert left_kan_localize(q, indicator(path2, field, (1,))).stalk_cohomology() == \
        indicator(interval, field, E).stalk_cohomology()
    assert left_kan_localize(q, constant_sheaf(path2, field)).stalk_cohomology() == \
        constant_sheaf(interval, field).stalk_cohomology()
    with pytest.raises(PreconditionError):
        left_kan_localize(to_point(path2), constant_sheaf(path2, field))


def test_triangle_identities_on_the_interval(field):
    records = check_triangles(duality_data(SimplicialComplex.interval(), field))
    assert len(records) == 10
    assert all(r["passed"] for r in records)
    assert records[0]["expected"] == records[0]["got"]


def test_identity_kernel_is_rebuilt_from_its_action(interval, field):
    K = identity_kernel(SimplicialComplex.interval(), field)
    S, T = kernel_factors(K)
    table, maps = kernel_action(K, field)
    assert table[V0].stalk_cohomology() == indicator(interval, field, V0).stalk_cohomology()
    rebuilt = reconstruct_kernel(S, T, table, maps, field)
    assert rebuilt.base == K.base
    assert rebuilt.stalk_cohomology() == K.stalk_cohomology()
    assert convolve(rebuilt, indicator(interval, field, V1)).stalk_cohomology() == {V0: {}, V1: {0: 1}, E: {0: 1}}
