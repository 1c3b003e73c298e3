from fractions import Fraction

import pytest

from errors import PreconditionError, ValidationError
from posets import (PosetMap, SimplicialComplex, face_poset, inclusion, projection, staircase,
                    subdivision_map, subposets, swap_map)


def test_simplices_are_closed_under_faces():
    K = SimplicialComplex([0, 1, 2], [(0, 1, 2)])
    assert len(K.simplices) == 7
    assert K.dimension() == 2
    assert (1, 0) in K


def test_unknown_vertex_is_rejected():
    with pytest.raises(ValidationError):
        SimplicialComplex([0, 1], [(0, 2)])


def test_circle_needs_three_vertices():
    with pytest.raises(PreconditionError):
        SimplicialComplex.circle(2)


def test_interval_order_and_stars(interval):
    assert interval.elements == [(0,), (1,), (0, 1)]
    assert interval.leq((0, 1), (0,))
    assert not interval.leq((0,), (0, 1))
    assert interval.star((0,)) == frozenset({(0,), (0, 1)})
    assert interval.covers_above((0, 1)) == [(0,), (1,)]


def test_incidence_signs(interval):
    assert interval.incidence((0, 1), (0,)) == -1
    assert interval.incidence((0, 1), (1,)) == 1


def test_open_and_closed_subsets(interval):
    assert interval.is_open([(0, 1)])
    assert not interval.is_open([(0,)])
    assert interval.is_closed([(0,)])
    assert subposets(interval, [(0,), (0, 1)]).kind == "open"
    with pytest.raises(PreconditionError):
        inclusion(interval, [(0, 1), (0,), (5,)])


def test_labels(interval, square):
    assert interval.label((0, 1)) == "0-1"
    assert square.label(((0,), (0, 1))) == "(0|0-1)"
    assert square.element_from_label("(1|0)") == ((1,), (0,))


def test_product_sizes_and_dimensions(interval, circle, square, cylinder):
    assert len(square) == 9
    assert len(cylinder) == 18
    assert square.dim(((0, 1), (0, 1))) == 2
    assert square.leq(((0, 1), (0, 1)), ((0,), (1,)))


def test_product_incidence_sign(square):
    top = ((0, 1), (0, 1))
    assert square.incidence(top, ((0,), (0, 1))) == -1
    assert square.incidence(top, ((0, 1), (1,))) == -1


def test_projection_and_swap(interval, square):
    pi = projection(square, [1])
    assert pi.target == interval
    assert pi(((0,), (0, 1))) == (0, 1)
    v = swap_map(square)
    assert v(((0,), (0, 1))) == ((0, 1), (0,))


def test_poset_map_must_preserve_order(interval):
    with pytest.raises(ValidationError):
        PosetMap(interval, interval, {(0,): (0, 1), (1,): (1,), (0, 1): (0,)})


def test_subdivision_refinement(interval, path2):
    q = subdivision_map(2)
    assert q.source == path2
    assert q.target == interval
    assert q((1,)) == (0, 1)
    assert q((2,)) == (1,)
    q.require("refinement")
    with pytest.raises(PreconditionError):
        q.require("projection")


def test_staircase_of_interval_square():
    geometry = staircase(SimplicialComplex.interval())
    assert len(geometry.R) == 11
    assert len(geometry.diagonal) == 3
    assert geometry.q((((0, 0), (1, 1)))) == ((0, 1), (0, 1))
    assert geometry.q(((0, 1),)) == ((0,), (1,))
    assert geometry.diagonal_map()((0, 1)) == ((0, 0), (1, 1))


def test_face_poset_keeps_complex():
    K = SimplicialComplex.circle(4)
    P = face_poset(K)
    assert P.complex is K
    assert len(P) == 8
    assert K.link_vertices((0,)) == [1, 3]


def test_path_coordinates_are_exact():
    K = SimplicialComplex.path(3)
    assert K.coordinates[1] == (Fraction(1, 3),)
    assert all(isinstance(x, Fraction) for point in K.coordinates.values() for x in point)
    assert SimplicialComplex([0, 1], [(0, 1)], {0: (0,), 1: ("1/2",)}).coordinates[1] == (Fraction(1, 2),)
    with pytest.raises(PreconditionError):
        SimplicialComplex([0], [], {0: (0.5,)})
