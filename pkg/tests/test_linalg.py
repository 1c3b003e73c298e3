from fractions import Fraction

import pytest

from errors import PreconditionError, ValidationError
from linalg import (ChainMap, Complex, FieldConfig, Matrix, biduality, cone, dual, fiber, hocolim, holim,
                    hom_complex, tensor_complex)
from posets import SimplicialComplex, face_poset
from sheaves import constant_sheaf


def interval_cochains(field):
    """C^0 = k^2 -> C^1 = k, d = (-1 1)"""
    return Complex(field, {0: 2, 1: 1}, {0: Matrix.from_rows(field, [[-1, 1]])})


def test_field_parse_and_labels():
    assert FieldConfig.parse("q").label == "q"
    assert FieldConfig.parse("fp:7").label == "fp:7"
    with pytest.raises(PreconditionError):
        FieldConfig.parse("fp:8")
    with pytest.raises(PreconditionError):
        FieldConfig.parse("r")


def test_field_elements_are_exact():
    q = FieldConfig("q")
    assert q.format(q(Fraction(1, 3)) + q(Fraction(1, 6))) == "1/2"
    assert q.format(q("4/2")) == "2"
    fp = FieldConfig("fp", 5)
    assert fp.format(fp(Fraction(1, 2))) == "3"
    with pytest.raises(PreconditionError):
        fp(Fraction(1, 5))


def test_matrix_rank_and_kernel(field):
    M = Matrix.from_rows(field, [[1, 2, 3], [2, 4, 6]])
    assert M.rank() == 1
    K = M.kernel()
    assert K.shape == (3, 2)
    assert (M @ K).is_zero()


def test_rank_depends_on_characteristic():
    rows = [[1, 1], [1, -1]]
    assert Matrix.from_rows(FieldConfig("q"), rows).rank() == 2
    assert Matrix.from_rows(FieldConfig("fp", 2), rows).rank() == 1


def test_zero_entries_are_dropped(field):
    M = Matrix.from_rows(field, [[0, 0], [0, 1]])
    assert list(M.entries()) == [(1, 1, field.one)]
    assert Matrix.zeros(field, 2, 2).is_zero()


def test_cohomology_of_interval_cochains(field):
    assert interval_cochains(field).cohomology() == {0: 1}


def test_zero_complex(field):
    C = Complex.zero(field)
    assert C.is_zero()
    assert C.cohomology() == {}
    assert dual(C).is_zero()


def test_d_squared_nonzero_is_rejected(field):
    one = Matrix.identity(field, 1)
    with pytest.raises(ValidationError, match="degrees 0 -> 2"):
        Complex(field, {0: 1, 1: 1, 2: 1}, {0: one, 1: one})


def test_differential_shape_is_checked(field):
    with pytest.raises(ValidationError):
        Complex(field, {0: 2, 1: 1}, {0: Matrix.identity(field, 2)})


def test_shift_moves_degrees(field):
    C = Complex.unit(field).shift(1)
    assert C.dims == {-1: 1}
    assert interval_cochains(field).shift(2).cohomology() == {-2: 1}


def test_cone_of_identity_is_acyclic(field):
    C = interval_cochains(field)
    f = ChainMap.identity(C)
    assert cone(f).is_acyclic()
    assert f.is_quasi_isomorphism()


def test_fiber_of_zero_map(field):
    k = Complex.unit(field)
    f = ChainMap.zero(k, k)
    assert fiber(f).cohomology() == {0: 1, 1: 1}
    assert not f.is_quasi_isomorphism()


def test_chain_map_must_commute(field):
    C = interval_cochains(field)
    k = Complex.unit(field)
    with pytest.raises(ValidationError):
        ChainMap(k, C, {0: Matrix.from_rows(field, [[1], [0]])})


def test_chain_map_cohomology_rank(field):
    C = interval_cochains(field)
    k = Complex.unit(field)
    diagonal = ChainMap(k, C, {0: Matrix.from_rows(field, [[1], [1]])})
    assert diagonal.cohomology_ranks() == {0: 1}
    assert diagonal.is_quasi_isomorphism()


def test_hom_and_tensor_dimensions(field):
    C = interval_cochains(field)
    k = Complex.unit(field)
    assert hom_complex(C, k).cohomology() == {0: 1}
    assert tensor_complex(C, C).cohomology() == {0: 1}
    assert dual(C).cohomology() == {0: 1}


def test_biduality_is_quasi_isomorphism(field):
    assert biduality(interval_cochains(field)).is_quasi_isomorphism()


def test_homotopy_limits_over_a_triangle(field):
    triangle = face_poset(SimplicialComplex([0, 1, 2], [(0, 1, 2)]))
    diagram = constant_sheaf(triangle, field).diagram
    assert len(diagram.elements) == 7
    assert holim(diagram).cohomology() == {0: 1}
    assert hocolim(diagram).cohomology() == {0: 1}
