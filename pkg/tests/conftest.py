import pytest

from linalg import FieldConfig
from posets import SimplicialComplex, face_poset, product_poset


@pytest.fixture
def field():
    return FieldConfig("q")


@pytest.fixture
def point():
    return face_poset(SimplicialComplex.point())


@pytest.fixture
def interval():
    return face_poset(SimplicialComplex.interval())


@pytest.fixture
def path2():
    return face_poset(SimplicialComplex.path(2))


@pytest.fixture
def circle():
    return face_poset(SimplicialComplex.circle(3))


@pytest.fixture
def square(interval):
    return product_poset(interval, interval)


@pytest.fixture
def cylinder(circle, interval):
    return product_poset(circle, interval)
