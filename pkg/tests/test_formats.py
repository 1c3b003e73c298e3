from fractions import Fraction
from pathlib import Path

import pytest

from errors import ParseError, ValidationError
from formats import Workspace, load_workspace, parse_stop_config, parse_workspace, save_workspace, serialize_workspace
from posets import SimplicialComplex
from sheaves import constant_sheaf

FIXTURES = Path(__file__).parent / "fixtures"


def test_empty_workspace():
    text = serialize_workspace(Workspace())
    assert text == "sheafcalc 1\nfield q\n"
    assert parse_workspace(text).names() == []


def test_golden_interval_sheaf_is_canonical():
    text = (FIXTURES / "interval_constant.sheaf").read_text(encoding="utf-8")
    ws = parse_workspace(text)
    assert ws.names() == ["I", "k"]
    F = ws.get("k")
    assert F.stalk_cohomology()[(0, 1)] == {0: 1}
    assert serialize_workspace(ws) == text


def test_built_workspace_matches_golden_file(field):
    ws = Workspace(field)
    ws.add_space("I", SimplicialComplex.interval())
    ws.add_sheaf("k", constant_sheaf(ws.poset("I"), field), "I")
    assert serialize_workspace(ws) == (FIXTURES / "interval_constant.sheaf").read_text(encoding="utf-8")


def test_save_and_load(tmp_path):
    ws = load_workspace(FIXTURES / "interval_constant.sheaf")
    target = tmp_path / "copy.sheaf"
    save_workspace(ws, target)
    assert load_workspace(target).names() == ["I", "k"]


def test_chain_with_nonzero_square_names_degrees():
    text = "sheafcalc 1\nchain C\ndims 0:1 1:1 2:1\nd 0 1\nd 1 1\nend\n"
    with pytest.raises(ValidationError, match="degrees 0 -> 2"):
        parse_workspace(text)


def test_chain_round_trip_over_a_prime_field():
    text = "sheafcalc 1\nfield fp:5\nchain C\ndims 0:2 1:1\nd 0 1,4\nend\n"
    ws = parse_workspace(text)
    assert ws.get("C").cohomology() == {0: 1}
    assert serialize_workspace(ws) == text


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as info:
        parse_workspace("sheafcalc 1\nfield q\nbudget max_poset_size ten\n")
    assert (info.value.line, info.value.column) == (3, 23)
    with pytest.raises(ParseError):
        parse_workspace("sheafcalc 2\n")
    with pytest.raises(ParseError):
        parse_workspace("")


def test_restriction_to_a_non_face_is_rejected():
    text = ("sheafcalc 1\nspace I\nvertices 0 1\nsimplex 0-1\nend\n"
            "sheaf F on I\nstalk 0 0:1\nstalk 0-1 0:1\nres 0 0-1 0 1\nend\n")
    with pytest.raises(ParseError) as info:
        parse_workspace(text)
    assert info.value.line == 9


def test_duplicate_names_are_rejected():
    text = "sheafcalc 1\nspace I\nvertices 0\nend\nspace I\nvertices 0\nend\n"
    with pytest.raises(ParseError, match="duplicate"):
        parse_workspace(text)


def test_stops_lines():
    ws = parse_workspace("sheafcalc 1\nstops S circle +- . grid 3\n")
    assert ws.get("S").label() == "circle +- . grid 3"
    assert serialize_workspace(ws).endswith("stops S circle +- . grid 3\n")
    assert parse_stop_config("interval + grid 4").grid_steps == 4
    with pytest.raises(ParseError, match="grid_steps"):
        parse_stop_config("interval + grid 2")
    with pytest.raises(ParseError):
        parse_stop_config("interval x")
    with pytest.raises(ParseError):
        parse_stop_config("circle")


def test_thirds_survive_a_round_trip(field):
    ws = Workspace(field)
    ws.add_space("P", SimplicialComplex.path(3))
    text = serialize_workspace(ws)
    assert "coordinate 1 1/3\n" in text
    assert parse_workspace(text).get("P").coordinates[2] == (Fraction(2, 3),)
