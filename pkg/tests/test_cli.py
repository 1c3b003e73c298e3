from io import StringIO
from pathlib import Path

import pytest

from cli import EXIT_BUDGET, EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, main
from formats import load_workspace

FIXTURE = str(Path(__file__).parent / "fixtures" / "interval_constant.sheaf")


def run(*argv):
    out = StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_stalk_cohomology_and_sections():
    assert run("--fixture", FIXTURE, "cohomology", "k") == (EXIT_OK, "0=0:1; 1=0:1; 0-1=0:1\n")
    assert run("--fixture", FIXTURE, "sections", "k") == (EXIT_OK, "0:1\n")
    assert run("--fixture", FIXTURE, "hom", "k", "k") == (EXIT_OK, "0:1\n")


def test_microstalk_verb():
    assert run("--fixture", FIXTURE, "microstalk", "k", "0", "1-") == (EXIT_OK, "0\n")
    code, _ = run("--fixture", FIXTURE, "microstalk", "k", "0", "7-")
    assert code == EXIT_PRECONDITION


def test_unknown_verb_is_a_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"], out=StringIO())
    assert info.value.code == 2


def test_convolve_with_a_sheaf_is_refused():
    code, _ = run("--fixture", FIXTURE, "convolve", "k", "k")
    assert code == EXIT_PRECONDITION


def test_budgets_map_to_exit_four(tmp_path):
    star = tmp_path / "star.sheaf"
    star.write_text("sheafcalc 1\nspace P\nvertices 0 1 2\nsimplex 0-1\nsimplex 1-2\nend\nsheaf z on P\nend\n",
                    encoding="utf-8")
    code, _ = run("--fixture", str(star), "--budget", "max_link_size=1", "ss", "z")
    assert code == EXIT_BUDGET
    assert run("--fixture", FIXTURE, "--budget", "max_link_size=0", "ss", "k")[0] == EXIT_PRECONDITION
    code, _ = run("--fixture", FIXTURE, "--budget", "1", "cohomology", "k")
    assert code == EXIT_BUDGET


def test_bad_inputs(tmp_path):
    broken = tmp_path / "broken.sheaf"
    broken.write_text("sheafcalc 1\nspace\n", encoding="utf-8")
    assert run("--fixture", str(broken), "cohomology", "k")[0] == EXIT_PARSE
    assert run("--fixture", FIXTURE, "--field", "fp:5", "cohomology", "k")[0] == EXIT_PRECONDITION
    assert run("--fixture", FIXTURE, "cohomology", "missing")[0] == EXIT_PRECONDITION


def test_output_writes_a_workspace(tmp_path):
    target = tmp_path / "out.sheaf"
    code, text = run("--fixture", FIXTURE, "--output", str(target), "tensor", "k", "k")
    assert code == EXIT_OK
    assert text == "0=0:1; 1=0:1; 0-1=0:1\n"
    assert load_workspace(target).names() == ["I", "result"]


def test_fixture_budgets_apply_unless_overridden(tmp_path):
    capped = tmp_path / "capped.sheaf"
    text = Path(FIXTURE).read_text(encoding="utf-8").replace("field q\n", "field q\nbudget max_poset_size 2\n")
    capped.write_text(text, encoding="utf-8")
    assert run("--fixture", str(capped), "cohomology", "k")[0] == EXIT_BUDGET
    assert run("--fixture", str(capped), "--budget", "10", "cohomology", "k")[0] == EXIT_OK


def test_unknown_check_group_is_refused():
    assert run("verify-all", "--only", "kunneth-typo")[0] == EXIT_PRECONDITION
