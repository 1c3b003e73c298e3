import pandas as pd
import pytest

from errors import PreconditionError
from harness import VerificationSuite, write_report
from settings_manager import SettingsManager
from utils import REPORT_COLUMNS


def suite():
    return VerificationSuite(SettingsManager(environ={}))


def test_group_order_is_fixed():
    names = [g.name for g in suite().groups()]
    assert names[0] == "kunneth"
    assert names[-1] == "oracles"
    assert len(names) == len(set(names)) == 12


def test_kunneth_group():
    report = suite().run(["kunneth"])
    assert list(report.columns) == REPORT_COLUMNS
    assert len(report) == 54
    assert report["name"].iloc[0] == "künneth interval×interval 1_(0|0) stalks"
    assert report["passed"].all()


def test_rows_keep_suite_order_with_threads():
    report = suite().run(["triangles", "kunneth"], jobs=2)
    assert report["name"].iloc[0].startswith("künneth")
    assert report["name"].iloc[-1].startswith("circle")


def test_unknown_group_is_refused():
    with pytest.raises(PreconditionError, match="nothing"):
        suite().run(["kunneth", "nothing"])
    report = suite().run([])
    assert report.empty
    assert list(report.columns) == REPORT_COLUMNS


def test_write_report(tmp_path):
    report = suite().run(["kunneth"])
    path = tmp_path / "report.csv"
    write_report(report, path)
    text = path.read_text(encoding="utf-8")
    assert text.startswith("name,expected,got,tolerance,passed\n")
    assert "\r" not in text
    assert len(pd.read_csv(path)) == 54
