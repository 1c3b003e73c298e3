from utils import Utils


def test_graded_formatting():
    assert Utils.format_graded({}) == "0"
    assert Utils.format_graded({1: 2, -1: 1, 0: 0}) == "-1:1 1:2"
    assert Utils.parse_graded("-1:1 1:2") == {-1: 1, 1: 2}
    assert Utils.parse_graded("0") == {}


def test_stalk_tables(interval):
    table = {(0,): {0: 1}, (1,): {}, (0, 1): {1: 1}}
    assert Utils.format_stalks(interval, table) == "0=0:1; 0-1=1:1"
    assert Utils.format_stalks(interval, {}) == "0"
    ranks = {((0, 1), (1,)): {0: 1}}
    assert Utils.format_restriction_ranks(interval, ranks) == "0-1<1=0:1"


def test_report_helpers():
    records = [Utils.check_record("a", "0:1", "0:1"), Utils.check_record("b", "0", "1:1"),
               Utils.check_record("c", 1, 2, passed=True)]
    report = Utils.create_report_table(records)
    assert list(report["name"]) == ["a", "b", "c"]
    assert Utils.failed_checks(report) == ["b"]
    assert Utils.create_report_table([]).empty
    assert Utils.failed_checks(Utils.create_report_table([])) == []


def test_format_duration():
    assert Utils.format_duration(1.234) == "1.23s"
    assert Utils.format_duration(61) == "1 minute 1.0s"
