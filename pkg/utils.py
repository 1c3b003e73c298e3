import pandas as pd
from typing import Any, Dict, Hashable, Iterable, List, Optional, Tuple

REPORT_COLUMNS = ["name", "expected", "got", "tolerance", "passed"]


class Utils:
    @staticmethod
    def format_graded(dims: Dict[int, int]) -> str:
        """Format graded dimensions as '0:1 1:2' (zero complex is '0')"""
        items = [f"{n}:{k}" for n, k in sorted(dims.items()) if k]
        return " ".join(items) if items else "0"

    @staticmethod
    def parse_graded(text: str) -> Dict[int, int]:
        """Inverse of format_graded"""
        text = text.strip()
        if text in ("", "0"):
            return {}
        out = {}
        for item in text.split():
            degree, dim = item.split(":")
            out[int(degree)] = int(dim)
        return out

    @staticmethod
    def format_stalks(base, table: Dict[Hashable, Dict[int, int]]) -> str:
        """Stalk table in poset order, zero stalks omitted"""
        parts = [f"{base.label(s)}={Utils.format_graded(table[s])}" for s in base.elements if table.get(s)]
        return "; ".join(parts) if parts else "0"

    @staticmethod
    def format_rank_table(base, ranks: Dict[Hashable, Dict[int, int]]) -> str:
        parts = [f"{base.label(s)}={Utils.format_graded(ranks[s])}" for s in base.elements if ranks.get(s)]
        return "; ".join(parts) if parts else "0"

    @staticmethod
    def format_restriction_ranks(base, ranks: Dict[Tuple[Hashable, Hashable], Dict[int, int]]) -> str:
        """Cohomology ranks of restrictions, keyed 's<t' in covering-pair order"""
        parts = [f"{base.label(s)}<{base.label(t)}={Utils.format_graded(ranks[(s, t)])}"
                 for s, t in base.covering_pairs() if ranks.get((s, t))]
        return "; ".join(parts) if parts else "0"

    @staticmethod
    def check_record(name: str, expected: Any, got: Any, passed: Optional[bool] = None) -> Dict[str, Any]:
        """One report row; passes when expected == got unless told otherwise"""
        return {
            "name": name,
            "expected": str(expected),
            "got": str(got),
            "tolerance": "exact",
            "passed": bool(expected == got) if passed is None else bool(passed),
        }

    @staticmethod
    def create_report_table(records: Iterable[Dict[str, Any]]) -> pd.DataFrame:
        """Report rows in the order given"""
        records = list(records)
        if not records:
            return pd.DataFrame(columns=REPORT_COLUMNS)
        return pd.DataFrame.from_records(records, columns=REPORT_COLUMNS)

    @staticmethod
    def calculate_pass_rate(report: pd.DataFrame) -> float:
        """Percentage of passing checks"""
        if report.empty:
            return 0.0
        return float(report["passed"].mean() * 100)

    @staticmethod
    def failed_checks(report: pd.DataFrame) -> List[str]:
        if report.empty:
            return []
        return report.loc[~report["passed"], "name"].tolist()

    @staticmethod
    def format_duration(seconds: float) -> str:
        """Format elapsed time for log lines"""
        if seconds >= 60:
            minutes = int(seconds // 60)
            return f"{minutes} minute{'s' if minutes != 1 else ''} {seconds - 60 * minutes:.1f}s"
        return f"{seconds:.2f}s"
