import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import pandas as pd

from models import BornReport
from schemas import ToleranceCheck


@dataclass
class RunResult:
    results: Dict[str, Any]
    checks: List[ToleranceCheck] = field(default_factory=list)
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)


def _finite(value: Optional[float]) -> Optional[float]:
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def tolerance_check(name: str, value: Optional[float], expected: Optional[float],
                    tolerance: Optional[float]) -> ToleranceCheck:
    """|value - expected| <= tolerance; a missing or non-finite value fails."""
    v, e = _finite(value), _finite(expected)
    passed = v is not None and e is not None and tolerance is not None \
        and abs(v - e) <= tolerance
    return ToleranceCheck(name=name, value=v, expected=e, tolerance=tolerance, passed=passed)


def flag_check(name: str, passed: bool, value: Optional[float] = None) -> ToleranceCheck:
    return ToleranceCheck(name=name, value=_finite(value), expected=None, tolerance=None,
                          passed=bool(passed))


def born_checks(report: BornReport, n_sigma: float, prefix: str = "born") -> List[ToleranceCheck]:
    """One check per channel: |f_j - p_j(0)| within n_sigma binomial standard errors."""
    n = max(report.n_completed, 1)
    checks = []
    for j, (f, p) in enumerate(zip(report.frequencies, report.initial)):
        se = math.sqrt(p * (1.0 - p) / n)
        checks.append(tolerance_check(f"{prefix}_frequency[{j}]", f, p, n_sigma * se))
    if report.n_completed == 0:
        checks.append(flag_check(f"{prefix}_completed", False, 0))
    return checks


def born_results(report: BornReport) -> Dict[str, Any]:
    out = asdict(report)
    out["deviations_sigma"] = [_finite(d) for d in report.deviations()]
    out["mean_hitting_time"] = _finite(report.mean_hitting_time)
    out["hitting_time_stddev"] = _finite(report.hitting_time_stddev)
    return out


def records_frame(records) -> pd.DataFrame:
    """Per-trajectory table; a timed-out trajectory has winner -1."""
    return pd.DataFrame({
        "trajectory_id": [r.trajectory_id for r in records],
        "winner": [-1 if r.winner is None else r.winner for r in records],
        "hitting_time": [r.hitting_time for r in records],
        "steps": [r.steps for r in records],
    })
