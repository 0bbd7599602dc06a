"""Structured results for inequality checks and CLI report rows."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


def safe_ratio(lhs: float, rhs: float) -> float:
    if rhs > 0.0:
        return lhs / rhs
    return 0.0 if lhs == 0.0 else math.inf


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of a single inequality check: measured LHS against the
    asserted RHS, with enough parameter echo to reproduce the instance."""

    lhs: float
    rhs: float
    ratio: float
    params: dict
    seed: int | None = None
    which: str | None = None
    passed: bool | None = None


def make_report(lhs, rhs, params, seed=None, which=None, tol: float = 0.0) -> VerificationReport:
    lhs = float(lhs)
    rhs = float(rhs)
    return VerificationReport(
        lhs=lhs,
        rhs=rhs,
        ratio=safe_ratio(lhs, rhs),
        params=dict(params),
        seed=seed,
        which=which,
        passed=bool(lhs <= rhs * (1.0 + tol)),
    )


CSV_COLUMNS = ("suite", "case", "params", "lhs", "rhs", "ratio", "verdict", "seed", "wall_time")


@dataclass
class ReportRow:
    suite: str
    case: str
    params: dict = field(default_factory=dict)
    lhs: float = math.nan
    rhs: float = math.nan
    ratio: float = math.nan
    verdict: str = "pass"
    seed: int | None = None
    wall_time: float = 0.0


def _fmt_float(v: float) -> str:
    # repr round-trips doubles and is stable, which keeps reports byte-identical
    return repr(float(v))


def _fmt_params(params: dict) -> str:
    return json.dumps(params, sort_keys=True, separators=(",", ":"))


def rows_to_csv(rows) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for r in rows:
        lines.append(
            ",".join(
                (
                    r.suite,
                    r.case,
                    '"' + _fmt_params(r.params).replace('"', '""') + '"',
                    _fmt_float(r.lhs),
                    _fmt_float(r.rhs),
                    _fmt_float(r.ratio),
                    r.verdict,
                    "" if r.seed is None else str(r.seed),
                    _fmt_float(r.wall_time),
                )
            )
        )
    return "\n".join(lines) + "\n"


def rows_to_json(rows, meta: dict | None = None) -> str:
    payload = {
        "meta": dict(meta or {}),
        "rows": [
            {
                "suite": r.suite,
                "case": r.case,
                "params": r.params,
                "lhs": r.lhs,
                "rhs": r.rhs,
                "ratio": r.ratio,
                "verdict": r.verdict,
                "seed": r.seed,
                "wall_time": r.wall_time,
            }
            for r in rows
        ],
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"
