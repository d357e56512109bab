"""Structured pass/fail results with signed margins.

Checks in this package never raise on a *failed condition*; failure is
data.  A Verdict carries the signed margin of every condition it tested
(nonnegative margin means satisfied) so that grid scans can locate first
violations by sign change.  Only malformed inputs raise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np


@dataclass(frozen=True)
class Verdict:
    """Outcome of an admissibility / divisibility / consistency check.

    margins maps condition names to signed margins (>= 0 satisfied).
    first_violation is the location (a time or Laplace abscissa) of the
    earliest violated condition when the check scans a grid, else None.
    curves optionally holds per-grid-point margin arrays for scan checks.
    """

    passed: bool
    margins: Mapping[str, float]
    first_violation: float | None = None
    notes: tuple[str, ...] = ()
    curves: Mapping[str, np.ndarray] | None = None

    def __bool__(self) -> bool:
        return self.passed

    def margin(self, name: str) -> float:
        return self.margins[name]

    def summary(self) -> str:
        status = "pass" if self.passed else "FAIL"
        parts = [f"{k}={v:.3g}" for k, v in self.margins.items()]
        text = f"{status} ({', '.join(parts)})"
        if self.first_violation is not None:
            text += f" first violation at {self.first_violation:.6g}"
        return text

    def to_dict(self) -> dict:
        out: dict = {
            "passed": bool(self.passed),
            "margins": {k: float(v) for k, v in self.margins.items()},
        }
        if self.first_violation is not None:
            out["first_violation"] = float(self.first_violation)
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def passed_verdict(margins: Mapping[str, float], **kw) -> Verdict:
    return Verdict(passed=True, margins=dict(margins), **kw)


def failed_verdict(margins: Mapping[str, float], **kw) -> Verdict:
    return Verdict(passed=False, margins=dict(margins), **kw)
