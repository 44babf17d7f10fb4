"""Run reports: per-check outcomes aggregated over trials, JSON output and a summary table."""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Union

import pandas as pd

from majlab.util import write_json

L = logging.getLogger(__name__)

SCHEMA = "rr-1"


class Status(str, Enum):
    """Outcome of a check."""

    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


@dataclass
class CheckResult:
    """Worst case of one named check over all its trials.

    A trial passes when its margin is at least ``-tol``; residual checks record ``-residual``.
    """

    name: str
    tol: float
    margin: float = math.inf
    trials: int = 0
    failures: int = 0
    inconclusive: int = 0
    worst_case: Dict[str, Any] = field(default_factory=dict)

    @property
    def status(self) -> Status:
        """``fail`` if any trial failed, else ``inconclusive`` if any was flagged."""
        if self.failures:
            return Status.FAIL
        if self.inconclusive:
            return Status.INCONCLUSIVE
        return Status.PASS

    def update(self, margin: float, context: Optional[Dict[str, Any]] = None, flagged=False):
        """Fold one trial into the aggregate."""
        self.trials += 1
        if not margin >= -self.tol:
            self.failures += 1
        elif flagged:
            self.inconclusive += 1
        if margin < self.margin or self.trials == 1:
            self.margin = float(margin)
            self.worst_case = dict(context or {})

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready view."""
        return {
            "name": self.name,
            "status": self.status.value,
            "margin": self.margin,
            "tol": self.tol,
            "trials": self.trials,
            "failures": self.failures,
            "inconclusive": self.inconclusive,
            "worst_case": self.worst_case,
        }


@dataclass
class RunReport:
    """Everything a subcommand checked, in the order checks were first recorded."""

    subcommand: str
    config: Dict[str, Any]
    checks: Dict[str, CheckResult] = field(default_factory=dict)
    schema: str = SCHEMA

    def record(
        self,
        name: str,
        margin: float,
        tol: float,
        context: Optional[Dict[str, Any]] = None,
        flagged: bool = False,
    ):
        # pylint: disable=too-many-arguments
        """Add one trial of check ``name``."""
        check = self.checks.setdefault(name, CheckResult(name, tol))
        check.update(margin, context, flagged)
        if not margin >= -tol:
            L.warning("Check %s failed: margin %.3e < -%.1e at %s", name, margin, tol, context)

    @property
    def totals(self) -> Dict[str, int]:
        """Counts of checks per status and of trials."""
        statuses = [check.status for check in self.checks.values()]
        return {
            "checks": len(statuses),
            "passed": statuses.count(Status.PASS),
            "failed": statuses.count(Status.FAIL),
            "inconclusive": statuses.count(Status.INCONCLUSIVE),
            "trials": sum(check.trials for check in self.checks.values()),
        }

    @property
    def ok(self) -> bool:
        """No check failed."""
        return all(check.status is not Status.FAIL for check in self.checks.values())

    @property
    def exit_code(self) -> int:
        """``0`` when every check passed or was inconclusive, ``1`` otherwise."""
        return 0 if self.ok else 1

    def summary_frame(self) -> pd.DataFrame:
        """One row per check with its worst margin."""
        return pd.DataFrame(
            [
                {
                    "check": check.name,
                    "status": check.status.value,
                    "worst_margin": check.margin,
                    "tol": check.tol,
                    "trials": check.trials,
                    "failures": check.failures,
                }
                for check in self.checks.values()
            ],
            columns=["check", "status", "worst_margin", "tol", "trials", "failures"],
        )

    def summary(self) -> str:
        """Human-readable table followed by the totals."""
        totals = self.totals
        lines = []
        if self.checks:
            lines.append(self.summary_frame().to_string(index=False))
        lines.append(
            f"{self.subcommand}: {totals['passed']} passed, {totals['failed']} failed, "
            f"{totals['inconclusive']} inconclusive over {totals['trials']} trials"
        )
        return "\n".join(lines)

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready view."""
        return {
            "schema": self.schema,
            "subcommand": self.subcommand,
            "config": self.config,
            "checks": [check.to_dict() for check in self.checks.values()],
            "totals": self.totals,
            "ok": self.ok,
        }

    def write(self, path: Union[str, Path]):
        """Write as JSON."""
        write_json(Path(path), self.to_dict())
