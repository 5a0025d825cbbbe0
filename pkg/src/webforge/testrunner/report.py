"""Test reports, deployment verdicts, and the feedback bundle."""

from __future__ import annotations

from dataclasses import dataclass, field

from webforge.errors import InterchangeError

VERDICT_YES = "YES"
VERDICT_NO = "NO"
VERDICT_PARTIAL = "PARTIAL"
VERDICTS = (VERDICT_YES, VERDICT_NO, VERDICT_PARTIAL)

STEP_MET = "met"
STEP_UNMET = "unmet"
STEP_SKIPPED = "skipped"

ERROR_CATEGORIES = (
    "launch-failure",
    "element-not-found",
    "assertion-mismatch",
    "navigation-error",
    "timeout",
    "auth-wall",
    "other",
)

FAILURE_SIGNALS = ("blank-screen", "crash-overlay", "probe-timeout", "process-exit")


@dataclass(frozen=True)
class DriverAction:
    op: str
    target: str = ""
    text: str = ""
    seconds: float = 0.0

    def to_json_dict(self) -> dict:
        return {"op": self.op, "target": self.target, "text": self.text, "seconds": self.seconds}

    @classmethod
    def from_json_dict(cls, data: dict) -> "DriverAction":
        return cls(
            op=str(data.get("op", "")),
            target=str(data.get("target", "")),
            text=str(data.get("text", "")),
            seconds=float(data.get("seconds", 0.0)),
        )


@dataclass(frozen=True)
class StepTrace:
    index: int
    actions: tuple[DriverAction, ...]
    observed: str
    screenshot_ref: str
    verdict: str  # met | unmet | skipped

    def to_json_dict(self) -> dict:
        return {
            "index": self.index,
            "actions": [a.to_json_dict() for a in self.actions],
            "observed": self.observed,
            "screenshot_ref": self.screenshot_ref,
            "verdict": self.verdict,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "StepTrace":
        return cls(
            index=int(data["index"]),
            actions=tuple(DriverAction.from_json_dict(a) for a in data.get("actions", [])),
            observed=str(data.get("observed", "")),
            screenshot_ref=str(data.get("screenshot_ref", "")),
            verdict=str(data.get("verdict", STEP_SKIPPED)),
        )


@dataclass(frozen=True)
class TestReport:
    test_id: str
    verdict: str
    failed_step: int | None = None
    expected: str = ""
    actual: str = ""
    category: str | None = None
    technical: str = ""
    recommendations: tuple[str, ...] = ()
    traces: tuple[StepTrace, ...] = ()

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise InterchangeError(f"unknown verdict {self.verdict!r}")
        if self.verdict == VERDICT_YES and self.failed_step is not None:
            raise InterchangeError("a passing report cannot have a failed step")
        if self.verdict != VERDICT_YES and self.failed_step is None and self.category is None:
            raise InterchangeError(
                "a non-passing report needs a failed step or an error category"
            )
        if self.category is not None and self.category not in ERROR_CATEGORIES:
            raise InterchangeError(f"unknown error category {self.category!r}")

    def to_json_dict(self) -> dict:
        return {
            "test_id": self.test_id,
            "verdict": self.verdict,
            "failed_step": self.failed_step,
            "expected": self.expected,
            "actual": self.actual,
            "category": self.category,
            "technical": self.technical,
            "recommendations": list(self.recommendations),
            "traces": [t.to_json_dict() for t in self.traces],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "TestReport":
        return cls(
            test_id=str(data["test_id"]),
            verdict=str(data["verdict"]),
            failed_step=data.get("failed_step"),
            expected=str(data.get("expected", "")),
            actual=str(data.get("actual", "")),
            category=data.get("category"),
            technical=str(data.get("technical", "")),
            recommendations=tuple(data.get("recommendations", [])),
            traces=tuple(StepTrace.from_json_dict(t) for t in data.get("traces", [])),
        )


@dataclass(frozen=True)
class DeploymentVerdict:
    ok: bool
    screenshot_ref: str = ""
    signals: tuple[str, ...] = ()
    notes: str = ""

    def __post_init__(self):
        if self.ok and self.signals:
            raise InterchangeError("an ok deployment verdict cannot carry failure signals")
        for signal in self.signals:
            if signal not in FAILURE_SIGNALS:
                raise InterchangeError(f"unknown failure signal {signal!r}")

    def to_json_dict(self) -> dict:
        return {
            "ok": self.ok,
            "screenshot_ref": self.screenshot_ref,
            "signals": list(self.signals),
            "notes": self.notes,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "DeploymentVerdict":
        return cls(
            ok=bool(data["ok"]),
            screenshot_ref=str(data.get("screenshot_ref", "")),
            signals=tuple(data.get("signals", [])),
            notes=str(data.get("notes", "")),
        )


@dataclass(frozen=True)
class FeedbackBundle:
    round_index: int
    deployment: DeploymentVerdict
    reports: tuple[TestReport, ...]
    counts: dict = field(default_factory=dict)
    digest: str = ""

    def to_json_dict(self) -> dict:
        return {
            "round_index": self.round_index,
            "deployment": self.deployment.to_json_dict(),
            "reports": [r.to_json_dict() for r in self.reports],
            "counts": dict(self.counts),
            "digest": self.digest,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "FeedbackBundle":
        return cls(
            round_index=int(data["round_index"]),
            deployment=DeploymentVerdict.from_json_dict(data["deployment"]),
            reports=tuple(TestReport.from_json_dict(r) for r in data.get("reports", [])),
            counts=dict(data.get("counts", {})),
            digest=str(data.get("digest", "")),
        )


def tally(reports: tuple[TestReport, ...] | list[TestReport]) -> dict:
    counts = {"yes": 0, "partial": 0, "no": 0, "total": len(reports)}
    for report in reports:
        if report.verdict == VERDICT_YES:
            counts["yes"] += 1
        elif report.verdict == VERDICT_PARTIAL:
            counts["partial"] += 1
        else:
            counts["no"] += 1
    return counts


def build_feedback(
    reports: list[TestReport] | tuple[TestReport, ...],
    deployment: DeploymentVerdict,
    round_index: int,
) -> FeedbackBundle:
    """Assemble the refinement signal for the development agent.

    The digest names every non-passing report exactly once, with failed step,
    expected-versus-actual, category, and recommendations; a fully passing
    round yields a digest with zero failure entries.
    """
    reports = tuple(reports)
    counts = tally(reports)
    lines: list[str] = []
    if not deployment.ok:
        lines.append(
            "Deployment verification failed "
            f"({', '.join(deployment.signals) or 'unknown cause'}); all tests were aborted."
        )
        if deployment.notes:
            lines.append(deployment.notes)
    else:
        lines.append(
            f"Round {round_index} test results: {counts['yes']}/{counts['total']} passed"
            f" (partial {counts['partial']}, failed {counts['no']})."
        )
        for report in reports:
            if report.verdict == VERDICT_YES:
                continue
            step = f"step {report.failed_step}" if report.failed_step else "no single step"
            entry = (
                f"- [{report.test_id}] {report.verdict} at {step}"
                f" ({report.category or 'uncategorized'}):"
                f" expected: {report.expected or '(not stated)'};"
                f" observed: {report.actual or '(not stated)'}"
            )
            if report.recommendations:
                entry += " | recommendations: " + " / ".join(report.recommendations)
            lines.append(entry)
        if counts["yes"] == counts["total"]:
            lines.append("All test cases passed; no failures to report.")
    return FeedbackBundle(
        round_index=round_index,
        deployment=deployment,
        reports=reports,
        counts=counts,
        digest="\n".join(lines),
    )
