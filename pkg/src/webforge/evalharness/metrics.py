"""Verdict accounting: weighted accuracy, category breakdowns, alignment.

Accuracy weights a full pass as 1 and a partial pass as 0.5::

    accuracy = (n_yes + 0.5 * n_partial) / n_total * 100

Applications that failed to start contribute all of their tests as failures.
A category in which *every* application failed to start has no defined
accuracy and is reported as N.A. (None) instead of zero.
"""

from __future__ import annotations

from dataclasses import dataclass

from webforge.errors import UnlabeledTest, WebforgeError, ZeroTotal
from webforge.testrunner.report import VERDICT_NO, VERDICT_PARTIAL, VERDICT_YES, VERDICTS


@dataclass(frozen=True)
class EvalVerdictCounts:
    n_yes: int
    n_partial: int
    n_no: int
    n_total: int
    fail_to_start: int = 0

    def __post_init__(self):
        if min(self.n_yes, self.n_partial, self.n_no, self.n_total, self.fail_to_start) < 0:
            raise WebforgeError("verdict counts must be non-negative")
        if self.n_yes + self.n_partial + self.n_no != self.n_total:
            raise WebforgeError("yes + partial + no must equal total")


def accuracy(counts: EvalVerdictCounts) -> float:
    """Weighted accuracy as a percentage."""
    if counts.n_total == 0:
        raise ZeroTotal("accuracy is undefined over zero test cases")
    return (counts.n_yes + 0.5 * counts.n_partial) / counts.n_total * 100.0


def accuracy_from_rates(yes_rate: float, partial_rate: float) -> float:
    """Accuracy from percentage rates (as published result tables report them)."""
    return yes_rate + 0.5 * partial_rate


@dataclass(frozen=True)
class TestRow:
    """One evaluated test case with both category labels."""

    verdict: str
    instruction_category: str
    test_category: str

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise WebforgeError(f"unknown verdict {self.verdict!r}")


@dataclass(frozen=True)
class EvalRecord:
    """One evaluated application."""

    app_id: str
    tests: tuple[TestRow, ...]
    fail_to_start: bool = False
    appearance_score: float | None = None
    visual_similarity: float | None = None

    def __post_init__(self):
        for score in (self.appearance_score, self.visual_similarity):
            if score is not None and not (1.0 <= score <= 5.0):
                raise WebforgeError(f"scores live in [1, 5], got {score}")


def _effective_verdict(record: EvalRecord, row: TestRow) -> str:
    return VERDICT_NO if record.fail_to_start else row.verdict


def verdict_counts(records: list[EvalRecord]) -> EvalVerdictCounts:
    n_yes = n_partial = n_no = 0
    for record in records:
        for row in record.tests:
            verdict = _effective_verdict(record, row)
            if verdict == VERDICT_YES:
                n_yes += 1
            elif verdict == VERDICT_PARTIAL:
                n_partial += 1
            else:
                n_no += 1
    total = n_yes + n_partial + n_no
    failed = sum(1 for record in records if record.fail_to_start)
    return EvalVerdictCounts(n_yes, n_partial, n_no, total, failed)


def category_accuracy(
    records: list[EvalRecord], axis: str = "instruction"
) -> dict[str, float | None]:
    """Accuracy per category along one label axis.

    ``axis`` is ``instruction`` or ``test-case``. Categories where every
    covering application failed to start map to None (rendered as N.A.).
    """
    if axis not in ("instruction", "test-case"):
        raise WebforgeError(f"unknown category axis {axis!r}")
    buckets: dict[str, list[tuple[EvalRecord, TestRow]]] = {}
    for record in records:
        for row in record.tests:
            label = (
                row.instruction_category if axis == "instruction" else row.test_category
            )
            if not label:
                raise UnlabeledTest(
                    f"test in app {record.app_id!r} is missing its {axis} category"
                )
            buckets.setdefault(label, []).append((record, row))

    out: dict[str, float | None] = {}
    for label in sorted(buckets):
        pairs = buckets[label]
        if all(record.fail_to_start for record, _ in pairs):
            out[label] = None
            continue
        n_yes = sum(1 for r, row in pairs if _effective_verdict(r, row) == VERDICT_YES)
        n_partial = sum(
            1 for r, row in pairs if _effective_verdict(r, row) == VERDICT_PARTIAL
        )
        out[label] = (n_yes + 0.5 * n_partial) / len(pairs) * 100.0
    return out


@dataclass(frozen=True)
class AlignmentResult:
    """Agent-vs-manual agreement, full and restricted to clear-cut cases."""

    rate: float
    matched: int
    total: int
    restricted_rate: float | None
    restricted_matched: int
    restricted_total: int
    note: str | None = None


def alignment_rate(
    pairs: list[tuple[str, str]], published_rate: float | None = None
) -> AlignmentResult:
    """Agreement between (agent verdict, manual verdict) pairs, in percent.

    Also computes the rate restricted to pairs whose manual verdict is a
    clear YES or NO. The exact quotient is reported; when a published figure
    is supplied and disagrees by more than 0.05 points, the result carries a
    note documenting the discrepancy instead of silently adopting either
    number.
    """
    if not pairs:
        raise ZeroTotal("alignment rate is undefined over zero pairs")
    for agent, manual in pairs:
        if agent not in VERDICTS or manual not in VERDICTS:
            raise WebforgeError(f"verdicts must be YES/NO/PARTIAL, got {(agent, manual)}")
    matched = sum(1 for agent, manual in pairs if agent == manual)
    total = len(pairs)
    rate = matched / total * 100.0

    restricted = [(a, m) for a, m in pairs if m in (VERDICT_YES, VERDICT_NO)]
    restricted_matched = sum(1 for a, m in restricted if a == m)
    restricted_total = len(restricted)
    restricted_rate = (
        restricted_matched / restricted_total * 100.0 if restricted_total else None
    )

    note = None
    if published_rate is not None and abs(published_rate - rate) > 0.05:
        note = (
            f"computed alignment rate {rate:.2f}% ({matched}/{total}) differs from "
            f"the supplied published figure {published_rate}%; reporting the exact quotient"
        )
    return AlignmentResult(
        rate=rate,
        matched=matched,
        total=total,
        restricted_rate=restricted_rate,
        restricted_matched=restricted_matched,
        restricted_total=restricted_total,
        note=note,
    )
