"""Evaluation report: machine-readable summary plus plain-text tables."""

from __future__ import annotations

from dataclasses import dataclass

from webforge.errors import EmptyReport
from webforge.evalharness.metrics import (
    EvalRecord,
    EvalVerdictCounts,
    accuracy,
    category_accuracy,
    verdict_counts,
)


@dataclass(frozen=True)
class EvalReport:
    counts: EvalVerdictCounts
    accuracy: float
    yes_rate: float
    partial_rate: float
    no_rate: float
    fail_to_start_rate: float
    by_instruction_category: dict
    by_test_category: dict
    mean_appearance: float | None
    mean_visual_similarity: float | None

    def to_json_dict(self) -> dict:
        return {
            "counts": {
                "yes": self.counts.n_yes,
                "partial": self.counts.n_partial,
                "no": self.counts.n_no,
                "total": self.counts.n_total,
                "fail_to_start": self.counts.fail_to_start,
            },
            "accuracy": self.accuracy,
            "yes_rate": self.yes_rate,
            "partial_rate": self.partial_rate,
            "no_rate": self.no_rate,
            "fail_to_start_rate": self.fail_to_start_rate,
            "by_instruction_category": dict(self.by_instruction_category),
            "by_test_category": dict(self.by_test_category),
            "mean_appearance": self.mean_appearance,
            "mean_visual_similarity": self.mean_visual_similarity,
        }

    def render_text(self) -> str:
        def fmt(value: float | None) -> str:
            return "N.A." if value is None else f"{value:.1f}"

        lines = [
            "overall",
            f"  yes rate:          {fmt(self.yes_rate)}",
            f"  partial rate:      {fmt(self.partial_rate)}",
            f"  no rate:           {fmt(self.no_rate)}",
            f"  fail to start:     {fmt(self.fail_to_start_rate)}",
            f"  accuracy:          {fmt(self.accuracy)}",
            f"  appearance:        {fmt(self.mean_appearance)}",
            f"  vis. similarity:   {fmt(self.mean_visual_similarity)}",
            "by instruction category",
        ]
        for label, value in self.by_instruction_category.items():
            lines.append(f"  {label}: {fmt(value)}")
        lines.append("by test-case category")
        for label, value in self.by_test_category.items():
            lines.append(f"  {label}: {fmt(value)}")
        return "\n".join(lines) + "\n"


def emit_report(records: list[EvalRecord]) -> EvalReport:
    """Aggregate evaluated applications into one report document."""
    if not records:
        raise EmptyReport("no evaluation records supplied")
    counts = verdict_counts(records)
    overall = accuracy(counts)
    appearance = [r.appearance_score for r in records if r.appearance_score is not None]
    similarity = [r.visual_similarity for r in records if r.visual_similarity is not None]
    return EvalReport(
        counts=counts,
        accuracy=overall,
        yes_rate=counts.n_yes / counts.n_total * 100.0,
        partial_rate=counts.n_partial / counts.n_total * 100.0,
        no_rate=counts.n_no / counts.n_total * 100.0,
        fail_to_start_rate=counts.fail_to_start / len(records) * 100.0,
        by_instruction_category=category_accuracy(records, "instruction"),
        by_test_category=category_accuracy(records, "test-case"),
        mean_appearance=sum(appearance) / len(appearance) if appearance else None,
        mean_visual_similarity=sum(similarity) / len(similarity) if similarity else None,
    )
