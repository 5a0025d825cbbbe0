"""External-evaluation arithmetic: accuracy, alignment, visual scoring."""

from webforge.evalharness.metrics import (
    AlignmentResult,
    EvalRecord,
    EvalVerdictCounts,
    TestRow,
    accuracy,
    accuracy_from_rates,
    alignment_rate,
    category_accuracy,
    verdict_counts,
)
from webforge.evalharness.report import EvalReport, emit_report
from webforge.evalharness.visual import RUBRIC_ASPECTS, build_visual_prompt, parse_score

__all__ = [
    "AlignmentResult",
    "EvalRecord",
    "EvalVerdictCounts",
    "TestRow",
    "accuracy",
    "accuracy_from_rates",
    "alignment_rate",
    "category_accuracy",
    "verdict_counts",
    "EvalReport",
    "emit_report",
    "RUBRIC_ASPECTS",
    "build_visual_prompt",
    "parse_score",
]
