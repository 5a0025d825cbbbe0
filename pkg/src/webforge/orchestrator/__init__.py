"""The TDD loop binding test generation, development, and testing."""

from webforge.orchestrator.config import PipelineConfig
from webforge.orchestrator.journal import RunJournal
from webforge.orchestrator.pipeline import (
    Pipeline,
    PipelineResult,
    RoundRecord,
    select_best_round,
    tdd_pass_rate,
)

__all__ = [
    "PipelineConfig",
    "RunJournal",
    "Pipeline",
    "PipelineResult",
    "RoundRecord",
    "select_best_round",
    "tdd_pass_rate",
]
