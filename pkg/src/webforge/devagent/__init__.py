"""Development agent: template choice, context selection, edit application."""

from webforge.devagent.agent import (
    ContextSelection,
    DevelopmentAgent,
    DevTask,
    StepSummary,
    parse_actions,
)

__all__ = [
    "ContextSelection",
    "DevelopmentAgent",
    "DevTask",
    "StepSummary",
    "parse_actions",
]
