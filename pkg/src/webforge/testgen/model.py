"""Domain types for requirements and soap-opera test cases."""

from __future__ import annotations

from dataclasses import dataclass

from webforge.errors import InterchangeError, WebforgeError
from webforge.gateway.types import ImageAttachment

REQUIREMENT_KINDS = ("functionality", "layout-constraint", "design-element")
ORIGINS = ("explicit", "inferred")
TEST_CATEGORIES = ("functionality", "data-display", "design-validation")
DATA_SOURCE_KINDS = ("inline-dataset", "database", "external-api")

# Marker for elaboration aspects that do not apply to a requirement.
NONE_MARKER = "none"


@dataclass(frozen=True)
class UserRequest:
    """What the user asked for: text, optionally a design image."""

    description: str
    image: ImageAttachment | None = None

    def __post_init__(self):
        if not self.description.strip():
            raise WebforgeError("request description is empty")


@dataclass(frozen=True)
class Requirement:
    id: str
    statement: str
    kind: str = "functionality"
    origin: str = "explicit"

    def __post_init__(self):
        if not self.id or not self.statement.strip():
            raise InterchangeError("requirement needs an id and a statement")
        if self.kind not in REQUIREMENT_KINDS:
            raise InterchangeError(f"unknown requirement kind {self.kind!r}")
        if self.origin not in ORIGINS:
            raise InterchangeError(f"unknown requirement origin {self.origin!r}")


@dataclass(frozen=True)
class DataSourceSpec:
    """Where a requirement's data comes from.

    * inline-dataset: payload carries the literal content;
    * database: payload carries a non-empty schema plus setup instructions;
    * external-api: payload names the endpoint and must say whether it is a
      placeholder (inventing live integrations is worse than admitting one).
    """

    kind: str
    payload: dict

    def __post_init__(self):
        if self.kind not in DATA_SOURCE_KINDS:
            raise InterchangeError(f"unknown data source kind {self.kind!r}")
        if self.kind == "database" and not str(self.payload.get("schema", "")).strip():
            raise InterchangeError("database data source needs a non-empty schema")
        if self.kind == "external-api" and "placeholder" not in self.payload:
            raise InterchangeError(
                "external-api data source must state whether it is a placeholder"
            )


@dataclass(frozen=True)
class DetailedRequirement:
    requirement_id: str
    functional_spec: str
    static_ui_spec: str
    interaction_spec: str
    data_sources: tuple[DataSourceSpec, ...] = ()

    def __post_init__(self):
        for name, value in (
            ("functional_spec", self.functional_spec),
            ("static_ui_spec", self.static_ui_spec),
            ("interaction_spec", self.interaction_spec),
        ):
            if not value.strip():
                raise InterchangeError(f"{name} must be populated (use {NONE_MARKER!r})")


@dataclass(frozen=True)
class TestStep:
    index: int
    action: str
    expectation: str

    def __post_init__(self):
        if self.index < 1:
            raise InterchangeError("step indices are 1-based")
        if not self.action.strip() or not self.expectation.strip():
            raise InterchangeError("steps need a non-empty action and expectation")


@dataclass(frozen=True)
class Persona:
    name: str
    goal: str


@dataclass(frozen=True)
class SoapOperaTestCase:
    """A persona-driven end-to-end scenario for one requirement."""

    id: str
    requirement_id: str
    persona: Persona
    steps: tuple[TestStep, ...]
    category: str = "functionality"

    def __post_init__(self):
        if not self.steps:
            raise InterchangeError(f"test case {self.id!r} has no steps")
        indices = [step.index for step in self.steps]
        if indices != list(range(1, len(indices) + 1)):
            raise InterchangeError(
                f"test case {self.id!r} step indices must be contiguous from 1"
            )
        if self.category not in TEST_CATEGORIES:
            raise InterchangeError(f"unknown test category {self.category!r}")


@dataclass(frozen=True)
class TestSuite:
    requirements: tuple[Requirement, ...]
    detailed: tuple[DetailedRequirement, ...]
    tests: tuple[SoapOperaTestCase, ...]

    def __post_init__(self):
        req_ids = [req.id for req in self.requirements]
        if len(set(req_ids)) != len(req_ids):
            raise InterchangeError("requirement ids must be unique within a suite")
        for det in self.detailed:
            if det.requirement_id not in req_ids:
                raise InterchangeError(
                    f"detailed requirement references unknown id {det.requirement_id!r}"
                )
        covered = [test.requirement_id for test in self.tests]
        if sorted(covered) != sorted(req_ids):
            raise InterchangeError(
                "test cases and requirements must map one-to-one via requirement id"
            )
        test_ids = [test.id for test in self.tests]
        if len(set(test_ids)) != len(test_ids):
            raise InterchangeError("test ids must be unique within a suite")


@dataclass(frozen=True)
class StepBudget:
    """Driver effort limits while executing one test step."""

    actions_per_step: int = 15
    retry_bound: int = 2

    def __post_init__(self):
        if self.actions_per_step < 1 or self.retry_bound < 0:
            raise WebforgeError("step budget bounds must be positive / non-negative")


# Default field used when a model omits the test-case category.
DEFAULT_CATEGORY = "functionality"
