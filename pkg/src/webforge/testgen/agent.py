"""The three-stage test generation agent, plus the single-shot baseline.

Stage 1 decomposes the request into discrete requirements (explicit and
inferred), stage 2 elaborates each into functional / static-UI / interaction
specs with data sources, stage 3 emits exactly one soap-opera test case per
requirement. The single-shot ("straightforward") mode produces requirements
and test cases in one completion and exists as a comparison baseline.
"""

from __future__ import annotations

import string
from importlib import resources

from webforge.errors import (
    EmptyDecomposition,
    InterchangeError,
    SuiteStageError,
    WebforgeError,
)
from webforge.gateway import Grammar, LLMGateway, PromptBundle, ProviderConfig
from webforge.testgen.model import (
    DEFAULT_CATEGORY,
    NONE_MARKER,
    ORIGINS,
    REQUIREMENT_KINDS,
    TEST_CATEGORIES,
    DataSourceSpec,
    DetailedRequirement,
    Persona,
    Requirement,
    SoapOperaTestCase,
    TestStep,
    TestSuite,
    UserRequest,
)

SYSTEM_TEXT = (
    "You are part of an automated web development pipeline. Follow the "
    "requested output format exactly."
)

_WITH_IMAGE_NOTE = (
    "\nA design image of the expected final application is attached; treat it "
    "as part of the requirements.\n"
)


def _load_prompt(name: str) -> string.Template:
    text = resources.files("webforge.testgen").joinpath(f"prompts/{name}.txt").read_text(
        encoding="utf-8"
    )
    return string.Template(text)


def _coerce_str(value, default: str = "") -> str:
    if value is None:
        return default
    return str(value).strip() or default


class TestGenerator:
    def __init__(self, gateway: LLMGateway, config: ProviderConfig):
        self.gateway = gateway
        self.config = config
        self._prompts = {
            name: _load_prompt(name)
            for name in ("decompose", "elaborate", "testcase", "straightforward")
        }

    # -- stage 1 ------------------------------------------------------------

    def decompose_requirements(self, request: UserRequest) -> list[Requirement]:
        template = self._prompts["decompose"]
        text = template.substitute(
            REQUEST=request.description,
            IMAGE_NOTE=_WITH_IMAGE_NOTE if request.image else "",
        )
        turns: tuple = (text,) if request.image is None else (text, request.image)
        bundle = PromptBundle(SYSTEM_TEXT, turns, Grammar.JSON_ARRAY)
        doc = self.gateway.complete_structured(
            bundle, self.config, validator=_validate_requirement_rows
        )
        rows = doc.document
        if not rows:
            raise EmptyDecomposition("model returned zero requirements")
        return _rows_to_requirements(rows)

    # -- stage 2 ------------------------------------------------------------

    def elaborate(
        self,
        req: Requirement,
        request: UserRequest,
        siblings: tuple[Requirement, ...] = (),
    ) -> DetailedRequirement:
        template = self._prompts["elaborate"]
        listing = "\n".join(
            f"- {sib.id}: {sib.statement}" for sib in (siblings or (req,))
        )
        text = template.substitute(
            REQUEST=request.description,
            REQUIREMENTS=listing,
            REQUIREMENT=f"{req.id}: {req.statement} (kind: {req.kind})",
        )
        bundle = PromptBundle(SYSTEM_TEXT, (text,), Grammar.JSON_ARRAY)
        doc = self.gateway.complete_structured(
            bundle, self.config, validator=_validate_single_object
        )
        row = doc.document[0]
        sources = tuple(
            DataSourceSpec(kind=_coerce_str(item.get("kind")), payload=dict(item.get("payload", {})))
            for item in row.get("data_sources", [])
            if isinstance(item, dict)
        )
        return DetailedRequirement(
            requirement_id=req.id,
            functional_spec=_coerce_str(row.get("functional_spec"), NONE_MARKER),
            static_ui_spec=_coerce_str(row.get("static_ui_spec"), NONE_MARKER),
            interaction_spec=_coerce_str(row.get("interaction_spec"), NONE_MARKER),
            data_sources=sources,
        )

    # -- stage 3 ------------------------------------------------------------

    def generate_test_case(
        self, detailed: DetailedRequirement, requirement: Requirement | None = None
    ) -> SoapOperaTestCase:
        template = self._prompts["testcase"]
        statement = requirement.statement if requirement else detailed.requirement_id
        text = template.substitute(
            REQUIREMENT=f"{detailed.requirement_id}: {statement}",
            DETAILED=(
                f"functional: {detailed.functional_spec}\n"
                f"static UI: {detailed.static_ui_spec}\n"
                f"interaction: {detailed.interaction_spec}"
            ),
        )
        bundle = PromptBundle(SYSTEM_TEXT, (text,), Grammar.JSON_ARRAY)
        doc = self.gateway.complete_structured(
            bundle, self.config, validator=_validate_test_case_row
        )
        row = doc.document[0]
        return _row_to_test_case(row, detailed.requirement_id)

    # -- whole suite ---------------------------------------------------------

    def generate_suite(self, request: UserRequest) -> TestSuite:
        try:
            requirements = self.decompose_requirements(request)
        except WebforgeError as exc:
            raise SuiteStageError("decomposition", exc) from exc

        detailed: list[DetailedRequirement] = []
        all_reqs = tuple(requirements)
        for req in requirements:
            try:
                detailed.append(self.elaborate(req, request, siblings=all_reqs))
            except WebforgeError as exc:
                raise SuiteStageError("elaboration", exc) from exc

        tests: list[SoapOperaTestCase] = []
        by_id = {req.id: req for req in requirements}
        for det in detailed:
            try:
                tests.append(self.generate_test_case(det, by_id[det.requirement_id]))
            except WebforgeError as exc:
                raise SuiteStageError("test-case-generation", exc) from exc

        return TestSuite(tuple(requirements), tuple(detailed), tuple(tests))

    def generate_suite_straightforward(self, request: UserRequest) -> TestSuite:
        """Single-shot baseline: test cases straight from the user input."""
        template = self._prompts["straightforward"]
        text = template.substitute(
            REQUEST=request.description,
            IMAGE_NOTE=_WITH_IMAGE_NOTE if request.image else "",
        )
        turns: tuple = (text,) if request.image is None else (text, request.image)
        bundle = PromptBundle(SYSTEM_TEXT, turns, Grammar.JSON_ARRAY)
        try:
            doc = self.gateway.complete_structured(
                bundle, self.config, validator=_validate_straightforward_rows
            )
        except WebforgeError as exc:
            raise SuiteStageError("straightforward-generation", exc) from exc
        rows = doc.document
        if not rows:
            raise SuiteStageError(
                "straightforward-generation",
                EmptyDecomposition("model returned zero requirements"),
            )
        requirements: list[Requirement] = []
        tests: list[SoapOperaTestCase] = []
        for i, row in enumerate(rows, start=1):
            req_id = f"R{i}"
            kind = _coerce_str(row.get("kind"), "functionality")
            requirements.append(
                Requirement(
                    id=req_id,
                    statement=_coerce_str(row.get("requirement")),
                    kind=kind if kind in REQUIREMENT_KINDS else "functionality",
                    origin="explicit",
                )
            )
            tests.append(_row_to_test_case(row, req_id))
        return TestSuite(tuple(requirements), (), tuple(tests))


# -- reply validation (runs inside the gateway's re-ask loop) ----------------


def _validate_requirement_rows(rows: list) -> list:
    if not isinstance(rows, list):
        raise ValueError("expected a JSON array")
    for row in rows:
        if not isinstance(row, dict):
            raise ValueError("each requirement must be a JSON object")
        if not _coerce_str(row.get("statement")):
            raise ValueError("each requirement needs a non-empty 'statement'")
        kind = row.get("kind")
        if kind is not None and kind not in REQUIREMENT_KINDS:
            raise ValueError(f"unknown requirement kind {kind!r}")
        origin = row.get("origin")
        if origin is not None and origin not in ORIGINS:
            raise ValueError(f"unknown requirement origin {origin!r}")
    return rows


def _rows_to_requirements(rows: list) -> list[Requirement]:
    requirements: list[Requirement] = []
    seen: set[str] = set()
    for i, row in enumerate(rows, start=1):
        req_id = _coerce_str(row.get("id"))
        if not req_id or req_id in seen:
            req_id = f"R{i}"
        seen.add(req_id)
        requirements.append(
            Requirement(
                id=req_id,
                statement=_coerce_str(row.get("statement")),
                kind=_coerce_str(row.get("kind"), "functionality"),
                origin=_coerce_str(row.get("origin"), "explicit"),
            )
        )
    return requirements


def _validate_single_object(rows: list) -> list:
    if not isinstance(rows, list) or len(rows) != 1 or not isinstance(rows[0], dict):
        raise ValueError("expected a JSON array containing exactly one object")
    for item in rows[0].get("data_sources", []) or []:
        if not isinstance(item, dict):
            raise ValueError("each data source must be a JSON object")
        try:
            DataSourceSpec(
                kind=_coerce_str(item.get("kind")), payload=dict(item.get("payload", {}))
            )
        except InterchangeError as exc:
            # Surface as ValueError so the gateway re-asks instead of failing.
            raise ValueError(str(exc)) from exc
    return rows


def _validate_test_case_row(rows: list) -> list:
    _validate_single_object_shape(rows)
    row = rows[0]
    steps = row.get("steps")
    if not isinstance(steps, list) or not steps:
        raise ValueError("test case needs a non-empty 'steps' array")
    for step in steps:
        if not isinstance(step, dict):
            raise ValueError("each step must be a JSON object")
        if not _coerce_str(step.get("action")) or not _coerce_str(step.get("expectation")):
            raise ValueError("each step needs a non-empty action and expectation")
    category = row.get("category")
    if category is not None and category not in TEST_CATEGORIES:
        raise ValueError(f"unknown test category {category!r}")
    return rows


def _validate_single_object_shape(rows: list) -> None:
    if not isinstance(rows, list) or len(rows) != 1 or not isinstance(rows[0], dict):
        raise ValueError("expected a JSON array containing exactly one object")


def _validate_straightforward_rows(rows: list) -> list:
    if not isinstance(rows, list):
        raise ValueError("expected a JSON array")
    for row in rows:
        if not isinstance(row, dict) or not _coerce_str(row.get("requirement")):
            raise ValueError("each entry needs a non-empty 'requirement'")
        _validate_test_case_row([row])
    return rows


def _row_to_test_case(row: dict, requirement_id: str) -> SoapOperaTestCase:
    persona_data = row.get("persona") or {}
    steps = tuple(
        TestStep(
            index=i,
            action=_coerce_str(step.get("action")),
            expectation=_coerce_str(step.get("expectation")),
        )
        for i, step in enumerate(row.get("steps", []), start=1)
    )
    category = _coerce_str(row.get("category"), DEFAULT_CATEGORY)
    if category not in TEST_CATEGORIES:
        category = DEFAULT_CATEGORY
    return SoapOperaTestCase(
        id=f"t-{requirement_id}",
        requirement_id=requirement_id,
        persona=Persona(
            name=_coerce_str(persona_data.get("name"), "Visitor"),
            goal=_coerce_str(persona_data.get("goal"), "use the application"),
        ),
        steps=steps,
        category=category,
    )
