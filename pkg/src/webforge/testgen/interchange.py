"""Versioned JSON interchange for suites.

The schema is frozen at version 1; documents with any other version are
rejected outright. Serialization is key-sorted and newline-terminated so that
serialize -> parse -> serialize is byte-identical.
"""

from __future__ import annotations

from pathlib import Path

from webforge.canonical import stable_dumps
from webforge.errors import InterchangeError, UnknownSchemaVersion
from webforge.testgen.model import (
    DataSourceSpec,
    DetailedRequirement,
    Persona,
    Requirement,
    SoapOperaTestCase,
    TestStep,
    TestSuite,
)

SCHEMA_VERSION = 1


def requirement_to_dict(req: Requirement) -> dict:
    return {"id": req.id, "statement": req.statement, "kind": req.kind, "origin": req.origin}


def requirement_from_dict(data: dict) -> Requirement:
    try:
        return Requirement(
            id=str(data["id"]),
            statement=str(data["statement"]),
            kind=str(data.get("kind", "functionality")),
            origin=str(data.get("origin", "explicit")),
        )
    except KeyError as exc:
        raise InterchangeError(f"requirement missing field {exc}") from None


def detailed_to_dict(det: DetailedRequirement) -> dict:
    return {
        "requirement_id": det.requirement_id,
        "functional_spec": det.functional_spec,
        "static_ui_spec": det.static_ui_spec,
        "interaction_spec": det.interaction_spec,
        "data_sources": [
            {"kind": source.kind, "payload": source.payload} for source in det.data_sources
        ],
    }


def detailed_from_dict(data: dict) -> DetailedRequirement:
    try:
        sources = tuple(
            DataSourceSpec(kind=str(item["kind"]), payload=dict(item.get("payload", {})))
            for item in data.get("data_sources", [])
        )
        return DetailedRequirement(
            requirement_id=str(data["requirement_id"]),
            functional_spec=str(data["functional_spec"]),
            static_ui_spec=str(data["static_ui_spec"]),
            interaction_spec=str(data["interaction_spec"]),
            data_sources=sources,
        )
    except KeyError as exc:
        raise InterchangeError(f"detailed requirement missing field {exc}") from None


def test_case_to_dict(test: SoapOperaTestCase) -> dict:
    return {
        "id": test.id,
        "requirement_id": test.requirement_id,
        "persona": {"name": test.persona.name, "goal": test.persona.goal},
        "category": test.category,
        "steps": [
            {"index": step.index, "action": step.action, "expectation": step.expectation}
            for step in test.steps
        ],
    }


def test_case_from_dict(data: dict) -> SoapOperaTestCase:
    try:
        persona = data["persona"]
        steps = tuple(
            TestStep(
                index=int(item["index"]),
                action=str(item["action"]),
                expectation=str(item["expectation"]),
            )
            for item in data["steps"]
        )
        return SoapOperaTestCase(
            id=str(data["id"]),
            requirement_id=str(data["requirement_id"]),
            persona=Persona(name=str(persona["name"]), goal=str(persona["goal"])),
            steps=steps,
            category=str(data.get("category", "functionality")),
        )
    except KeyError as exc:
        raise InterchangeError(f"test case missing field {exc}") from None


def suite_to_json_dict(suite: TestSuite) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "test-suite",
        "requirements": [requirement_to_dict(r) for r in suite.requirements],
        "detailed_requirements": [detailed_to_dict(d) for d in suite.detailed],
        "test_cases": [test_case_to_dict(t) for t in suite.tests],
    }


def suite_from_json_dict(data: dict) -> TestSuite:
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise UnknownSchemaVersion(version)
    return TestSuite(
        requirements=tuple(requirement_from_dict(r) for r in data.get("requirements", [])),
        detailed=tuple(detailed_from_dict(d) for d in data.get("detailed_requirements", [])),
        tests=tuple(test_case_from_dict(t) for t in data.get("test_cases", [])),
    )


def dump_suite(suite: TestSuite, path: Path) -> None:
    Path(path).write_text(stable_dumps(suite_to_json_dict(suite)), encoding="utf-8")


def load_suite(path: Path) -> TestSuite:
    import json

    return suite_from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))
