from __future__ import annotations

import json

import pytest

from webforge.errors import EmptyDecomposition, SuiteStageError
from webforge.gateway import ImageAttachment
from webforge.testgen import (
    TestGenerator,
    dump_suite,
    load_suite,
    suite_from_json_dict,
    suite_to_json_dict,
)
from webforge.testgen.model import (
    DataSourceSpec,
    DetailedRequirement,
    Persona,
    Requirement,
    SoapOperaTestCase,
    TestStep,
    TestSuite,
    UserRequest,
)
from webforge.canonical import stable_dumps
from webforge.errors import InterchangeError, UnknownSchemaVersion

REQUEST = UserRequest(description="Please create a shopping website")

DECOMPOSE_REPLY = json.dumps(
    [
        {"id": "R1", "statement": "Show a product catalog.", "kind": "functionality", "origin": "explicit"},
        {"id": "R2", "statement": "Let users search products.", "kind": "functionality", "origin": "explicit"},
        {"id": "R3", "statement": "Use a clean two-column layout.", "kind": "layout-constraint", "origin": "explicit"},
        {"id": "R4", "statement": "Support user registration and login.", "kind": "functionality", "origin": "inferred"},
        {"id": "R5", "statement": "Provide a shopping cart.", "kind": "functionality", "origin": "inferred"},
    ]
)

ELABORATE_CATALOG_REPLY = json.dumps(
    [
        {
            "requirement_id": "R1",
            "functional_spec": "List products with name, price, image.",
            "static_ui_spec": "Grid of product cards.",
            "interaction_spec": "Clicking a card opens the product page.",
            "data_sources": [
                {
                    "kind": "database",
                    "payload": {
                        "schema": "products(id INTEGER PRIMARY KEY, name TEXT, price REAL)",
                        "setup": "seed 12 demo products",
                    },
                }
            ],
        }
    ]
)

TESTCASE_REPLY = json.dumps(
    [
        {
            "persona": {"name": "Sam", "goal": "buy a gift quickly"},
            "category": "functionality",
            "steps": [
                {"action": "navigate to /", "expectation": "catalog grid is visible"},
                {"action": "type 'mug' into the search box", "expectation": "results filter to mugs"},
                {"action": "click the first product card", "expectation": "product page opens"},
                {"action": "click 'Add to cart'", "expectation": "cart badge shows 1"},
                {"action": "click the cart icon", "expectation": "cart lists the mug"},
            ],
        }
    ]
)


def _generator(gateway_factory, replies=None, rules=None):
    gateway, transport = gateway_factory(replies=replies, rules=rules)
    from webforge.gateway import ProviderConfig

    return TestGenerator(gateway, ProviderConfig(endpoint="http://x", model="m")), transport


# -- decomposition -------------------------------------------------------------


def test_decompose_parses_fields(gateway_factory):
    gen, _ = _generator(gateway_factory, replies=[DECOMPOSE_REPLY])
    requirements = gen.decompose_requirements(REQUEST)
    assert [r.id for r in requirements] == ["R1", "R2", "R3", "R4", "R5"]
    assert requirements[3].origin == "inferred"
    assert requirements[2].kind == "layout-constraint"
    explicit = [r for r in requirements if r.origin == "explicit"]
    assert len(explicit) == 3


def test_decompose_inferred_shopping_features(gateway_factory):
    # An underspecified request gains inferred registration/cart requirements.
    gen, _ = _generator(gateway_factory, replies=[DECOMPOSE_REPLY])
    requirements = gen.decompose_requirements(REQUEST)
    inferred_text = " ".join(r.statement.lower() for r in requirements if r.origin == "inferred")
    assert "registration" in inferred_text
    assert "cart" in inferred_text


def test_decompose_empty_reply_raises(gateway_factory):
    gen, _ = _generator(gateway_factory, replies=["[]"])
    with pytest.raises(EmptyDecomposition):
        gen.decompose_requirements(REQUEST)


def test_decompose_duplicate_ids_reassigned(gateway_factory):
    reply = json.dumps(
        [
            {"id": "R1", "statement": "One."},
            {"id": "R1", "statement": "Two."},
        ]
    )
    gen, _ = _generator(gateway_factory, replies=[reply])
    requirements = gen.decompose_requirements(REQUEST)
    assert len({r.id for r in requirements}) == 2


def test_decompose_attaches_image_turn(gateway_factory):
    gen, transport = _generator(gateway_factory, replies=[DECOMPOSE_REPLY])
    request = UserRequest(description="site", image=ImageAttachment(b"png-bytes", "png"))
    gen.decompose_requirements(request)
    assert "design image" in transport.calls[0]


# -- elaboration ------------------------------------------------------------------


def test_elaborate_database_schema_survives(gateway_factory):
    gen, _ = _generator(gateway_factory, replies=[ELABORATE_CATALOG_REPLY])
    req = Requirement(id="R1", statement="Show a product catalog.")
    detailed = gen.elaborate(req, REQUEST)
    assert detailed.requirement_id == "R1"
    assert detailed.data_sources[0].kind == "database"
    assert "products(" in detailed.data_sources[0].payload["schema"]


def test_elaborate_layout_items_get_none_marker(gateway_factory):
    reply = json.dumps(
        [
            {
                "requirement_id": "R3",
                "functional_spec": "none",
                "static_ui_spec": "Two columns, 2:1 ratio.",
                "interaction_spec": "none",
                "data_sources": [],
            }
        ]
    )
    gen, _ = _generator(gateway_factory, replies=[reply])
    req = Requirement(id="R3", statement="Use a clean two-column layout.", kind="layout-constraint")
    detailed = gen.elaborate(req, REQUEST)
    assert detailed.interaction_spec == "none"
    assert detailed.static_ui_spec.startswith("Two columns")


def test_elaborate_external_api_placeholder(gateway_factory):
    reply = json.dumps(
        [
            {
                "requirement_id": "R9",
                "functional_spec": "Show the local weather.",
                "static_ui_spec": "Weather widget in the header.",
                "interaction_spec": "Auto-refresh hourly.",
                "data_sources": [
                    {
                        "kind": "external-api",
                        "payload": {"endpoint": "https://api.example/weather", "placeholder": True},
                    }
                ],
            }
        ]
    )
    gen, _ = _generator(gateway_factory, replies=[reply])
    req = Requirement(id="R9", statement="Show a weather feed.")
    detailed = gen.elaborate(req, REQUEST)
    assert detailed.data_sources[0].payload["placeholder"] is True


def test_elaborate_invalid_data_source_triggers_reask(gateway_factory):
    bad = json.dumps(
        [
            {
                "requirement_id": "R1",
                "functional_spec": "f",
                "static_ui_spec": "s",
                "interaction_spec": "i",
                "data_sources": [{"kind": "telepathy", "payload": {}}],
            }
        ]
    )
    gen, transport = _generator(gateway_factory, replies=[bad, ELABORATE_CATALOG_REPLY])
    req = Requirement(id="R1", statement="Show a product catalog.")
    detailed = gen.elaborate(req, REQUEST)
    assert len(transport.calls) == 2  # one corrective re-ask
    assert detailed.data_sources[0].kind == "database"


def test_elaborate_sees_sibling_requirements(gateway_factory):
    gen, transport = _generator(gateway_factory, replies=[ELABORATE_CATALOG_REPLY])
    req = Requirement(id="R1", statement="Show a product catalog.")
    sibling = Requirement(id="R2", statement="Let users search products.")
    gen.elaborate(req, REQUEST, siblings=(req, sibling))
    assert "R2: Let users search products." in transport.calls[0]


# -- test-case generation -----------------------------------------------------------


def test_generate_test_case_steps_contiguous(gateway_factory):
    gen, _ = _generator(gateway_factory, replies=[TESTCASE_REPLY])
    detailed = DetailedRequirement("R1", "f", "s", "i")
    test = gen.generate_test_case(detailed)
    assert [s.index for s in test.steps] == [1, 2, 3, 4, 5]
    assert test.persona.name == "Sam"
    assert test.id == "t-R1"
    assert test.requirement_id == "R1"


def test_generate_test_case_login_persona(gateway_factory):
    reply = json.dumps(
        [
            {
                "persona": {"name": "Riley", "goal": "sign in to check an order"},
                "category": "functionality",
                "steps": [
                    {"action": "type the username into #user", "expectation": "field shows the username"},
                    {"action": "type the password into #pass", "expectation": "field is masked"},
                    {"action": "click the login button", "expectation": "dashboard greets the user"},
                ],
            }
        ]
    )
    gen, _ = _generator(gateway_factory, replies=[reply])
    test = gen.generate_test_case(DetailedRequirement("R4", "login", "form", "submit"))
    assert "sign in" in test.persona.goal
    assert "login" in test.steps[-1].action
    assert "dashboard" in test.steps[-1].expectation


def test_generate_test_case_missing_category_defaults(gateway_factory):
    reply = json.dumps(
        [{"persona": {"name": "A", "goal": "g"}, "steps": [{"action": "a", "expectation": "e"}]}]
    )
    gen, _ = _generator(gateway_factory, replies=[reply])
    test = gen.generate_test_case(DetailedRequirement("R1", "f", "s", "i"))
    assert test.category == "functionality"


# -- whole-suite generation -----------------------------------------------------------


def _suite_rules():
    single_elaboration = json.dumps(
        [
            {
                "requirement_id": "X",
                "functional_spec": "spec",
                "static_ui_spec": "ui",
                "interaction_spec": "interactions",
                "data_sources": [],
            }
        ]
    )
    single_case = json.dumps(
        [
            {
                "persona": {"name": "P", "goal": "g"},
                "category": "functionality",
                "steps": [{"action": "navigate to /", "expectation": "page loads"}],
            }
        ]
    )
    return [
        ("Break the request down", DECOMPOSE_REPLY),
        ("Requirement to elaborate", single_elaboration),
        ("soap-opera style", single_case),
    ]


def test_generate_suite_bijection(gateway_factory):
    gen, _ = _generator(gateway_factory, rules=_suite_rules())
    suite = gen.generate_suite(REQUEST)
    assert len(suite.tests) == len(suite.requirements) == 5
    assert {t.requirement_id for t in suite.tests} == {r.id for r in suite.requirements}


def test_generate_suite_stage_error_names_stage(gateway_factory):
    gen, _ = _generator(gateway_factory, replies=["[]"])
    with pytest.raises(SuiteStageError) as exc_info:
        gen.generate_suite(REQUEST)
    assert exc_info.value.stage == "decomposition"


def test_straightforward_mode_single_call(gateway_factory):
    reply = json.dumps(
        [
            {
                "requirement": "Show a landing page.",
                "kind": "functionality",
                "category": "design-validation",
                "persona": {"name": "V", "goal": "see the landing page"},
                "steps": [{"action": "navigate to /", "expectation": "hero section visible"}],
            },
            {
                "requirement": "Contact form sends a message.",
                "persona": {"name": "W", "goal": "reach support"},
                "steps": [{"action": "fill the form", "expectation": "confirmation shown"}],
            },
        ]
    )
    gen, transport = _generator(gateway_factory, replies=[reply])
    suite = gen.generate_suite_straightforward(REQUEST)
    assert len(transport.calls) == 1
    assert len(suite.requirements) == len(suite.tests) == 2
    assert suite.detailed == ()
    assert suite.tests[0].category == "design-validation"


# -- interchange ---------------------------------------------------------------------


def _tiny_suite() -> TestSuite:
    req = Requirement(id="R1", statement="Serve a homepage.")
    det = DetailedRequirement("R1", "serve /", "hero", "none")
    test = SoapOperaTestCase(
        id="t-R1",
        requirement_id="R1",
        persona=Persona("Vi", "view the page"),
        steps=(TestStep(1, "navigate to /", "page renders"),),
        category="design-validation",
    )
    return TestSuite((req,), (det,), (test,))


def test_suite_serialization_roundtrip_bytes(tmp_path):
    suite = _tiny_suite()
    first = stable_dumps(suite_to_json_dict(suite))
    reparsed = suite_from_json_dict(json.loads(first))
    second = stable_dumps(suite_to_json_dict(reparsed))
    assert first == second


def test_suite_file_roundtrip(tmp_path):
    suite = _tiny_suite()
    path = tmp_path / "suite.json"
    dump_suite(suite, path)
    assert load_suite(path).tests[0].persona.name == "Vi"


def test_unknown_schema_version_rejected():
    data = suite_to_json_dict(_tiny_suite())
    data["schema_version"] = 99
    with pytest.raises(UnknownSchemaVersion):
        suite_from_json_dict(data)


def test_suite_enforces_bijection():
    req = Requirement(id="R1", statement="One.")
    other = SoapOperaTestCase(
        id="t-R2",
        requirement_id="R2",
        persona=Persona("X", "g"),
        steps=(TestStep(1, "a", "e"),),
    )
    with pytest.raises(InterchangeError):
        TestSuite((req,), (), (other,))


def test_step_indices_must_be_contiguous():
    with pytest.raises(InterchangeError):
        SoapOperaTestCase(
            id="t",
            requirement_id="r",
            persona=Persona("X", "g"),
            steps=(TestStep(1, "a", "e"), TestStep(3, "b", "f")),
        )


def test_database_source_needs_schema():
    with pytest.raises(InterchangeError):
        DataSourceSpec(kind="database", payload={"setup": "no schema here"})
