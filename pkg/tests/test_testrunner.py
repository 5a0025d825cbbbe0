from __future__ import annotations

import json

import pytest

from conftest import write_template
from webforge.gateway import ImageAttachment, ProviderConfig
from webforge.testgen.model import Persona, SoapOperaTestCase, StepBudget, TestStep
from webforge.testrunner import Supervisor, TestRunner, build_feedback
from webforge.testrunner.agent import _validate_driver_plan
from webforge.testrunner.report import (
    VERDICT_NO,
    VERDICT_PARTIAL,
    VERDICT_YES,
    DeploymentVerdict,
    FeedbackBundle,
    TestReport,
)
from webforge.testrunner.supervisor import AppInstance, InstanceState
from webforge.workspace import TemplateStore, init_from_template

CONFIG = ProviderConfig(endpoint="http://x", model="m", max_reasks=1)

NAVIGATE_THEN_MET = json.dumps(
    [
        {"op": "navigate", "target": "/"},
        {"op": "judge", "verdict": "met", "observed": "heading is visible"},
    ]
)


def _test_case(test_id="t-R1", steps=None) -> SoapOperaTestCase:
    steps = steps or [("open the homepage", "the heading is visible")]
    return SoapOperaTestCase(
        id=test_id,
        requirement_id=test_id.removeprefix("t-"),
        persona=Persona("Dana", "check the homepage"),
        steps=tuple(
            TestStep(i, action, expectation) for i, (action, expectation) in enumerate(steps, 1)
        ),
        category="functionality",
    )


def _runner(gateway_factory, rules, default=None, supervisor=None, budget=None):
    gateway, transport = gateway_factory(rules=rules, default=default)
    runner = TestRunner(
        gateway,
        CONFIG,
        supervisor=supervisor or Supervisor(probe_timeout_s=15),
        budget=budget or StepBudget(actions_per_step=6, retry_bound=1),
    )
    return runner, transport


# -- verify_deployment -----------------------------------------------------------


def test_verify_ok_on_fixture_page(workspace, gateway_factory):
    runner, _ = _runner(gateway_factory, rules=[("crash", "NONE")])
    inst = runner.supervisor.launch(workspace)
    try:
        verdict = runner.verify_deployment(inst)
    finally:
        runner.supervisor.stop_all()
    assert verdict.ok
    assert verdict.signals == ()


def test_verify_blank_screen_detected(workspace, gateway_factory):
    workspace.write_file("public/index.html", "<html><body></body></html>\n")
    runner, _ = _runner(gateway_factory, rules=[("crash", "NONE")])
    inst = runner.supervisor.launch(workspace)
    try:
        verdict = runner.verify_deployment(inst)
    finally:
        runner.supervisor.stop_all()
    assert not verdict.ok
    assert "blank-screen" in verdict.signals


def test_verify_crash_overlay_via_vision_reply(workspace, gateway_factory):
    runner, _ = _runner(
        gateway_factory, rules=[("crash", "ERROR: stack trace overlay visible")]
    )
    inst = runner.supervisor.launch(workspace)
    try:
        verdict = runner.verify_deployment(inst)
    finally:
        runner.supervisor.stop_all()
    assert not verdict.ok
    assert "crash-overlay" in verdict.signals
    assert "stack trace" in verdict.notes


def test_verify_failed_instance_short_circuits(gateway_factory):
    runner, transport = _runner(gateway_factory, rules=[])
    inst = AppInstance(
        process=None, port=9999, base_url="http://127.0.0.1:9999", template_id="x",
        state=InstanceState.FAILED,
    )
    inst.stderr_lines.append("boom")
    verdict = runner.verify_deployment(inst)
    assert not verdict.ok
    assert verdict.signals == ("process-exit",)
    assert "boom" in verdict.notes
    assert transport.calls == []


def test_verify_differing_expected_image_yields_notes(workspace, gateway_factory):
    runner, transport = _runner(
        gateway_factory,
        rules=[
            ("crash", "NONE"),
            ("expert web designer", "- hero banner missing\n- colors are off"),
        ],
    )
    from webforge.testrunner.raster import render_text_screenshot

    other = ImageAttachment(render_text_screenshot("a completely different design"), "png")
    inst = runner.supervisor.launch(workspace)
    try:
        verdict = runner.verify_deployment(inst, expected_image=other)
    finally:
        runner.supervisor.stop_all()
    assert verdict.ok  # discrepancies are notes, not failure signals
    assert "hero banner missing" in verdict.notes
    assert len(transport.calls) == 2


def test_verify_identical_expected_image_skips_vision_call(workspace, gateway_factory):
    from webforge.testrunner.driver import HttpProbeDriver

    runner, transport = _runner(gateway_factory, rules=[("crash", "NONE")])
    inst = runner.supervisor.launch(workspace)
    try:
        probe = HttpProbeDriver(inst.base_url)
        probe.navigate("/")
        expected = ImageAttachment(probe.screenshot(), "png")
        verdict = runner.verify_deployment(inst, expected_image=expected)
    finally:
        runner.supervisor.stop_all()
    assert verdict.ok
    # only the crash-overlay call happened; no visual-diff call
    assert len(transport.calls) == 1


# -- run_test ------------------------------------------------------------------------


def test_run_test_single_step_yes(workspace, gateway_factory):
    runner, _ = _runner(gateway_factory, rules=[("Current step 1", NAVIGATE_THEN_MET)])
    inst = runner.supervisor.launch(workspace)
    try:
        report = runner.run_test(inst, _test_case())
    finally:
        runner.supervisor.stop_all()
    assert report.verdict == VERDICT_YES
    assert report.failed_step is None
    assert [t.verdict for t in report.traces] == ["met"]
    assert report.traces[0].actions[0].op == "navigate"


def test_run_test_partial_on_step2_and_step3_skipped(workspace, gateway_factory):
    unmet = json.dumps(
        [
            {
                "op": "judge",
                "verdict": "unmet",
                "observed": "no contact link",
                "category": "element-not-found",
                "recommendation": "add the contact link",
            }
        ]
    )
    runner, _ = _runner(
        gateway_factory,
        rules=[
            ("Current step 1", NAVIGATE_THEN_MET),
            ("Current step 2", unmet),
        ],
    )
    test = _test_case(
        steps=[
            ("open the homepage", "page loads"),
            ("look for the contact link", "contact link visible"),
            ("click it", "mail client opens"),
        ]
    )
    inst = runner.supervisor.launch(workspace)
    try:
        report = runner.run_test(inst, test)
    finally:
        runner.supervisor.stop_all()
    assert report.verdict == VERDICT_PARTIAL
    assert report.failed_step == 2
    assert report.category == "element-not-found"
    assert [t.verdict for t in report.traces] == ["met", "unmet", "skipped"]
    assert report.recommendations == ("add the contact link",)


def test_run_test_step1_unmet_is_no(workspace, gateway_factory):
    unmet = json.dumps([{"op": "judge", "verdict": "unmet", "observed": "nothing loads"}])
    runner, _ = _runner(gateway_factory, rules=[("Current step 1", unmet)])
    inst = runner.supervisor.launch(workspace)
    try:
        report = runner.run_test(inst, _test_case())
    finally:
        runner.supervisor.stop_all()
    assert report.verdict == VERDICT_NO
    assert report.failed_step == 1


def test_run_test_launch_failure_report(gateway_factory):
    runner, _ = _runner(gateway_factory, rules=[])
    failed = AppInstance(
        process=None, port=1, base_url="http://127.0.0.1:1", template_id="x",
        state=InstanceState.FAILED,
    )
    report = runner.run_test(failed, _test_case())
    assert report.verdict == VERDICT_NO
    assert report.category == "launch-failure"


def test_run_test_budget_forces_decision_prompt(workspace, gateway_factory):
    keep_clicking = json.dumps([{"op": "wait", "seconds": 0.0}])
    final = json.dumps(
        [{"op": "judge", "verdict": "unmet", "observed": "never settled", "category": "timeout"}]
    )
    runner, transport = _runner(
        gateway_factory,
        rules=[
            ("interaction limit for this test step has been reached", final),
            ("Current step 1", keep_clicking),
        ],
        budget=StepBudget(actions_per_step=3, retry_bound=0),
    )
    inst = runner.supervisor.launch(workspace)
    try:
        report = runner.run_test(inst, _test_case())
    finally:
        runner.supervisor.stop_all()
    assert report.verdict == VERDICT_NO
    assert report.category == "timeout"
    assert len(report.traces[0].actions) == 3
    # 3 planning calls + 1 forced decision call
    assert len(transport.calls) == 4


def test_run_test_driver_error_retried_then_reported(workspace, gateway_factory):
    bad_click = json.dumps([{"op": "click", "target": "No Such Link"}])
    runner, transport = _runner(
        gateway_factory,
        rules=[("Current step 1", bad_click)],
        budget=StepBudget(actions_per_step=4, retry_bound=2),
    )
    inst = runner.supervisor.launch(workspace)
    try:
        report = runner.run_test(inst, _test_case())
    finally:
        runner.supervisor.stop_all()
    assert report.verdict == VERDICT_NO
    assert report.category == "element-not-found"
    assert "attempt 3" in report.technical


def test_run_test_malformed_decisions_fold_into_report(workspace, gateway_factory):
    runner, _ = _runner(gateway_factory, rules=[], default="utter nonsense, no json")
    inst = runner.supervisor.launch(workspace)
    try:
        report = runner.run_test(inst, _test_case())
    finally:
        runner.supervisor.stop_all()
    assert report.verdict == VERDICT_NO
    assert report.category == "other"
    assert "unparseable" in report.actual


def test_driver_plan_validator():
    with pytest.raises(ValueError):
        _validate_driver_plan([])
    with pytest.raises(ValueError):
        _validate_driver_plan([{"op": "fly"}])
    with pytest.raises(ValueError):
        _validate_driver_plan([{"op": "judge", "verdict": "maybe"}])
    assert _validate_driver_plan([{"op": "navigate", "target": "/"}])


# -- run_suite ----------------------------------------------------------------------


def test_run_suite_reports_in_test_order(workspace, gateway_factory):
    runner, _ = _runner(
        gateway_factory,
        rules=[("crash", "NONE")],
        default=NAVIGATE_THEN_MET,
    )
    tests = [_test_case(f"t-R{i}") for i in (3, 1, 2)]
    bundle = runner.run_suite(workspace, tests, parallelism=2)
    assert [r.test_id for r in bundle.reports] == ["t-R3", "t-R1", "t-R2"]
    assert bundle.counts == {"yes": 3, "partial": 0, "no": 0, "total": 3}
    assert runner.supervisor.live_instances() == []


def test_run_suite_abort_on_deployment_failure(tmp_path, gateway_factory):
    store_dir = tmp_path / "store"
    write_template(
        store_dir,
        "crash-exit",
        {"x.txt": "x\n"},
        launch_command="python3 -c \"import sys; sys.exit(2)\"",
    )
    ws = init_from_template(TemplateStore(store_dir).get("crash-exit"), tmp_path / "ws")
    runner, transport = _runner(gateway_factory, rules=[])
    bundle = runner.run_suite(ws, [_test_case()], parallelism=2)
    assert bundle.reports == ()
    assert not bundle.deployment.ok
    assert "process-exit" in bundle.deployment.signals
    assert transport.calls == []  # zero test executions, zero model calls
    assert runner.supervisor.live_instances() == []


def test_run_suite_parallelism_matches_serial(workspace, gateway_factory):
    tests = [_test_case(f"t-R{i}") for i in range(1, 5)]

    def run(par):
        runner, _ = _runner(
            gateway_factory, rules=[("crash", "NONE")], default=NAVIGATE_THEN_MET
        )
        return runner.run_suite(workspace, tests, parallelism=par)

    serial = run(1)
    parallel = run(4)
    assert [r.verdict for r in serial.reports] == [r.verdict for r in parallel.reports]
    assert serial.counts == parallel.counts


# -- build_feedback ---------------------------------------------------------------------


def _report(test_id, verdict, failed_step=None, category=None):
    return TestReport(
        test_id=test_id,
        verdict=verdict,
        failed_step=failed_step,
        expected="expected text",
        actual="actual text",
        category=category,
    )


def test_feedback_all_pass_digest():
    deployment = DeploymentVerdict(ok=True)
    bundle = build_feedback(
        [_report("t-R1", VERDICT_YES), _report("t-R2", VERDICT_YES)], deployment, 1
    )
    assert bundle.counts == {"yes": 2, "partial": 0, "no": 0, "total": 2}
    assert "2/2 passed" in bundle.digest
    assert "- [" not in bundle.digest


def test_feedback_mentions_each_failure_once():
    deployment = DeploymentVerdict(ok=True)
    reports = [
        _report("t-R1", VERDICT_YES),
        _report("t-R2", VERDICT_NO, failed_step=1, category="element-not-found"),
        _report("t-R3", VERDICT_PARTIAL, failed_step=2, category="assertion-mismatch"),
    ]
    bundle = build_feedback(reports, deployment, 2)
    assert bundle.digest.count("t-R2") == 1
    assert bundle.digest.count("t-R3") == 1
    assert bundle.digest.count("t-R1") == 0
    assert "step 1" in bundle.digest and "step 2" in bundle.digest


def test_feedback_counts_tally():
    deployment = DeploymentVerdict(ok=True)
    reports = [
        _report("a", VERDICT_YES),
        _report("b", VERDICT_PARTIAL, failed_step=2),
        _report("c", VERDICT_NO, failed_step=1),
        _report("d", VERDICT_YES),
    ]
    bundle = build_feedback(reports, deployment, 1)
    assert bundle.counts == {"yes": 2, "partial": 1, "no": 1, "total": 4}


def test_feedback_serialization_roundtrip():
    deployment = DeploymentVerdict(ok=True)
    bundle = build_feedback([_report("t", VERDICT_YES)], deployment, 1)
    again = FeedbackBundle.from_json_dict(bundle.to_json_dict())
    assert again.to_json_dict() == bundle.to_json_dict()
