"""The testing agent: deployment verification, user simulation, feedback.

Each soap-opera test runs against its own application instance. A model call
decides the next low-level browser actions for the current step from the test
instruction plus a snapshot of the page; the loop ends when the model judges
the step met or unmet, or when the per-step action budget forces a final
decision prompt. Prompts carry only origin-relative paths, so replays are
independent of which port an instance happened to get.
"""

from __future__ import annotations

import queue
import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable

from webforge.errors import (
    DriverError,
    ElementNotFoundError,
    LaunchError,
    MalformedAfterRetries,
    NavigationError,
    ProcessExited,
    WebforgeError,
)
from webforge.gateway import (
    Grammar,
    ImageAttachment,
    LLMGateway,
    PromptBundle,
    ProviderConfig,
)
from webforge.testgen.model import SoapOperaTestCase, StepBudget, TestStep
from webforge.testrunner.driver import BrowserDriver, HttpProbeDriver
from webforge.testrunner.raster import is_blank_screen
from webforge.testrunner.report import (
    STEP_MET,
    STEP_SKIPPED,
    STEP_UNMET,
    VERDICT_NO,
    VERDICT_PARTIAL,
    VERDICT_YES,
    DeploymentVerdict,
    DriverAction,
    FeedbackBundle,
    StepTrace,
    TestReport,
    build_feedback,
)
from webforge.testrunner.supervisor import AppInstance, InstanceState, Supervisor
from webforge.workspace.state import WorkspaceState

SYSTEM_TEXT = (
    "You are the testing agent of an automated web development pipeline. "
    "Follow the requested output format exactly."
)

DriverFactory = Callable[[str], BrowserDriver]


def _load_prompt(name: str) -> string.Template:
    text = resources.files("webforge.testrunner").joinpath(f"prompts/{name}.txt").read_text(
        encoding="utf-8"
    )
    return string.Template(text)


def _error_category(exc: Exception) -> str:
    if isinstance(exc, ElementNotFoundError):
        return "element-not-found"
    if isinstance(exc, NavigationError):
        return "navigation-error"
    return "other"


@dataclass
class _StepOutcome:
    verdict: str
    observed: str
    category: str | None = None
    recommendation: str = ""
    technical: str = ""


class TestRunner:
    def __init__(
        self,
        gateway: LLMGateway,
        config: ProviderConfig,
        supervisor: Supervisor | None = None,
        driver_factory: DriverFactory | None = None,
        budget: StepBudget | None = None,
    ):
        self.gateway = gateway
        self.config = config
        self.supervisor = supervisor or Supervisor()
        self.driver_factory = driver_factory or HttpProbeDriver
        self.budget = budget or StepBudget()
        self._prompts = {
            name: _load_prompt(name)
            for name in ("user_sim", "decision", "crash_check", "visual_diff")
        }

    # -- deployment verification ---------------------------------------------

    def verify_deployment(
        self,
        inst: AppInstance,
        expected_image: ImageAttachment | None = None,
        shots_dir: Path | None = None,
    ) -> DeploymentVerdict:
        """Screenshot the landing page and look for blank screens or crashes.

        A failed instance yields a failing verdict with its captured logs; a
        provided design image is compared against the screenshot, with a
        vision call summarizing discrepancies (skipped when the images are
        byte-identical).
        """
        if inst.state is not InstanceState.READY:
            return DeploymentVerdict(
                ok=False,
                signals=("process-exit",),
                notes=inst.log_tail(),
            )
        driver = self.driver_factory(inst.base_url)
        try:
            driver.navigate(inst.probe_path)
            shot = driver.screenshot()
        except DriverError as exc:
            return DeploymentVerdict(
                ok=False, signals=("probe-timeout",), notes=f"driver failure: {exc}"
            )
        finally:
            driver.close()

        ref = ""
        if shots_dir is not None:
            shots_dir.mkdir(parents=True, exist_ok=True)
            (shots_dir / "deploy.png").write_bytes(shot)
            ref = "shots/deploy.png"

        signals: list[str] = []
        notes: list[str] = []
        if is_blank_screen(shot):
            signals.append("blank-screen")
            notes.append("landing page rendered as a uniform color")
        crash_note = self._crash_overlay_note(shot)
        if crash_note:
            signals.append("crash-overlay")
            notes.append(crash_note)
        if expected_image is not None and expected_image.data != shot:
            diff_note = self._visual_diff_note(shot, expected_image)
            if diff_note:
                notes.append(f"visual discrepancies vs design: {diff_note}")
        return DeploymentVerdict(
            ok=not signals,
            screenshot_ref=ref,
            signals=tuple(signals),
            notes="\n".join(notes),
        )

    def _crash_overlay_note(self, shot: bytes) -> str | None:
        bundle = PromptBundle(
            SYSTEM_TEXT,
            (self._prompts["crash_check"].template, ImageAttachment(shot, "png")),
            Grammar.FREE_TEXT,
        )
        reply = self.gateway.complete(bundle, self.config)
        text = reply.text.strip()
        if text.upper().startswith("ERROR"):
            return text
        return None

    def _visual_diff_note(self, shot: bytes, expected: ImageAttachment) -> str | None:
        bundle = PromptBundle(
            SYSTEM_TEXT,
            (
                self._prompts["visual_diff"].template,
                ImageAttachment(shot, "png"),
                expected,
            ),
            Grammar.FREE_TEXT,
        )
        reply = self.gateway.complete(bundle, self.config)
        text = reply.text.strip()
        if text.upper() == "NONE":
            return None
        return text

    # -- single test ------------------------------------------------------------

    def run_test(
        self,
        inst: AppInstance,
        test: SoapOperaTestCase,
        budget: StepBudget | None = None,
        shots_dir: Path | None = None,
    ) -> TestReport:
        """Run one soap-opera test; all failures fold into the report.

        Verdict rule: YES when every step is met; NO when the very first step
        fails (or the instance never launched); PARTIAL when a non-empty
        prefix of steps was met.
        """
        budget = budget or self.budget
        if inst.state is not InstanceState.READY:
            return TestReport(
                test_id=test.id,
                verdict=VERDICT_NO,
                failed_step=1,
                expected=test.steps[0].expectation,
                actual="application never became ready",
                category="launch-failure",
                technical=inst.log_tail(),
                recommendations=("Fix the launch failure before anything else.",),
                traces=tuple(
                    StepTrace(step.index, (), "", "", STEP_SKIPPED) for step in test.steps
                ),
            )

        driver = self.driver_factory(inst.base_url)
        traces: list[StepTrace] = []
        failed_step: int | None = None
        failure: _StepOutcome | None = None
        try:
            for step in test.steps:
                if failed_step is not None:
                    traces.append(StepTrace(step.index, (), "", "", STEP_SKIPPED))
                    continue
                outcome, actions = self._run_step(driver, test, step, budget)
                ref = self._persist_step_shot(driver, test, step, shots_dir)
                traces.append(
                    StepTrace(
                        index=step.index,
                        actions=tuple(actions),
                        observed=outcome.observed,
                        screenshot_ref=ref,
                        verdict=STEP_MET if outcome.verdict == STEP_MET else STEP_UNMET,
                    )
                )
                if outcome.verdict != STEP_MET:
                    failed_step = step.index
                    failure = outcome
        finally:
            driver.close()

        if failed_step is None:
            return TestReport(test_id=test.id, verdict=VERDICT_YES, traces=tuple(traces))
        verdict = VERDICT_NO if failed_step == 1 else VERDICT_PARTIAL
        assert failure is not None
        return TestReport(
            test_id=test.id,
            verdict=verdict,
            failed_step=failed_step,
            expected=test.steps[failed_step - 1].expectation,
            actual=failure.observed,
            category=failure.category or "assertion-mismatch",
            technical=failure.technical,
            recommendations=(failure.recommendation,) if failure.recommendation else (),
            traces=tuple(traces),
        )

    def _run_step(
        self,
        driver: BrowserDriver,
        test: SoapOperaTestCase,
        step: TestStep,
        budget: StepBudget,
    ) -> tuple[_StepOutcome, list[DriverAction]]:
        executed: list[DriverAction] = []
        technical: list[str] = []
        try:
            while len(executed) < budget.actions_per_step:
                plan = self._ask_for_actions(driver, test, step, executed, final=False)
                judged = self._execute_plan(driver, plan, executed, technical, budget)
                if judged is not None:
                    judged.technical = "\n".join(technical)
                    return judged, executed
            # Budget exhausted: a decision prompt forces a final judgment.
            plan = self._ask_for_actions(driver, test, step, executed, final=True)
            for item in plan:
                if item.get("op") == "judge":
                    outcome = _judge_to_outcome(item, default_category="timeout")
                    outcome.technical = "\n".join(technical)
                    return outcome, executed
        except MalformedAfterRetries as exc:
            # Model misbehavior folds into the report; transport and replay
            # failures stay fatal and propagate.
            technical.append(str(exc))
            outcome = _StepOutcome(
                verdict=STEP_UNMET,
                observed="driver decisions stayed unparseable after corrective re-asks",
                category="other",
                technical="\n".join(technical),
            )
            return outcome, executed
        outcome = _StepOutcome(
            verdict=STEP_UNMET,
            observed="no judgment reached within the interaction limit",
            category="timeout",
            technical="\n".join(technical),
        )
        return outcome, executed

    def _execute_plan(
        self,
        driver: BrowserDriver,
        plan: list[dict],
        executed: list[DriverAction],
        technical: list[str],
        budget: StepBudget,
    ) -> _StepOutcome | None:
        for item in plan:
            op = item.get("op")
            if op == "judge":
                return _judge_to_outcome(item)
            action = DriverAction(
                op=str(op),
                target=str(item.get("target", "")),
                text=str(item.get("text", "")),
                seconds=float(item.get("seconds", 0.0)),
            )
            error = self._apply_with_retry(driver, action, budget, technical)
            executed.append(action)
            if error is not None:
                return _StepOutcome(
                    verdict=STEP_UNMET,
                    observed=f"driver action {action.op!r} failed: {error}",
                    category=_error_category(error),
                )
            if len(executed) >= budget.actions_per_step:
                return None
        return None

    def _apply_with_retry(
        self,
        driver: BrowserDriver,
        action: DriverAction,
        budget: StepBudget,
        technical: list[str],
    ) -> Exception | None:
        """Bounded retry for transient driver failures."""
        last: Exception | None = None
        for attempt in range(budget.retry_bound + 1):
            try:
                self._apply_action(driver, action)
                return None
            except DriverError as exc:
                last = exc
                technical.append(f"{action.op} {action.target!r} attempt {attempt + 1}: {exc}")
        return last

    @staticmethod
    def _apply_action(driver: BrowserDriver, action: DriverAction) -> None:
        if action.op == "navigate":
            driver.navigate(action.target)
        elif action.op == "click":
            driver.click(action.target)
        elif action.op == "type":
            driver.type_text(action.target, action.text)
        elif action.op == "wait":
            driver.wait(action.seconds)
        else:
            raise DriverError(f"unknown driver operation {action.op!r}")

    def _ask_for_actions(
        self,
        driver: BrowserDriver,
        test: SoapOperaTestCase,
        step: TestStep,
        executed: list[DriverAction],
        final: bool,
    ) -> list[dict]:
        history = "\n".join(
            f"{i}. {a.op} {a.target or a.text or a.seconds}"
            for i, a in enumerate(executed, start=1)
        ) or "(none yet)"
        template = self._prompts["decision" if final else "user_sim"]
        text = template.substitute(
            TEST_ID=test.id,
            PERSONA_NAME=test.persona.name,
            PERSONA_GOAL=test.persona.goal,
            STEP_INDEX=str(step.index),
            STEP_TOTAL=str(len(test.steps)),
            STEP_ACTION=step.action,
            STEP_EXPECTED=step.expectation,
            LOCATION=driver.location(),
            PAGE_TEXT=driver.page_text() or "(empty page)",
            HISTORY=history,
        )
        bundle = PromptBundle(SYSTEM_TEXT, (text,), Grammar.JSON_ARRAY)
        doc = self.gateway.complete_structured(
            bundle, self.config, validator=_validate_driver_plan
        )
        return doc.document

    def _persist_step_shot(
        self,
        driver: BrowserDriver,
        test: SoapOperaTestCase,
        step: TestStep,
        shots_dir: Path | None,
    ) -> str:
        if shots_dir is None:
            return ""
        try:
            shot = driver.screenshot()
        except DriverError:
            return ""
        shots_dir.mkdir(parents=True, exist_ok=True)
        name = f"{test.id}-step-{step.index}.png"
        (shots_dir / name).write_bytes(shot)
        return f"shots/{name}"

    # -- whole suite -------------------------------------------------------------

    def run_suite(
        self,
        ws: WorkspaceState,
        tests: list[SoapOperaTestCase] | tuple[SoapOperaTestCase, ...],
        parallelism: int,
        round_index: int = 1,
        out_dir: Path | None = None,
        expected_image: ImageAttachment | None = None,
        on_event: Callable[..., None] | None = None,
    ) -> FeedbackBundle:
        """Verify deployment, then run every test on its own instance.

        Deployment failure aborts all tests and returns a diagnostic-only
        bundle. Reports come back in input-test order regardless of worker
        scheduling, and every launched process is stopped before returning.
        """
        if parallelism < 1:
            raise WebforgeError("parallelism must be >= 1")
        tests = list(tests)
        shots_dir = Path(out_dir) / "shots" if out_dir is not None else None
        emit = on_event or (lambda *a, **k: None)

        instances: list[AppInstance] = []
        try:
            try:
                first = self.supervisor.launch(ws)
                instances.append(first)
                emit("app_launched", port=first.port, role="verification")
            except LaunchError as exc:
                emit("launch_failed", error=str(exc))
                verdict = DeploymentVerdict(
                    ok=False,
                    signals=(
                        "process-exit" if isinstance(exc, ProcessExited) else "probe-timeout",
                    ),
                    notes=(
                        f"{exc}\n{exc.instance.log_tail()}" if exc.instance else str(exc)
                    ),
                )
                return build_feedback([], verdict, round_index)

            verdict = self.verify_deployment(first, expected_image, shots_dir)
            emit("deployment_verified", ok=verdict.ok, signals=list(verdict.signals))
            if not verdict.ok:
                return build_feedback([], verdict, round_index)
            if not tests:
                return build_feedback([], verdict, round_index)

            workers = min(parallelism, len(tests))
            while len(instances) < workers:
                try:
                    extra = self.supervisor.launch(ws)
                except LaunchError as exc:
                    # Verification already passed on one instance; run the
                    # suite with the workers we have rather than aborting.
                    emit("worker_launch_degraded", error=str(exc), workers=len(instances))
                    workers = len(instances)
                    break
                instances.append(extra)
                emit("app_launched", port=extra.port, role="worker")

            pool: queue.Queue[AppInstance] = queue.Queue()
            for inst in instances:
                pool.put(inst)

            def run_one(test: SoapOperaTestCase) -> TestReport:
                inst = pool.get()
                try:
                    emit("test_started", test_id=test.id, port=inst.port)
                    report = self.run_test(inst, test, self.budget, shots_dir)
                    emit("test_finished", test_id=test.id, verdict=report.verdict)
                    return report
                finally:
                    pool.put(inst)

            if workers == 1:
                reports = [run_one(test) for test in tests]
            else:
                with ThreadPoolExecutor(max_workers=workers) as executor:
                    reports = list(executor.map(run_one, tests))
            return build_feedback(reports, verdict, round_index)
        finally:
            for inst in instances:
                self.supervisor.stop(inst)


def _judge_to_outcome(item: dict, default_category: str = "assertion-mismatch") -> _StepOutcome:
    verdict = STEP_MET if str(item.get("verdict", "")).lower() == "met" else STEP_UNMET
    category = item.get("category") or default_category
    return _StepOutcome(
        verdict=verdict,
        observed=str(item.get("observed", "")),
        category=None if verdict == STEP_MET else str(category),
        recommendation=str(item.get("recommendation", "")),
    )


def _validate_driver_plan(rows: list) -> list:
    if not isinstance(rows, list) or not rows:
        raise ValueError("expected a non-empty JSON array of driver actions")
    for item in rows:
        if not isinstance(item, dict):
            raise ValueError("each driver action must be a JSON object")
        op = item.get("op")
        if op not in ("navigate", "click", "type", "wait", "judge"):
            raise ValueError(f"unknown driver operation {op!r}")
        if op == "judge" and str(item.get("verdict", "")).lower() not in ("met", "unmet"):
            raise ValueError("judge needs a verdict of met or unmet")
    return rows
