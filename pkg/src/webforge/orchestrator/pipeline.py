"""The TDD pipeline: generate tests, develop, test, refine, select best round.

Control flow::

    testgen -> select template -> initial develop step
    for round in 1..max_iter:
        run suite -> record round (tested tree, feedback, pass rate)
        stop early if the round passed completely
        develop step driven by the feedback digest

Each tested round is snapshotted, so the best-performing tree can be selected
afterwards even when later refinement makes things worse. The develop step
that follows a failing final round produces the run's final working tree; it
is never tested, and best-round selection only considers tested trees.
"""

from __future__ import annotations

import shutil
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from webforge.canonical import fingerprint_of, stable_dumps
from webforge.devagent import DevelopmentAgent, DevTask
from webforge.errors import WebforgeError
from webforge.gateway import LLMGateway
from webforge.gateway.cassette import CassetteMode, ReplayCassette
from webforge.gateway.transport import HttpChatTransport
from webforge.orchestrator.config import PipelineConfig
from webforge.orchestrator.journal import RunJournal
from webforge.testgen import TestGenerator, TestSuite, dump_suite
from webforge.testgen.model import StepBudget, UserRequest
from webforge.testrunner import FeedbackBundle, Supervisor, TestRunner
from webforge.testrunner.driver import HttpProbeDriver
from webforge.testrunner.report import VERDICT_YES
from webforge.testrunner.supervisor import PortAllocator
from webforge.workspace import TemplateStore, init_from_template
from webforge.workspace.templates import builtin_store, save_meta


@dataclass(frozen=True)
class RoundRecord:
    round_index: int
    tree_hash: str
    feedback: FeedbackBundle
    pass_rate: float

    def to_json_dict(self) -> dict:
        return {
            "round_index": self.round_index,
            "tree_hash": self.tree_hash,
            "pass_rate": self.pass_rate,
            "counts": dict(self.feedback.counts),
        }


@dataclass
class PipelineResult:
    run_id: str
    run_dir: Path
    selected_round: int | None
    records: list[RoundRecord]
    final_tree_hash: str
    workspace_dir: Path
    suite: TestSuite
    journal_path: Path

    def to_json_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "selected_round": self.selected_round,
            "rounds": [r.to_json_dict() for r in self.records],
            "final_tree_hash": self.final_tree_hash,
            "workspace_dir": str(self.workspace_dir),
            "journal_path": str(self.journal_path),
        }


def tdd_pass_rate(bundle: FeedbackBundle) -> float:
    """Fraction of tests judged YES; 0 for rounds with no reports."""
    total = len(bundle.reports)
    if total == 0:
        return 0.0
    passed = sum(1 for r in bundle.reports if r.verdict == VERDICT_YES)
    return passed / total


def select_best_round(records: list[RoundRecord]) -> RoundRecord:
    """The record with the highest pass rate; ties go to the latest round."""
    if not records:
        raise WebforgeError("no round records to select from")
    best = records[0]
    for record in records[1:]:
        if record.pass_rate >= best.pass_rate:
            best = record
    return best


class Pipeline:
    """One runnable pipeline wiring all agents behind a single gateway."""

    def __init__(self, config: PipelineConfig, transport=None):
        self.config = config
        cassette = ReplayCassette(config.cassette_path, config.cassette_mode)
        if transport is None and CassetteMode(config.cassette_mode) is not CassetteMode.REPLAY:
            transport = HttpChatTransport()
        self.gateway = LLMGateway(cassette, transport)
        self.store = (
            TemplateStore(config.template_store_dir)
            if config.template_store_dir
            else builtin_store()
        )
        self.testgen = TestGenerator(self.gateway, config.provider)
        self.devagent = DevelopmentAgent(
            self.gateway,
            config.provider,
            fallback_template_id=config.fallback_template_id,
            summary_budget=config.summary_budget,
        )
        supervisor = Supervisor(
            allocator=PortAllocator(config.base_port),
            probe_timeout_s=config.probe_timeout_s,
        )
        driver_factory = HttpProbeDriver
        if config.driver == "cdp":
            from webforge.testrunner.cdp import CdpBrowserDriver

            def driver_factory(base_url: str):  # noqa: F811 - deliberate rebind
                return CdpBrowserDriver(base_url, config.cdp_host, config.cdp_port)

        self.testrunner = TestRunner(
            self.gateway,
            config.provider,
            supervisor=supervisor,
            driver_factory=driver_factory,
            budget=StepBudget(config.step_budget, config.retry_bound),
        )

    # -- run ------------------------------------------------------------------

    def run(self, request: UserRequest, run_dir: Path, echo=None) -> PipelineResult:
        run_dir = Path(run_dir)
        run_dir.mkdir(parents=True, exist_ok=True)
        if any(run_dir.iterdir()):
            raise WebforgeError(f"run directory {run_dir} is not empty")
        journal = RunJournal(run_dir / "journal.jsonl", echo=echo)
        # Deterministic id: the same request under the same config replays to
        # the same result, journal included.
        run_id = fingerprint_of(
            {"request": request.description, "config": self.config.to_json_dict()}
        )[:12]
        manifest = {
            "run_id": run_id,
            "status": "running",
            "created_at": _now(),
            "finished_at": None,
            "config": self.config.to_json_dict(),
            "stats": {},
        }
        _write_manifest(run_dir, manifest)
        journal.emit("run_started", run_id=run_id, testgen_mode=self.config.testgen_mode)

        try:
            result = self._run_inner(request, run_dir, journal, run_id)
        except Exception as exc:
            manifest["status"] = "failed"
            manifest["finished_at"] = _now()
            manifest["error"] = str(exc)
            manifest["stats"] = self.gateway.stats()
            _write_manifest(run_dir, manifest)
            journal.emit("run_failed", error=str(exc))
            raise
        manifest["status"] = "done"
        manifest["finished_at"] = _now()
        manifest["stats"] = self.gateway.stats()
        _write_manifest(run_dir, manifest)
        journal.emit("run_finished", selected_round=result.selected_round)
        return result

    def _run_inner(
        self, request: UserRequest, run_dir: Path, journal: RunJournal, run_id: str
    ) -> PipelineResult:
        config = self.config

        if config.testgen_mode == "straightforward":
            suite = self.testgen.generate_suite_straightforward(request)
        else:
            suite = self.testgen.generate_suite(request)
        dump_suite(suite, run_dir / "suite.json")
        journal.emit(
            "suite_generated",
            requirements=len(suite.requirements),
            tests=len(suite.tests),
        )

        template = self.devagent.select_template(request, self.store.descriptors())
        journal.emit("template_selected", template_id=template.template_id)
        ws = init_from_template(template, run_dir / "workspace")

        initial_task = DevTask(_initial_instruction(request, suite), round_index=0)
        summary = self.devagent.develop_step(ws, initial_task)
        journal.emit("develop_step", **summary.to_json_dict())

        records: list[RoundRecord] = []
        for round_index in range(1, config.max_iter + 1):
            round_dir = run_dir / "rounds" / f"round_{round_index}"
            round_dir.mkdir(parents=True, exist_ok=True)
            bundle = self.testrunner.run_suite(
                ws,
                suite.tests,
                config.parallelism,
                round_index=round_index,
                out_dir=round_dir,
                expected_image=request.image,
                on_event=lambda event, **fields: journal.emit(event, **fields),
            )
            rate = tdd_pass_rate(bundle)
            tree_hash = ws.tree_hash()
            (round_dir / "feedback.json").write_text(
                stable_dumps(bundle.to_json_dict()), encoding="utf-8"
            )
            (round_dir / "tree_hash.txt").write_text(tree_hash + "\n", encoding="utf-8")
            if config.keep_round_trees:
                shutil.copytree(
                    ws.root,
                    round_dir / "tree",
                    ignore=shutil.ignore_patterns(".webforge.json"),
                )
            records.append(RoundRecord(round_index, tree_hash, bundle, rate))
            journal.emit(
                "suite_finished",
                round_index=round_index,
                pass_rate=rate,
                counts=bundle.counts,
            )
            if rate == 1.0:
                journal.emit("early_stop", round_index=round_index)
                break
            feedback_task = DevTask(bundle.digest, round_index=round_index)
            summary = self.devagent.develop_step(ws, feedback_task)
            journal.emit("develop_step", **summary.to_json_dict())

        save_meta(ws)
        selected = select_best_round(records).round_index if records else None
        result = PipelineResult(
            run_id=run_id,
            run_dir=run_dir,
            selected_round=selected,
            records=records,
            final_tree_hash=ws.tree_hash(),
            workspace_dir=ws.root,
            suite=suite,
            journal_path=journal.path,
        )
        (run_dir / "result.json").write_text(
            stable_dumps(result.to_json_dict()), encoding="utf-8"
        )
        return result


def _initial_instruction(request: UserRequest, suite: TestSuite) -> str:
    lines = [
        "Build the application described below, starting from the current "
        "project template.",
        "",
        "User request:",
        request.description.strip(),
        "",
        "Requirements to satisfy:",
    ]
    for req in suite.requirements:
        marker = " (inferred)" if req.origin == "inferred" else ""
        lines.append(f"- {req.id}: {req.statement}{marker}")
    return "\n".join(lines)


def _write_manifest(run_dir: Path, manifest: dict) -> None:
    (run_dir / "manifest.json").write_text(stable_dumps(manifest), encoding="utf-8")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()
