from __future__ import annotations

import json
import random

import pytest

from replay_scenario import EXPECTED_TEMPLATE, REQUEST_TEXT, ScenarioTransport
from webforge.errors import WebforgeError
from webforge.orchestrator import (
    Pipeline,
    PipelineConfig,
    RoundRecord,
    select_best_round,
    tdd_pass_rate,
)
from webforge.testgen.model import UserRequest
from webforge.testrunner.report import (
    VERDICT_NO,
    VERDICT_PARTIAL,
    VERDICT_YES,
    DeploymentVerdict,
    TestReport,
    build_feedback,
)


def _bundle(verdicts: list[str], round_index: int = 1):
    reports = [
        TestReport(
            test_id=f"t-{i}",
            verdict=verdict,
            failed_step=None if verdict == VERDICT_YES else 1,
            category=None if verdict == VERDICT_YES else "other",
        )
        for i, verdict in enumerate(verdicts, start=1)
    ]
    return build_feedback(reports, DeploymentVerdict(ok=True), round_index)


# -- tdd_pass_rate ----------------------------------------------------------


def test_pass_rate_counts_only_yes():
    bundle = _bundle([VERDICT_YES, VERDICT_PARTIAL, VERDICT_NO, VERDICT_YES])
    assert tdd_pass_rate(bundle) == 0.5


def test_pass_rate_zero_reports_is_zero():
    bundle = build_feedback([], DeploymentVerdict(ok=False, signals=("process-exit",)), 1)
    assert tdd_pass_rate(bundle) == 0.0


def test_pass_rate_all_yes_is_one():
    assert tdd_pass_rate(_bundle([VERDICT_YES] * 3)) == 1.0


def test_pass_rate_matches_published_table_value():
    # 25 of 74 tests passing reproduces the published 33.8% three-round rate.
    bundle = _bundle([VERDICT_YES] * 25 + [VERDICT_NO] * 49)
    assert round(tdd_pass_rate(bundle) * 100, 1) == 33.8


# -- select_best_round ---------------------------------------------------------


def _record(round_index: int, rate: float) -> RoundRecord:
    return RoundRecord(round_index, f"hash{round_index}", _bundle([VERDICT_YES]), rate)


def test_best_round_argmax():
    records = [_record(1, 0.2), _record(2, 0.5), _record(3, 0.4)]
    assert select_best_round(records).round_index == 2


def test_best_round_tie_goes_to_latest():
    records = [_record(1, 0.5), _record(2, 0.5)]
    assert select_best_round(records).round_index == 2


def test_best_round_single():
    records = [_record(1, 0.0)]
    assert select_best_round(records).round_index == 1


def test_best_round_random_vectors_against_bruteforce():
    rng = random.Random(42)
    for _ in range(300):
        rates = [rng.choice((0.0, 0.25, 0.5, 0.75, 1.0)) for _ in range(rng.randint(1, 8))]
        records = [_record(i + 1, rate) for i, rate in enumerate(rates)]
        best = select_best_round(records)
        top = max(rates)
        latest_top = max(i + 1 for i, rate in enumerate(rates) if rate == top)
        assert best.round_index == latest_top


# -- full pipeline runs over the scripted scenario --------------------------------


def _run(tmp_path, max_iter: int, name: str):
    config = PipelineConfig(max_iter=max_iter, parallelism=2, base_port=9200)
    pipeline = Pipeline(config, transport=ScenarioTransport())
    request = UserRequest(description=REQUEST_TEXT)
    return pipeline.run(request, tmp_path / name)


def _journal_counts(result):
    events = [json.loads(line) for line in result.journal_path.read_text().splitlines()]
    return (
        sum(1 for e in events if e["event"] == "develop_step"),
        sum(1 for e in events if e["event"] == "suite_finished"),
        events,
    )


def test_pipeline_no_feedback_mode(tmp_path):
    result = _run(tmp_path, 0, "run0")
    develop_steps, suite_runs, _ = _journal_counts(result)
    assert develop_steps == 1
    assert suite_runs == 0
    assert result.records == []
    assert result.selected_round is None
    assert (result.workspace_dir / "public/index.html").exists()


def test_pipeline_one_round(tmp_path):
    result = _run(tmp_path, 1, "run1")
    develop_steps, suite_runs, _ = _journal_counts(result)
    assert suite_runs == 1
    assert develop_steps == 2
    assert result.records[0].pass_rate == 0.75
    assert result.selected_round == 1
    # the feedback develop step already patched the contact link in
    assert "Contact Alex" in (result.workspace_dir / "public/index.html").read_text()


def test_pipeline_early_stop_on_full_pass(tmp_path):
    result = _run(tmp_path, 3, "run3")
    develop_steps, suite_runs, events = _journal_counts(result)
    assert suite_runs == 2
    assert develop_steps == 2
    assert [r.pass_rate for r in result.records] == [0.75, 1.0]
    assert result.selected_round == 2
    assert any(e["event"] == "early_stop" for e in events)
    assert result.records[1].tree_hash == result.final_tree_hash


def test_pipeline_round_bound_without_full_pass(tmp_path):
    # max_iter=2 reaches the passing round exactly at the bound
    result = _run(tmp_path, 2, "run2")
    develop_steps, suite_runs, _ = _journal_counts(result)
    assert suite_runs == 2
    assert develop_steps == 2
    assert result.selected_round == 2


def test_pipeline_selects_template_and_writes_layout(tmp_path):
    result = _run(tmp_path, 0, "layout")
    run_dir = result.run_dir
    assert (run_dir / "suite.json").is_file()
    assert (run_dir / "manifest.json").is_file()
    assert (run_dir / "journal.jsonl").is_file()
    assert (run_dir / "result.json").is_file()
    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert manifest["status"] == "done"
    assert manifest["stats"]["provider_calls"] > 0
    events = [json.loads(l) for l in (run_dir / "journal.jsonl").read_text().splitlines()]
    selected = [e for e in events if e["event"] == "template_selected"]
    assert selected[0]["template_id"] == EXPECTED_TEMPLATE


def test_pipeline_round_snapshots_match_hashes(tmp_path):
    from webforge.workspace.state import scan_tree
    from webforge.canonical import fingerprint_of

    result = _run(tmp_path, 3, "snaps")
    for record in result.records:
        tree_dir = result.run_dir / "rounds" / f"round_{record.round_index}" / "tree"
        rebuilt = fingerprint_of(sorted(scan_tree(tree_dir).items()))
        assert rebuilt == record.tree_hash


class _CrashScenarioTransport:
    """Scenario where the developed app never launches; feedback continues."""

    _SUITE_REPLIES = {
        "Break the request down": json.dumps(
            [{"id": "R1", "statement": "Serve a homepage.", "kind": "functionality", "origin": "explicit"}]
        ),
        "Requirement to elaborate": json.dumps(
            [
                {
                    "requirement_id": "R1",
                    "functional_spec": "serve /",
                    "static_ui_spec": "none",
                    "interaction_spec": "none",
                    "data_sources": [],
                }
            ]
        ),
        "soap-opera style": json.dumps(
            [
                {
                    "persona": {"name": "V", "goal": "see the page"},
                    "category": "functionality",
                    "steps": [{"action": "navigate to /", "expectation": "content shown"}],
                }
            ]
        ),
        "Select only the files relevant": '<Selection><include path="public/index.html"/></Selection>',
        "Please make the necessary updates": '<Action type="file" filePath="public/index.html">\n<h1>x</h1>\n</Action>',
    }

    def __call__(self, bundle, config):
        from webforge.gateway import ModelReply

        text = bundle.text()
        for marker, reply in self._SUITE_REPLIES.items():
            if marker in text:
                return ModelReply(text=reply)
        raise AssertionError(f"unexpected prompt:\n{text[:200]}")


def test_pipeline_deployment_failure_round_feeds_next_develop(tmp_path):
    import json as json_mod

    from conftest import write_template
    from webforge.workspace import TemplateStore

    store_dir = tmp_path / "store"
    write_template(
        store_dir,
        "crash-exit",
        {"public/index.html": "<h1>seed</h1>\n"},
        launch_command='python3 -c "import sys; sys.exit(9)"',
    )
    config = PipelineConfig(
        max_iter=2,
        parallelism=1,
        template_store_dir=store_dir,
        probe_timeout_s=5,
        base_port=9300,
    )
    pipeline = Pipeline(config, transport=_CrashScenarioTransport())
    result = pipeline.run(UserRequest(description="homepage"), tmp_path / "run")
    # Every round records a diagnostic-only bundle and development continues.
    assert [r.pass_rate for r in result.records] == [0.0, 0.0]
    assert all(len(r.feedback.reports) == 0 for r in result.records)
    assert all(not r.feedback.deployment.ok for r in result.records)
    events = [json_mod.loads(l) for l in result.journal_path.read_text().splitlines()]
    develop_steps = sum(1 for e in events if e["event"] == "develop_step")
    assert develop_steps == 3  # initial + one per failed round
    assert any(e["event"] == "launch_failed" for e in events)


def test_pipeline_refuses_nonempty_run_dir(tmp_path):
    target = tmp_path / "dirty"
    target.mkdir()
    (target / "junk").write_text("x")
    config = PipelineConfig(max_iter=0)
    pipeline = Pipeline(config, transport=ScenarioTransport())
    with pytest.raises(WebforgeError):
        pipeline.run(UserRequest(description=REQUEST_TEXT), target)


def test_config_validation():
    with pytest.raises(WebforgeError):
        PipelineConfig(max_iter=-1)
    with pytest.raises(WebforgeError):
        PipelineConfig(parallelism=0)
    with pytest.raises(WebforgeError):
        PipelineConfig(testgen_mode="psychic")
