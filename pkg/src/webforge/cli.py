"""Command-line entry point: generate, test, evaluate.

Exit codes: 0 success, 2 usage error, 3 provider/replay failure, 4 internal
error. Progress is streamed as one JSON event per line so logs are machine
parseable; no command ever prompts for input once started.
"""

from __future__ import annotations

import json
import sys
import uuid
from pathlib import Path

import click

from webforge.canonical import stable_dumps
from webforge.errors import GatewayError, WebforgeError
from webforge.evalharness import alignment_rate, emit_report
from webforge.evalharness.metrics import EvalRecord, TestRow
from webforge.gateway import ImageAttachment
from webforge.orchestrator.config import load_config
from webforge.orchestrator.pipeline import Pipeline
from webforge.testgen import load_suite
from webforge.testgen.model import UserRequest
from webforge.testrunner.report import VERDICTS

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PROVIDER = 3
EXIT_INTERNAL = 4


@click.group()
def main() -> None:
    """Generate, test, and evaluate web applications from requirements."""


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _is_provider_failure(exc: BaseException | None) -> bool:
    """True when a gateway failure sits anywhere in the cause chain."""
    seen = 0
    while exc is not None and seen < 10:
        if isinstance(exc, GatewayError):
            return True
        exc = exc.__cause__ or getattr(exc, "cause", None)
        seen += 1
    return False


def _load_request(desc: str | None, desc_file: str | None, image: str | None) -> UserRequest:
    if desc and desc_file:
        raise click.UsageError("use either --desc or --desc-file, not both")
    if desc_file:
        desc = Path(desc_file).read_text(encoding="utf-8")
    if not desc or not desc.strip():
        raise click.UsageError("a request description is required (--desc/--desc-file)")
    attachment = None
    if image:
        path = Path(image)
        suffix = path.suffix.lstrip(".").lower() or "png"
        attachment = ImageAttachment(path.read_bytes(), "jpeg" if suffix == "jpg" else suffix)
    return UserRequest(description=desc, image=attachment)


def _cassette_options(record: str | None, replay: str | None) -> dict:
    if record and replay:
        raise click.UsageError("--record and --replay are mutually exclusive")
    if record:
        return {"cassette_path": Path(record), "cassette_mode": "record"}
    if replay:
        return {"cassette_path": Path(replay), "cassette_mode": "replay"}
    return {}


@main.command("generate")
@click.option("--desc", help="Request description text.")
@click.option("--desc-file", type=click.Path(exists=True, dir_okay=False), help="File with the description.")
@click.option("--image", type=click.Path(exists=True, dir_okay=False), help="Optional design image.")
@click.option("--max-iter", type=int, default=None, help="Test/refine rounds (0 disables testing).")
@click.option("--parallelism", type=int, default=None)
@click.option("--testgen", "testgen_mode", type=click.Choice(["multi-step", "straightforward"]), default=None)
@click.option("--record", type=click.Path(), help="Record model traffic to this cassette.")
@click.option("--replay", type=click.Path(exists=True), help="Replay model traffic from this cassette.")
@click.option("--template-store", type=click.Path(exists=True), help="Template store directory.")
@click.option("--config", "config_file", type=click.Path(exists=True), help="Config JSON file.")
@click.option("--run-dir", type=click.Path(), help="Run directory (default: runs/<id>).")
@click.option("--base-port", type=int, default=None)
def cmd_generate(
    desc, desc_file, image, max_iter, parallelism, testgen_mode,
    record, replay, template_store, config_file, run_dir, base_port,
) -> None:
    """Run the full pipeline for one request."""
    request = _load_request(desc, desc_file, image)
    overrides = _cassette_options(record, replay)
    if template_store:
        overrides["template_store_dir"] = Path(template_store)
    try:
        config = load_config(
            Path(config_file) if config_file else None,
            max_iter=max_iter,
            parallelism=parallelism,
            testgen_mode=testgen_mode,
            base_port=base_port,
            **overrides,
        )
    except (WebforgeError, OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"bad configuration: {exc}") from exc

    target = Path(run_dir) if run_dir else Path("runs") / uuid.uuid4().hex[:12]
    try:
        pipeline = Pipeline(config)
        result = pipeline.run(request, target, echo=click.echo)
    except WebforgeError as exc:
        _fail(EXIT_PROVIDER if _is_provider_failure(exc) else EXIT_INTERNAL, str(exc))
    click.echo(json.dumps({"event": "done", "run_dir": str(target), "selected_round": result.selected_round}))


@main.command("test")
@click.option("--workspace", type=click.Path(exists=True), required=True, help="Workspace directory.")
@click.option("--suite", "suite_file", type=click.Path(exists=True), required=True, help="Suite JSON file.")
@click.option("--out", "out_file", type=click.Path(), default=None, help="Feedback bundle output path.")
@click.option("--parallelism", type=int, default=None)
@click.option("--record", type=click.Path(), help="Record model traffic to this cassette.")
@click.option("--replay", type=click.Path(exists=True), help="Replay model traffic from this cassette.")
@click.option("--template-store", type=click.Path(exists=True), help="Template store directory.")
@click.option("--config", "config_file", type=click.Path(exists=True), help="Config JSON file.")
@click.option("--base-port", type=int, default=None)
def cmd_test(workspace, suite_file, out_file, parallelism, record, replay, template_store, config_file, base_port) -> None:
    """Run the testing agent once against an existing workspace.

    Launch failures are diagnostics, not errors: the bundle is still written
    and the exit code stays 0.
    """
    from webforge.workspace.templates import TemplateStore, builtin_store, load_workspace

    overrides = _cassette_options(record, replay)
    if template_store:
        overrides["template_store_dir"] = Path(template_store)
    try:
        config = load_config(
            Path(config_file) if config_file else None,
            parallelism=parallelism,
            base_port=base_port,
            **overrides,
        )
        suite = load_suite(Path(suite_file))
    except (WebforgeError, OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"bad configuration or suite: {exc}") from exc
    if not suite.tests:
        raise click.UsageError("the suite contains no test cases")

    store = (
        TemplateStore(config.template_store_dir)
        if config.template_store_dir
        else builtin_store()
    )
    try:
        pipeline = Pipeline(config)
        ws = load_workspace(Path(workspace), store)
        # Default next to the workspace, not inside it: the bundle and step
        # screenshots must not become part of the application tree.
        out_path = (
            Path(out_file) if out_file else Path(workspace).resolve().parent / "feedback.json"
        )
        bundle = pipeline.testrunner.run_suite(
            ws,
            suite.tests,
            config.parallelism,
            round_index=1,
            out_dir=out_path.parent,
            on_event=lambda event, **fields: click.echo(
                json.dumps({"event": event, **fields}, sort_keys=True)
            ),
        )
    except WebforgeError as exc:
        _fail(EXIT_PROVIDER if _is_provider_failure(exc) else EXIT_INTERNAL, str(exc))
    out_path.write_text(stable_dumps(bundle.to_json_dict()), encoding="utf-8")
    click.echo(json.dumps({"event": "done", "bundle": str(out_path), "counts": bundle.counts}))


@main.command("evaluate")
@click.option("--records", "records_file", type=click.Path(exists=True), help="Evaluation records JSON.")
@click.option("--alignment", "alignment_files", nargs=2, type=click.Path(exists=True), default=None,
              help="Two verdict files (agent, manual) keyed by test id.")
@click.option("--out", "out_dir", type=click.Path(), default=None, help="Report output directory.")
def cmd_evaluate(records_file, alignment_files, out_dir) -> None:
    """Compute accuracy tables from records, or alignment between verdict files."""
    if alignment_files:
        agent_map = _load_verdict_map(Path(alignment_files[0]))
        manual_map = _load_verdict_map(Path(alignment_files[1]))
        shared = sorted(set(agent_map) & set(manual_map))
        if not shared:
            raise click.UsageError("the two verdict files share no test ids")
        result = alignment_rate([(agent_map[k], manual_map[k]) for k in shared])
        click.echo(f"alignment rate: {result.rate:.1f}% ({result.matched}/{result.total})")
        if result.restricted_rate is not None:
            click.echo(
                f"yes/no alignment rate: {result.restricted_rate:.1f}% "
                f"({result.restricted_matched}/{result.restricted_total})"
            )
        return
    if not records_file:
        raise click.UsageError("provide --records or --alignment")
    records, problems = _load_records(Path(records_file))
    if problems:
        for problem in problems:
            click.echo(f"error: {problem}", err=True)
        sys.exit(EXIT_USAGE)
    try:
        report = emit_report(records)
    except WebforgeError as exc:
        _fail(EXIT_INTERNAL, str(exc))
    target = Path(out_dir) if out_dir else Path(records_file).parent
    target.mkdir(parents=True, exist_ok=True)
    (target / "report.json").write_text(stable_dumps(report.to_json_dict()), encoding="utf-8")
    (target / "report.txt").write_text(report.render_text(), encoding="utf-8")
    click.echo(report.render_text(), nl=False)


def _load_verdict_map(path: Path) -> dict[str, str]:
    data = json.loads(path.read_text(encoding="utf-8"))
    out = {}
    for key, value in data.items():
        verdict = str(value).upper()
        if verdict not in VERDICTS:
            raise click.UsageError(f"{path}: verdict for {key!r} must be one of {VERDICTS}")
        out[str(key)] = verdict
    return out


def _load_records(path: Path) -> tuple[list[EvalRecord], list[str]]:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        return [], [f"{path}: not valid JSON ({exc})"]
    records: list[EvalRecord] = []
    problems: list[str] = []
    for i, item in enumerate(data if isinstance(data, list) else []):
        try:
            tests = tuple(
                TestRow(
                    verdict=str(t["verdict"]).upper(),
                    instruction_category=str(t.get("instruction_category", "")),
                    test_category=str(t.get("test_category", "")),
                )
                for t in item.get("tests", [])
            )
            records.append(
                EvalRecord(
                    app_id=str(item["app_id"]),
                    tests=tests,
                    fail_to_start=bool(item.get("fail_to_start", False)),
                    appearance_score=item.get("appearance_score"),
                    visual_similarity=item.get("visual_similarity"),
                )
            )
        except (KeyError, TypeError, WebforgeError) as exc:
            problems.append(f"record {i}: {exc}")
    if not isinstance(data, list):
        problems.append(f"{path}: expected a JSON array of records")
    return records, problems


if __name__ == "__main__":
    main()
