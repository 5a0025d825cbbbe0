#!/usr/bin/env python3
"""Rebuild the replay cassette and golden files for the homepage scenario.

Records a full ``max_iter=3`` pipeline run against the scripted scenario
provider, replays it from the fresh cassette to prove the outputs reproduce
byte-for-byte, and installs the cassette plus goldens under tests/fixtures/.

Run from the repository root after changing prompts, the scenario, or any
serialization format:

    python3 scripts/build_replay_fixtures.py
"""

from __future__ import annotations

import json
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "tests"))

from replay_scenario import REQUEST_TEXT, ScenarioTransport  # noqa: E402

from webforge.orchestrator import Pipeline, PipelineConfig  # noqa: E402
from webforge.testgen.model import UserRequest  # noqa: E402

FIXTURES = REPO / "tests" / "fixtures"
CASSETTE = FIXTURES / "cassettes" / "homepage.jsonl"
GOLDENS = FIXTURES / "goldens"

GOLDEN_FILES = {
    "suite.json": "suite.json",
    "rounds/round_1/feedback.json": "feedback_round_1.json",
    "rounds/round_2/feedback.json": "feedback_round_2.json",
}


def run_once(work: Path, name: str, cassette: Path, mode: str, transport) -> Path:
    config = PipelineConfig(
        max_iter=3,
        parallelism=2,
        cassette_path=cassette,
        cassette_mode=mode,
        base_port=9400,
    )
    pipeline = Pipeline(config, transport=transport)
    result = pipeline.run(UserRequest(description=REQUEST_TEXT), work / name)
    return result.run_dir


def main() -> int:
    with tempfile.TemporaryDirectory() as tmp:
        work = Path(tmp)
        scratch_cassette = work / "homepage.jsonl"

        record_dir = run_once(work, "record", scratch_cassette, "record", ScenarioTransport())
        replay_dir = run_once(work, "replay", scratch_cassette, "replay", None)

        for rel in GOLDEN_FILES:
            recorded = (record_dir / rel).read_bytes()
            replayed = (replay_dir / rel).read_bytes()
            if recorded != replayed:
                print(f"FATAL: {rel} differs between record and replay runs")
                return 1
        recorded_result = json.loads((record_dir / "result.json").read_text())
        replayed_result = json.loads((replay_dir / "result.json").read_text())
        if recorded_result["final_tree_hash"] != replayed_result["final_tree_hash"]:
            print("FATAL: final tree hash differs between record and replay runs")
            return 1

        CASSETTE.parent.mkdir(parents=True, exist_ok=True)
        GOLDENS.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(scratch_cassette, CASSETTE)
        for rel, golden_name in GOLDEN_FILES.items():
            shutil.copyfile(replay_dir / rel, GOLDENS / golden_name)
        (GOLDENS / "tree_hash.txt").write_text(
            replayed_result["final_tree_hash"] + "\n", encoding="utf-8"
        )
        print(f"cassette: {CASSETTE} ({len(CASSETTE.read_text().splitlines())} entries)")
        print(f"goldens:  {GOLDENS}")
        return 0


if __name__ == "__main__":
    raise SystemExit(main())
