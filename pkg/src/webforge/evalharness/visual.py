"""Visual-similarity judging: the rubric prompt and score parsing."""

from __future__ import annotations

import re
import warnings

from webforge.errors import ScoreParseError
from webforge.gateway import Grammar, ImageAttachment, PromptBundle

RUBRIC_ASPECTS = (
    "Layout",
    "Components",
    "Color Scheme",
    "Size and Proportion",
    "Visual Fidelity",
)

_RUBRIC_DETAIL = {
    "Layout": (
        "Does the overall structure of the website (positioning of sections, "
        "grids, spacing) align with the design image?"
    ),
    "Components": (
        "Are the required UI elements (buttons, forms, images, navigation bars) "
        "present and placed correctly?"
    ),
    "Color Scheme": (
        "Are the background, text, and component colors consistent with the "
        "design image?"
    ),
    "Size and Proportion": (
        "Do elements (images, text blocks, buttons) have similar relative sizes "
        "and proportions compared to the design image?"
    ),
    "Visual Fidelity": (
        "Does the overall look and feel of the website closely resemble the "
        "design image?"
    ),
}

_NUMBER = re.compile(r"-?\d+(?:\.\d+)?")


def build_visual_prompt(screenshot: ImageAttachment, design: ImageAttachment) -> PromptBundle:
    """Prompt asking a vision model to rate screenshot-vs-design on 1..5."""
    lines = [
        "You are an expert web designer and evaluator. Your task is to assess "
        "how well a generated website matches a given design image.",
        "The first attached image is the website rendering; the second is the "
        "design image.",
        "Consider the following aspects:",
    ]
    for i, aspect in enumerate(RUBRIC_ASPECTS, start=1):
        lines.append(f"{i}. {aspect}: {_RUBRIC_DETAIL[aspect]}")
    lines.append(
        "Instruction: compare the website rendering against the design image. "
        "Provide an overall similarity score from 1 to 5 (1 = very poor match, "
        "5 = almost identical). End your reply with the score on its own line."
    )
    return PromptBundle(
        system="You are a meticulous visual design judge.",
        turns=("\n".join(lines), screenshot, design),
        grammar=Grammar.FREE_TEXT,
    )


def parse_score(reply_text: str) -> float:
    """Extract the score from the reply's final non-empty line.

    Accepts integers or decimals; values outside [1, 5] are clamped with a
    warning rather than rejected.
    """
    for line in reversed(reply_text.strip().split("\n")):
        match = _NUMBER.search(line)
        if match:
            value = float(match.group(0))
            if value < 1.0 or value > 5.0:
                clamped = min(max(value, 1.0), 5.0)
                warnings.warn(
                    f"score {value} outside [1, 5]; clamped to {clamped}",
                    stacklevel=2,
                )
                return clamped
            return value
    raise ScoreParseError(f"no numeric score found in reply: {reply_text!r}")
