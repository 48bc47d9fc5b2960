"""First request kind: produce and parse the three-tier decomposition plan."""

from __future__ import annotations

import re
from typing import Callable, Optional

from .backend import Backend, CompletionRequest
from .errors import DecompositionFailedError, EmptyDescriptionError, MissingTierError, RdoltError
from .model import DecompositionPlan, RunConfig, Task, Tier
from .templates import instructions_block, load_template, render

ExchangeHook = Callable[[str, str, str], None]

_PARSE_RETRIES = 2

# Lines that end a running Description capture.
_STRUCTURAL = re.compile(r"^\s*(Decomposition\s*\[|Thought\s+\d+\s*:|Scores\s*:|KPM\s*\[|Final Answer\s*:)")


def build_decomposition_prompt(task: Task, config: RunConfig,
                               prompt_dir: Optional[str] = None,
                               exemplars: str = "") -> CompletionRequest:
    """Prompt asking for the three labeled tier sections, with X and Q verbatim."""
    template = load_template("decomposition", prompt_dir)
    text = render(
        template,
        instructions=instructions_block(task.instructions),
        question=task.statement,
    )
    if exemplars:
        text = exemplars + text
    return CompletionRequest(
        user_text=text,
        temperature=config.temperature,
        max_tokens=config.max_context_tokens,
        model=config.model,
    )


def parse_plan(response: str) -> DecompositionPlan:
    """Extract each tier's Description, tolerating surrounding prose and any order."""
    descriptions: dict[Tier, str] = {}
    for tier in Tier.ordered():
        section = re.search(
            rf"Decomposition\s*\[\s*{tier.label}\s*\]", response, re.IGNORECASE)
        if not section:
            raise MissingTierError(tier)
        tail = response[section.end():]
        desc = re.search(r"Description[ \t]*:[ \t]*(.*)", tail)
        if not desc:
            raise EmptyDescriptionError(tier)
        lines = [desc.group(1).strip()]
        for line in tail[desc.start():].splitlines()[1:]:
            if not line.strip() or _STRUCTURAL.match(line):
                break
            lines.append(line.strip())
        text = " ".join(part for part in lines if part).strip()
        if not text:
            raise EmptyDescriptionError(tier)
        descriptions[tier] = text
    return DecompositionPlan(
        easy=descriptions[Tier.EASY],
        intermediate=descriptions[Tier.INTERMEDIATE],
        final=descriptions[Tier.FINAL],
    )


def decompose(task: Task, backend: Backend, config: RunConfig,
              prompt_dir: Optional[str] = None, exemplars: str = "",
              on_exchange: Optional[ExchangeHook] = None) -> DecompositionPlan:
    """Request a plan, retrying with a corrective suffix when parsing fails."""
    base = build_decomposition_prompt(task, config, prompt_dir, exemplars)
    prompt = base.user_text
    last_error: Optional[RdoltError] = None
    for _ in range(_PARSE_RETRIES + 1):
        req = CompletionRequest(
            user_text=prompt,
            system_text=base.system_text,
            temperature=base.temperature,
            max_tokens=base.max_tokens,
            model=base.model,
        )
        response = backend.complete(req)
        if on_exchange:
            on_exchange("decomposition", req.user_text, response)
        try:
            return parse_plan(response)
        except (MissingTierError, EmptyDescriptionError) as exc:
            last_error = exc
            prompt = (
                f"{base.user_text}\n\nYour previous reply could not be used "
                f"({exc}). Reply again following the required format exactly."
            )
    raise DecompositionFailedError(
        f"no parseable decomposition after {_PARSE_RETRIES + 1} attempts: {last_error}")
