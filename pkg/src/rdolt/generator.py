"""Second request kind: candidate thought generation for one tier round."""

from __future__ import annotations

import re
from typing import Callable, Optional

from .backend import Backend, CompletionRequest
from .errors import EmptyThoughtError, GenerationFailedError, WrongCountError
from .model import DecompositionPlan, RunConfig, Task, Thought, Tier, thought_id
from .templates import block, instructions_block, load_template, render

ExchangeHook = Callable[[str, str, str], None]

_PARSE_RETRIES = 2
_THOUGHT_LINE = re.compile(r"^\s*Thought\s+(\d+)\s*:\s*(.*)$")

REGENERATION_NOTE = (
    "Every thought from your previous attempt was rejected for scoring below "
    "the selection threshold; the rejected thoughts are listed in the history "
    "above. Propose different, stronger thoughts this time."
)


def build_generation_prompt(task: Task, plan: DecompositionPlan, tier: Tier,
                            kpm_context: str, prior: list[Thought],
                            config: RunConfig, round_no: int = 0,
                            ordinal: Optional[int] = None,
                            prompt_dir: Optional[str] = None,
                            exemplars: str = "") -> CompletionRequest:
    """Prompt for one round of thoughts (or one thought when `ordinal` is given)."""
    name = "generation_single" if ordinal is not None else "generation"
    template = load_template(name, prompt_dir)
    prior_lines = "\n".join(f"Thought {t.ordinal}: {t.text}" for t in prior)
    text = render(
        template,
        instructions=instructions_block(task.instructions),
        question=task.statement,
        tier=tier.label,
        tier_description=plan.for_tier(tier),
        kpm_context=block("History of thoughts from earlier steps:", kpm_context),
        prior_thoughts=block("Thoughts already proposed at this level this round:",
                             prior_lines),
        regeneration_note=block("Note:", REGENERATION_NOTE if round_no > 0 else ""),
        n_thoughts=config.n_thoughts,
        ordinal=ordinal if ordinal is not None else "",
    )
    if exemplars:
        text = exemplars + text
    return CompletionRequest(
        user_text=text,
        temperature=config.temperature,
        max_tokens=config.max_context_tokens,
        model=config.model,
    )


def parse_thought_list(response: str, tier: Tier, round_no: int, n: int) -> list[Thought]:
    """Extract exactly n thoughts with ordinals 1..n; any other prose is ignored."""
    found: dict[int, str] = {}
    for line in response.splitlines():
        m = _THOUGHT_LINE.match(line)
        if not m:
            continue
        ordinal = int(m.group(1))
        if ordinal in found:
            continue  # keep the first statement of each ordinal
        found[ordinal] = m.group(2).strip()
    if set(found) != set(range(1, n + 1)):
        raise WrongCountError(found=len(found), expected=n)
    for ordinal in range(1, n + 1):
        if not found[ordinal]:
            raise EmptyThoughtError(ordinal)
    return [
        Thought(
            id=thought_id(tier, round_no, ordinal),
            tier=tier,
            round=round_no,
            ordinal=ordinal,
            text=found[ordinal],
        )
        for ordinal in sorted(found)
    ]


def parse_one_thought(response: str, tier: Tier, round_no: int, ordinal: int) -> Thought:
    """Extract a single thought line carrying the requested ordinal."""
    for line in response.splitlines():
        m = _THOUGHT_LINE.match(line)
        if m and int(m.group(1)) == ordinal:
            text = m.group(2).strip()
            if not text:
                raise EmptyThoughtError(ordinal)
            return Thought(
                id=thought_id(tier, round_no, ordinal),
                tier=tier,
                round=round_no,
                ordinal=ordinal,
                text=text,
            )
    raise WrongCountError(found=0, expected=1)


def generate_thoughts(task: Task, plan: DecompositionPlan, tier: Tier,
                      kpm_context: str, round_no: int, backend: Backend,
                      config: RunConfig, prompt_dir: Optional[str] = None,
                      exemplars: str = "",
                      on_exchange: Optional[ExchangeHook] = None) -> list[Thought]:
    """One batched request for the whole round, with corrective parse retries."""
    base = build_generation_prompt(task, plan, tier, kpm_context, [], config,
                                   round_no=round_no, prompt_dir=prompt_dir,
                                   exemplars=exemplars)

    def attempt(prompt: str) -> list[Thought]:
        return parse_thought_list(_ask(backend, base, prompt, on_exchange),
                                  tier, round_no, config.n_thoughts)

    return _with_retries(attempt, base.user_text, GenerationFailedError)


def generate_thoughts_sequential(task: Task, plan: DecompositionPlan, tier: Tier,
                                 kpm_context: str, round_no: int, backend: Backend,
                                 config: RunConfig, prompt_dir: Optional[str] = None,
                                 exemplars: str = "",
                                 on_exchange: Optional[ExchangeHook] = None) -> list[Thought]:
    """One request per thought, each conditioned on the thoughts before it."""
    thoughts: list[Thought] = []
    for ordinal in range(1, config.n_thoughts + 1):
        base = build_generation_prompt(task, plan, tier, kpm_context, thoughts,
                                       config, round_no=round_no, ordinal=ordinal,
                                       prompt_dir=prompt_dir, exemplars=exemplars)

        def attempt(prompt: str, _ordinal=ordinal, _base=base) -> Thought:
            return parse_one_thought(_ask(backend, _base, prompt, on_exchange),
                                     tier, round_no, _ordinal)

        thoughts.append(_with_retries(attempt, base.user_text, GenerationFailedError))
    return thoughts


def _ask(backend: Backend, base: CompletionRequest, prompt: str,
         on_exchange: Optional[ExchangeHook]) -> str:
    req = CompletionRequest(
        user_text=prompt,
        system_text=base.system_text,
        temperature=base.temperature,
        max_tokens=base.max_tokens,
        model=base.model,
    )
    response = backend.complete(req)
    if on_exchange:
        on_exchange("generation", req.user_text, response)
    return response


def _with_retries(attempt, base_prompt: str, failure):
    last_error = None
    prompt = base_prompt
    for _ in range(_PARSE_RETRIES + 1):
        try:
            return attempt(prompt)
        except (WrongCountError, EmptyThoughtError) as exc:
            last_error = exc
            prompt = (
                f"{base_prompt}\n\nYour previous reply could not be used "
                f"({exc}). Reply again following the required format exactly."
            )
    raise failure(
        f"no parseable thoughts after {_PARSE_RETRIES + 1} attempts: {last_error}")
