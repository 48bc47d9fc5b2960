"""Orchestration: decompose, then per-tier generate/score/select with regeneration."""

from __future__ import annotations

import hashlib
import re
import time
from dataclasses import replace
from typing import Callable, Optional

from . import decomposer, generator, kpm as kpm_mod
from .backend import Backend, CompletionRequest
from .errors import (
    MissingTierError,
    NoAnswerError,
    NotNumericError,
    RdoltError,
    ScoreParseFailedError,
)
from .model import (
    DecompositionPlan,
    Exchange,
    KpmState,
    RoundOutcome,
    RunConfig,
    RunRecord,
    ScoreVector,
    Task,
    Thought,
    Tier,
    Variant,
    canonical_json,
)
from .scoring import JudgeScorer, Scorer, ScoringRound, parse_score_lines, select_thoughts
from .templates import load_template

EventHook = Callable[[str, dict], None]

_FINAL_ANSWER_LINE = re.compile(r"Final Answer\s*:\s*(.+)")
_ONE_SHOT_RETRIES = 2

UNLIMITED_SAFETY_CAP = 10

NUMERIC_SOURCES = {"gsm8k", "svamp", "multiarith", "gaokao"}
STRING_SOURCES = {"lastletter", "last_letter", "last-letter"}


def run_task(task: Task, backend: Backend, scorer: Scorer, config: RunConfig,
             prompt_dir: Optional[str] = None, exemplars: str = "",
             per_thought: bool = False, on_event: Optional[EventHook] = None,
             run_id: Optional[str] = None) -> RunRecord:
    """Execute one task through the full three-tier loop and return its record.

    On pipeline errors the partially built record is attached to the raised
    exception as `exc.record` so callers can still persist it.
    """
    config.validate()
    rid = run_id or derive_run_id(task, config)
    record = RunRecord(run_id=rid, task=task, config=config)
    started = time.time()
    emit = on_event or (lambda kind, payload: None)

    def exchange(role: str, prompt: str, response: str, tier: Optional[Tier] = None):
        record.transcript.append(
            Exchange(role=role, prompt=prompt, response=response,
                     tier=tier.value if tier else None))

    try:
        plan = decomposer.decompose(
            task, backend, config, prompt_dir, exemplars,
            on_exchange=lambda role, p, r: exchange(role, p, r))
        record.plan = plan
        emit("plan", plan.to_dict())

        state = KpmState(run_id=rid)
        for tier in Tier.ordered():
            state = _run_tier(task, plan, tier, state, backend, scorer, config,
                              prompt_dir, exemplars, per_thought, exchange, emit)
        record.kpm = state

        record.final_answer = extract_final_answer(record)
        record.normalized_answer = normalize_for_task(record.final_answer, task.source)
        record.status = "completed"
        emit("final_answer", {
            "final_answer": record.final_answer,
            "normalized_answer": record.normalized_answer,
        })
    except RdoltError as exc:
        record.status = "failed"
        record.error = str(exc)
        record.timings = _timings(started)
        emit("error", {"message": str(exc)})
        exc.record = record
        raise
    record.timings = _timings(started)
    return record


def _run_tier(task: Task, plan: DecompositionPlan, tier: Tier, state: KpmState,
              backend: Backend, scorer: Scorer, config: RunConfig,
              prompt_dir: Optional[str], exemplars: str, per_thought: bool,
              exchange, emit) -> KpmState:
    round_no = 0
    while True:
        context = kpm_mod.render_kpm_context(
            state, tier, config.kpm_strategy, with_scores=True,
            round_cap=config.kpm_round_cap)
        hook = lambda role, p, r: exchange(role, p, r, tier)  # noqa: E731
        generate = (generator.generate_thoughts_sequential if per_thought
                    else generator.generate_thoughts)
        thoughts = generate(task, plan, tier, context, round_no, backend, config,
                            prompt_dir, exemplars, on_exchange=hook)
        emit("thoughts", {"tier": tier.value, "round": round_no,
                          "thoughts": [t.to_dict() for t in thoughts]})

        ctx = ScoringRound(task=task, plan=plan, tier=tier, kpm_context=context,
                           backend=backend, config=config, prompt_dir=prompt_dir,
                           exemplars=exemplars, on_exchange=hook)
        vectors = scorer.score_round(thoughts, ctx)
        scored = [replace(t, scores=v) for t, v in zip(thoughts, vectors)]

        exhausted = round_no >= config.regen_cap
        selected, rejected = select_thoughts(scored, config.threshold, exhausted)
        outcome = RoundOutcome(
            tier=tier,
            round=round_no,
            generated=tuple(sorted(selected + rejected, key=lambda t: t.ordinal)),
            selected=tuple(t.id for t in selected),
            rejected=tuple(t.id for t in rejected),
            regenerated=not selected,
        )
        state = kpm_mod.record_round(state, outcome)
        emit("round_outcome", outcome.to_dict())
        if selected:
            return state
        emit("regeneration", {"tier": tier.value, "next_round": round_no + 1})
        round_no += 1


def run_variant(task: Task, backend: Backend, scorer: Scorer, config: RunConfig,
                prompt_dir: Optional[str] = None, on_event: Optional[EventHook] = None,
                run_id: Optional[str] = None) -> RunRecord:
    """Dispatch on the configured execution variant; no variant means the
    canonical flow of one batched generation and one scoring request per round."""
    variant = config.variant
    if variant is None:
        return run_task(task, backend, scorer, config, prompt_dir,
                        on_event=on_event, run_id=run_id)
    if variant is Variant.SINGLE_STEP_ONE_SHOT:
        return run_one_shot(task, backend, config, prompt_dir,
                            on_event=on_event, run_id=run_id)

    exemplars = ""
    if variant is Variant.FEW_SHOT_2:
        exemplars = exemplar_text(prompt_dir)
    if variant is Variant.MULTI_REQUEST_3:
        config = replace_config(config, regen_cap=3)
    elif variant is Variant.MULTI_REQUEST_UNLIMITED:
        config = replace_config(config, regen_cap=UNLIMITED_SAFETY_CAP)
    if isinstance(scorer, JudgeScorer):
        scorer = JudgeScorer(per_thought=True)
    return run_task(task, backend, scorer, config, prompt_dir, exemplars=exemplars,
                    per_thought=True, on_event=on_event, run_id=run_id)


def run_one_shot(task: Task, backend: Backend, config: RunConfig,
                 prompt_dir: Optional[str] = None,
                 on_event: Optional[EventHook] = None,
                 run_id: Optional[str] = None) -> RunRecord:
    """The whole protocol in one request; selection is applied engine-side."""
    config.validate()
    rid = run_id or derive_run_id(task, config)
    record = RunRecord(run_id=rid, task=task, config=config)
    started = time.time()
    emit = on_event or (lambda kind, payload: None)

    from .templates import instructions_block, render
    template = load_template("one_shot", prompt_dir)
    base_prompt = render(
        template,
        instructions=instructions_block(task.instructions),
        question=task.statement,
        n_thoughts=config.n_thoughts,
    )
    try:
        prompt = base_prompt
        last_error: Optional[Exception] = None
        parsed = None
        for _ in range(_ONE_SHOT_RETRIES + 1):
            req = CompletionRequest(user_text=prompt, temperature=config.temperature,
                                    max_tokens=config.max_context_tokens,
                                    model=config.model)
            response = backend.complete(req)
            # only a parseable reply counts as final-tier material
            record.transcript.append(
                Exchange(role="one_shot", prompt=req.user_text, response=response))
            try:
                parsed = parse_full_transcript(response, config.n_thoughts)
                record.transcript[-1] = Exchange(
                    role="one_shot", prompt=req.user_text, response=response,
                    tier=Tier.FINAL.value)
                break
            except RdoltError as exc:
                last_error = exc
                prompt = (f"{base_prompt}\n\nYour previous reply could not be used "
                          f"({exc}). Reply again following the protocol exactly.")
        if parsed is None:
            raise ScoreParseFailedError(
                f"no parseable one-shot transcript after "
                f"{_ONE_SHOT_RETRIES + 1} attempts: {last_error}")

        plan, per_tier = parsed
        record.plan = plan
        emit("plan", plan.to_dict())
        state = KpmState(run_id=rid)
        for tier in Tier.ordered():
            thoughts, vectors = per_tier[tier]
            scored = [replace(t, scores=v) for t, v in zip(thoughts, vectors)]
            emit("thoughts", {"tier": tier.value, "round": 0,
                              "thoughts": [t.to_dict() for t in scored]})
            # a single request leaves no room to regenerate, so the argmax
            # fallback applies immediately when nothing clears the threshold
            selected, rejected = select_thoughts(scored, config.threshold,
                                                 exhausted_regens=True)
            outcome = RoundOutcome(
                tier=tier, round=0,
                generated=tuple(sorted(selected + rejected, key=lambda t: t.ordinal)),
                selected=tuple(t.id for t in selected),
                rejected=tuple(t.id for t in rejected),
                regenerated=False,
            )
            state = kpm_mod.record_round(state, outcome)
            emit("round_outcome", outcome.to_dict())
        record.kpm = state
        record.final_answer = extract_final_answer(record)
        record.normalized_answer = normalize_for_task(record.final_answer, task.source)
        record.status = "completed"
        emit("final_answer", {"final_answer": record.final_answer,
                              "normalized_answer": record.normalized_answer})
    except RdoltError as exc:
        record.status = "failed"
        record.error = str(exc)
        record.timings = _timings(started)
        emit("error", {"message": str(exc)})
        exc.record = record
        raise
    record.timings = _timings(started)
    return record


def parse_full_transcript(response: str, n: int) -> tuple[
        DecompositionPlan, dict[Tier, tuple[list[Thought], list[ScoreVector]]]]:
    """Parse a whole-protocol reply: plan, thoughts, and scores for every tier."""
    plan = decomposer.parse_plan(response)
    sections = _tier_sections(response)
    per_tier: dict[Tier, tuple[list[Thought], list[ScoreVector]]] = {}
    for tier in Tier.ordered():
        section = sections[tier]
        thoughts = generator.parse_thought_list(section, tier, 0, n)
        by_ordinal = parse_score_lines(section, [t.ordinal for t in thoughts])
        per_tier[tier] = (thoughts, [by_ordinal[t.ordinal] for t in thoughts])
    return plan, per_tier


def _tier_sections(response: str) -> dict[Tier, str]:
    starts: list[tuple[int, Tier]] = []
    for tier in Tier.ordered():
        m = re.search(rf"Decomposition\s*\[\s*{tier.label}\s*\]", response, re.IGNORECASE)
        if not m:
            raise MissingTierError(tier)
        starts.append((m.start(), tier))
    starts.sort()
    sections = {}
    for i, (pos, tier) in enumerate(starts):
        end = starts[i + 1][0] if i + 1 < len(starts) else len(response)
        sections[tier] = response[pos:end]
    return sections


def run_vanilla(task: Task, backend: Backend, config: RunConfig,
                run_id: Optional[str] = None) -> RunRecord:
    """Single-prompt baseline: ask the question, take the answer.

    A harness sanity reference only; it skips decomposition, scoring, and
    propagation entirely.
    """
    config.validate()
    rid = run_id or derive_run_id(task, config)
    record = RunRecord(run_id=rid, task=task, config=config)
    started = time.time()
    prompt = task.statement
    if task.instructions.strip():
        prompt = f"{task.instructions.strip()}\n\n{task.statement}"
    try:
        response = backend.complete(CompletionRequest(
            user_text=prompt, temperature=config.temperature,
            max_tokens=config.max_context_tokens, model=config.model))
        record.transcript.append(Exchange(role="vanilla", prompt=prompt,
                                          response=response,
                                          tier=Tier.FINAL.value))
        lines = _FINAL_ANSWER_LINE.findall(response)
        record.final_answer = lines[-1].strip() if lines else response.strip()
        record.normalized_answer = normalize_for_task(record.final_answer, task.source)
        record.status = "completed"
    except RdoltError as exc:
        record.status = "failed"
        record.error = str(exc)
        record.timings = _timings(started)
        exc.record = record
        raise
    record.timings = _timings(started)
    return record


# --- answers ---------------------------------------------------------------

def extract_final_answer(record: RunRecord) -> str:
    """The last `Final Answer:` line in the final tier's material, else the
    top-scoring selected final thought's text."""
    answer: Optional[str] = None
    for ex in record.transcript:
        if ex.tier != Tier.FINAL.value:
            continue
        for m in _FINAL_ANSWER_LINE.finditer(ex.response):
            answer = m.group(1).strip()
    if answer:
        return answer
    if record.kpm:
        final_rounds = record.kpm.outcomes_for(Tier.FINAL)
        if final_rounds:
            selected = final_rounds[-1].selected_thoughts()
            if selected:
                best = max(selected, key=lambda t: (t.scores.total, -t.ordinal))
                return best.text
    raise NoAnswerError("no final answer line and no selected final thought")


def normalize_answer(raw: str, kind: str) -> str:
    """Canonicalize an answer for grading; kind is 'numeric' or 'string'."""
    if kind == "numeric":
        text = re.sub(r"[$€£¥]", "", raw).replace(",", "")
        m = re.search(r"(?<![\w.])[-+]?\d+(?:\.\d+)?", text)
        if not m:
            raise NotNumericError(f"no number in {raw!r}")
        value = float(m.group())
        if abs(value - round(value)) < 1e-9:
            return str(int(round(value)))
        out = f"{value:.6f}".rstrip("0").rstrip(".")
        return out
    text = raw.strip()
    quoted = re.findall(r"[\"']([^\"']+)[\"']", text)
    if quoted:
        text = quoted[-1]
    text = text.strip().strip("\"'").strip()
    text = text.rstrip(".!?").strip()
    return text.lower()


def answer_kind_for_source(source: str) -> str:
    """Grading kind from the dataset tag: numeric, string, or auto for unknowns."""
    tag = source.lower()
    if tag in NUMERIC_SOURCES:
        return "numeric"
    if tag in STRING_SOURCES:
        return "string"
    return "auto"


def normalize_for_task(raw: str, source: str) -> str:
    kind = answer_kind_for_source(source)
    if kind == "auto":
        try:
            return normalize_answer(raw, "numeric")
        except NotNumericError:
            return normalize_answer(raw, "string")
    return normalize_answer(raw, kind)


def attributed_tier(record: RunRecord) -> Tier:
    """Which tier produced the graded answer: the earliest tier with a selected
    thought whose text already contains it, else Final."""
    if not record.kpm or record.normalized_answer is None:
        return Tier.FINAL
    answer = record.normalized_answer.lower()
    if not answer:
        return Tier.FINAL
    pattern = re.compile(rf"(?<![\w.]){re.escape(answer)}(?![\w.])")
    for tier in Tier.ordered():
        for outcome in record.kpm.outcomes_for(tier):
            for t in outcome.selected_thoughts():
                if pattern.search(t.text.lower()):
                    return tier
    return Tier.FINAL


# --- plumbing ---------------------------------------------------------------

def derive_run_id(task: Task, config: RunConfig) -> str:
    """Deterministic run id so identical replays produce identical records."""
    digest = hashlib.sha256()
    digest.update(canonical_json(task.to_dict()).encode())
    digest.update(canonical_json(config.to_dict()).encode())
    return digest.hexdigest()[:16]


def replace_config(config: RunConfig, **changes) -> RunConfig:
    d = config.to_dict()
    d.update(changes)
    return RunConfig.from_dict(d)


def exemplar_text(prompt_dir: Optional[str] = None) -> str:
    """The two shipped worked transcripts, prepended by the few-shot variant."""
    parts = ["Here are two worked examples of the full procedure:\n"]
    for i, name in enumerate(("exemplar_lastletter", "exemplar_gsm8k"), start=1):
        parts.append(f"Example {i}:\n{load_template(name, prompt_dir).strip()}\n")
    parts.append("---\n\n")
    return "\n".join(parts)


def _timings(started: float) -> dict:
    finished = time.time()
    return {
        "started_at": started,
        "finished_at": finished,
        "duration_ms": round((finished - started) * 1000.0, 3),
    }
