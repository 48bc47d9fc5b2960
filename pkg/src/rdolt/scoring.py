"""Third request kind: score thoughts on four features and select by threshold.

Three interchangeable scorer modes: the model as judge, a deterministic
rule/similarity scorer, and a human scorer fed through the control service.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol

from .backend import Backend, CompletionRequest
from .errors import ScoreParseFailedError, SessionClosedError, UnscoredError
from .model import (
    DecompositionPlan,
    RunConfig,
    ScoreVector,
    ScorerMode,
    Task,
    Thought,
    ThoughtStatus,
    Tier,
)
from .templates import block, instructions_block, load_template, render

ExchangeHook = Callable[[str, str, str], None]

_PARSE_RETRIES = 2

VALIDITY_PENALTY = 2  # score points lost per violated rule
SIMPLICITY_BUCKET = 25  # tokens per point of simplicity lost
HUMAN_TIMEOUT_S = 600.0

_SCORE_LINE = re.compile(
    r"^\s*-?\s*Thought\s+(\d+)\s*:\s*"
    r"LV\s*:\s*(-?\d+)\s*,\s*COH\s*:\s*(-?\d+)\s*,\s*"
    r"SIM\s*:\s*(-?\d+)\s*,\s*ADP\s*:\s*(-?\d+)\s*,\s*Total\s*:\s*(-?\d+)"
)


# --- arithmetic rule -------------------------------------------------------

_NUM = r"[-−]?\$?\d+(?:\.\d+)?"
_ASSERTION = re.compile(rf"({_NUM})\s*([+\-−×xX*/÷])\s*({_NUM})\s*=\s*({_NUM})")
_OPERATORS = set("+-−×*/÷=")


def find_arithmetic_assertions(text: str) -> list[tuple[float, str, float, float]]:
    """All standalone binary assertions `a <op> b = c` in the text.

    Matches that continue a longer expression on either side (chained sums,
    further operators after the claimed result) are not binary assertions and
    are skipped.
    """
    out = []
    for m in _ASSERTION.finditer(text):
        if _continues_expression_left(text, m.start()):
            continue
        if _continues_expression_right(text, m.end()):
            continue
        a, op, b, claimed = m.groups()
        out.append((_to_number(a), _canonical_op(op), _to_number(b), _to_number(claimed)))
    return out


def assertion_holds(a: float, op: str, b: float, claimed: float, tol: float = 1e-6) -> bool:
    if op == "+":
        value = a + b
    elif op == "-":
        value = a - b
    elif op == "*":
        value = a * b
    else:
        if b == 0:
            return False
        value = a / b
    return abs(value - claimed) <= tol


def arithmetic_rule(text: str, task: Task) -> int:
    """Violation count: every stated binary arithmetic assertion must be true."""
    return sum(
        0 if assertion_holds(a, op, b, claimed) else 1
        for a, op, b, claimed in find_arithmetic_assertions(text)
    )


def _canonical_op(op: str) -> str:
    if op in "×xX*":
        return "*"
    if op in "-−":
        return "-"
    if op in "/÷":
        return "/"
    return "+"


def _to_number(token: str) -> float:
    return float(token.replace("$", "").replace("−", "-"))


def _continues_expression_left(text: str, start: int) -> bool:
    i = start - 1
    while i >= 0 and text[i] == " ":
        i -= 1
    if i < 0:
        return False
    ch = text[i]
    if ch in _OPERATORS:
        return True
    if ch in "xX":  # an 'x' is only an operator when a number precedes it
        j = i - 1
        while j >= 0 and text[j] == " ":
            j -= 1
        return j >= 0 and text[j].isdigit()
    return False

def _continues_expression_right(text: str, end: int) -> bool:
    i = end
    while i < len(text) and text[i] == " ":
        i += 1
    return i < len(text) and text[i] in _OPERATORS


# --- rule sets -------------------------------------------------------------

Rule = Callable[[str, Task], int]


@dataclass
class RuleSet:
    """Pure predicates over thought text and task context, counting violations."""

    rules: list[Rule] = field(default_factory=lambda: [arithmetic_rule])

    def violations(self, text: str, task: Task) -> int:
        return sum(rule(text, task) for rule in self.rules)


def default_rule_set() -> RuleSet:
    return RuleSet()


# --- token similarity ------------------------------------------------------

def tokenize(text: str) -> list[str]:
    """Lowercase tokens with punctuation stripped."""
    return re.findall(r"[a-z0-9]+", text.lower())


def cosine_tf(a: str | list[str], b_vector: dict[str, float]) -> float:
    """Cosine between a text's token-frequency vector and a prebuilt vector."""
    a_counts = Counter(tokenize(a) if isinstance(a, str) else a)
    if not a_counts or not b_vector:
        return 0.0
    dot = sum(count * b_vector.get(token, 0.0) for token, count in a_counts.items())
    norm_a = math.sqrt(sum(c * c for c in a_counts.values()))
    norm_b = math.sqrt(sum(v * v for v in b_vector.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / (norm_a * norm_b)


def tf_vector(text: str) -> dict[str, float]:
    return {token: float(count) for token, count in Counter(tokenize(text)).items()}


def mean_tf_vector(texts: list[str]) -> dict[str, float]:
    total: Counter = Counter()
    for text in texts:
        total.update(tokenize(text))
    k = len(texts)
    return {token: count / k for token, count in total.items()} if k else {}


def _clamp(value: int, lo: int = 0, hi: int = 10) -> int:
    return max(lo, min(hi, value))


# --- deterministic scorer --------------------------------------------------

def deterministic_score(thought: Thought, prior_thoughts: list[Thought],
                        tier_description: str, task: Task, rules: RuleSet,
                        validity_penalty: int = VALIDITY_PENALTY,
                        simplicity_bucket: int = SIMPLICITY_BUCKET) -> ScoreVector:
    """Pure four-feature scoring; identical inputs give identical vectors.

    Validity penalizes rule violations; coherence is token cosine against the
    mean of the earlier thoughts at this tier (the tier description for the
    first thought, which has no predecessors); simplicity decays with token
    count; adaptiveness is token cosine against the instructions + question.
    """
    violations = rules.violations(thought.text, task)
    validity = _clamp(10 - validity_penalty * violations)

    if prior_thoughts:
        target = mean_tf_vector([t.text for t in prior_thoughts])
    else:
        target = tf_vector(tier_description)
    coherence = _clamp(round(10 * cosine_tf(thought.text, target)))

    token_count = len(tokenize(thought.text))
    simplicity = _clamp(10 - token_count // simplicity_bucket)

    context = f"{task.instructions} {task.statement}".strip()
    adaptiveness = _clamp(round(10 * cosine_tf(thought.text, tf_vector(context))))

    return ScoreVector.of(validity, coherence, simplicity, adaptiveness)


# --- judge scorer ----------------------------------------------------------

def build_scoring_prompt(thoughts: list[Thought], task: Task, plan: DecompositionPlan,
                         tier: Tier, kpm_context: str, config: RunConfig,
                         prompt_dir: Optional[str] = None,
                         exemplars: str = "") -> CompletionRequest:
    template = load_template("scoring", prompt_dir)
    listing = "\n".join(f"Thought {t.ordinal}: {t.text}" for t in thoughts)
    text = render(
        template,
        instructions=instructions_block(task.instructions),
        question=task.statement,
        tier=tier.label,
        tier_description=plan.for_tier(tier),
        kpm_context=block("History of thoughts from earlier steps:", kpm_context),
        thoughts=listing,
    )
    if exemplars:
        text = exemplars + text
    return CompletionRequest(
        user_text=text,
        temperature=config.temperature,
        max_tokens=config.max_context_tokens,
        model=config.model,
    )


def parse_score_lines(response: str, ordinals: list[int]) -> dict[int, ScoreVector]:
    """Parse score lines; components are clamped and totals recomputed locally."""
    found: dict[int, ScoreVector] = {}
    for line in response.splitlines():
        m = _SCORE_LINE.match(line)
        if not m:
            continue
        ordinal = int(m.group(1))
        if ordinal in found:
            continue
        lv, coh, sim, adp = (_clamp(int(m.group(i))) for i in (2, 3, 4, 5))
        # the model-stated total is ignored; the sum rule wins
        found[ordinal] = ScoreVector.of(lv, coh, sim, adp)
    missing = [o for o in ordinals if o not in found]
    if missing:
        raise ScoreParseFailedError(f"no score line for thought(s) {missing}")
    return found


def judge_score(thoughts: list[Thought], task: Task, plan: DecompositionPlan,
                tier: Tier, kpm_context: str, backend: Backend, config: RunConfig,
                prompt_dir: Optional[str] = None, exemplars: str = "",
                on_exchange: Optional[ExchangeHook] = None) -> list[ScoreVector]:
    """One scoring request for the given thoughts, with corrective parse retries."""
    if not thoughts:
        raise ValueError("nothing to score")
    base = build_scoring_prompt(thoughts, task, plan, tier, kpm_context, config,
                                prompt_dir, exemplars)
    ordinals = [t.ordinal for t in thoughts]
    prompt = base.user_text
    last_error: Optional[Exception] = None
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
            on_exchange("scoring", req.user_text, response)
        try:
            by_ordinal = parse_score_lines(response, ordinals)
            return [by_ordinal[o] for o in ordinals]
        except ScoreParseFailedError as exc:
            last_error = exc
            prompt = (
                f"{base.user_text}\n\nYour previous reply could not be used "
                f"({exc}). Reply again following the required format exactly."
            )
    raise ScoreParseFailedError(
        f"no parseable scores after {_PARSE_RETRIES + 1} attempts: {last_error}")


# --- human scorer ----------------------------------------------------------

class ScoreSink(Protocol):
    """Transport that a blocked human scorer waits on (provided by the service)."""

    def request_scores(self, thoughts: list[Thought],
                       timeout: float) -> dict[str, tuple[int, int, int, int]]: ...


def human_score(thoughts: list[Thought], score_sink: ScoreSink,
                timeout: float = HUMAN_TIMEOUT_S) -> list[ScoreVector]:
    """Block until four components per thought arrive through the sink."""
    submitted = score_sink.request_scores(thoughts, timeout)
    vectors = []
    for t in thoughts:
        if t.id not in submitted:
            raise SessionClosedError(f"no scores delivered for thought {t.id}")
        lv, coh, sim, adp = (_clamp(int(c)) for c in submitted[t.id])
        vectors.append(ScoreVector.of(lv, coh, sim, adp))
    return vectors


# --- selection -------------------------------------------------------------

def select_thoughts(scored: list[Thought], threshold: int,
                    exhausted_regens: bool = False) -> tuple[list[Thought], list[Thought]]:
    """Partition scored thoughts: total >= threshold selects (inclusive).

    An empty selection signals regeneration, except when regenerations are
    exhausted: then every top-scoring thought (the whole tie set) is selected
    so the run can progress.
    """
    for t in scored:
        if t.scores is None:
            raise UnscoredError(f"thought {t.id} has no scores")
    selected = [t for t in scored if t.scores.total >= threshold]
    if not selected and exhausted_regens and scored:
        best = max(t.scores.total for t in scored)
        selected = [t for t in scored if t.scores.total == best]
    selected_ids = {t.id for t in selected}
    out_selected, out_rejected = [], []
    for t in scored:
        if t.id in selected_ids:
            out_selected.append(t.with_scores(t.scores, ThoughtStatus.SELECTED))
        else:
            out_rejected.append(t.with_scores(t.scores, ThoughtStatus.REJECTED))
    return out_selected, out_rejected


# --- scorer dispatch -------------------------------------------------------

@dataclass
class ScoringRound:
    """Everything a scorer may need to score one tier round."""

    task: Task
    plan: DecompositionPlan
    tier: Tier
    kpm_context: str
    backend: Backend
    config: RunConfig
    prompt_dir: Optional[str] = None
    exemplars: str = ""
    on_exchange: Optional[ExchangeHook] = None


class Scorer(Protocol):
    def score_round(self, thoughts: list[Thought], ctx: ScoringRound) -> list[ScoreVector]: ...


class JudgeScorer:
    """Scores through the backing model; per_thought splits the round into
    one request per thought."""

    def __init__(self, per_thought: bool = False):
        self.per_thought = per_thought

    def score_round(self, thoughts, ctx: ScoringRound):
        if self.per_thought:
            return [
                judge_score([t], ctx.task, ctx.plan, ctx.tier, ctx.kpm_context,
                            ctx.backend, ctx.config, ctx.prompt_dir, ctx.exemplars,
                            ctx.on_exchange)[0]
                for t in thoughts
            ]
        return judge_score(thoughts, ctx.task, ctx.plan, ctx.tier, ctx.kpm_context,
                           ctx.backend, ctx.config, ctx.prompt_dir, ctx.exemplars,
                           ctx.on_exchange)


class DeterministicScorer:
    def __init__(self, rules: Optional[RuleSet] = None,
                 validity_penalty: int = VALIDITY_PENALTY,
                 simplicity_bucket: int = SIMPLICITY_BUCKET):
        self.rules = rules or default_rule_set()
        self.validity_penalty = validity_penalty
        self.simplicity_bucket = simplicity_bucket

    def score_round(self, thoughts, ctx: ScoringRound):
        description = ctx.plan.for_tier(ctx.tier)
        return [
            deterministic_score(t, thoughts[:i], description, ctx.task, self.rules,
                                self.validity_penalty, self.simplicity_bucket)
            for i, t in enumerate(thoughts)
        ]


class HumanScorer:
    def __init__(self, sink: ScoreSink, timeout: float = HUMAN_TIMEOUT_S):
        self.sink = sink
        self.timeout = timeout

    def score_round(self, thoughts, ctx: ScoringRound):
        return human_score(thoughts, self.sink, self.timeout)


def make_scorer(config: RunConfig, sink: Optional[ScoreSink] = None,
                per_thought: bool = False) -> Scorer:
    if config.scorer_mode is ScorerMode.DETERMINISTIC:
        return DeterministicScorer()
    if config.scorer_mode is ScorerMode.HUMAN:
        if sink is None:
            raise ValueError("human scoring requires a score sink (run via the service)")
        return HumanScorer(sink)
    return JudgeScorer(per_thought=per_thought)
