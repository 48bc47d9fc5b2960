"""Shared test machinery: fixtures, independent oracles, and a rule-backed solver."""

from __future__ import annotations

import json
import math
import re
from fractions import Fraction
from pathlib import Path

from rdolt.backend import CompletionRequest
from rdolt.model import RoundOutcome, ScoreVector, Task, Thought, ThoughtStatus, Tier, thought_id

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def load_fixture(name: str) -> dict:
    return json.loads((FIXTURES / f"{name}.json").read_text(encoding="utf-8"))


def fixture_task(fx: dict) -> Task:
    return Task.from_dict(fx["task"])


# --- independent oracles -----------------------------------------------------

def oracle_cosine(a: str, b: str) -> float:
    """Token-frequency cosine, coded independently of the engine's version."""
    def counts(text):
        bag = {}
        for token in re.split(r"[^a-z0-9]+", text.lower()):
            if token:
                bag[token] = bag.get(token, 0) + 1
        return bag

    ca, cb = counts(a), counts(b)
    keys = set(ca) | set(cb)
    dot = math.fsum(ca.get(k, 0) * cb.get(k, 0) for k in keys)
    na = math.sqrt(math.fsum(v * v for v in ca.values()))
    nb = math.sqrt(math.fsum(v * v for v in cb.values()))
    if na == 0 or nb == 0:
        return 0.0
    return dot / (na * nb)


def oracle_assertion_true(a: int, op: str, b: int, claimed) -> bool:
    """Exact rational evaluation of one binary arithmetic assertion."""
    fa, fb = Fraction(a), Fraction(b)
    if op == "+":
        value = fa + fb
    elif op == "-":
        value = fa - fb
    elif op == "*":
        value = fa * fb
    else:
        if fb == 0:
            return False
        value = fa / fb
    return abs(value - Fraction(claimed)) <= Fraction(1, 10**6)


# --- model builders ----------------------------------------------------------

def make_thought(tier: Tier, ordinal: int, text: str, total=None, round_no: int = 0,
                 status: ThoughtStatus = ThoughtStatus.PENDING) -> Thought:
    scores = None
    if total is not None:
        base, rem = divmod(total, 4)
        parts = [base + (1 if i < rem else 0) for i in range(4)]
        scores = ScoreVector.of(*parts)
    return Thought(
        id=thought_id(tier, round_no, ordinal),
        tier=tier,
        round=round_no,
        ordinal=ordinal,
        text=text,
        scores=scores,
        status=status,
    )


def make_outcome(tier: Tier, round_no: int, totals: list[int], threshold: int,
                 texts=None, force_reject_all: bool = False) -> RoundOutcome:
    thoughts = []
    selected, rejected = [], []
    for i, total in enumerate(totals, start=1):
        text = texts[i - 1] if texts else f"{tier.value} thought {i}"
        keep = total >= threshold and not force_reject_all
        status = ThoughtStatus.SELECTED if keep else ThoughtStatus.REJECTED
        t = make_thought(tier, i, text, total=total, round_no=round_no, status=status)
        thoughts.append(t)
        (selected if keep else rejected).append(t.id)
    return RoundOutcome(
        tier=tier,
        round=round_no,
        generated=tuple(thoughts),
        selected=tuple(selected),
        rejected=tuple(rejected),
        regenerated=not selected,
    )


# --- rule-backed solver backend -----------------------------------------------

_SENTENCE = re.compile(r"sentence:\s*'([^']+)'")
_LEVEL = re.compile(r"Current level:\s*(\w+)")
_BATCH = re.compile(r"Propose (\d+) candidate thoughts")
_SINGLE = re.compile(r"Propose thought number (\d+)")


class LastLetterSolverBackend:
    """Deterministic fake model that actually solves last-letter tasks by rule.

    Unlike a canned script it answers any number of requests, so regeneration
    loops and per-thought variants run against it unchanged.
    """

    def __init__(self):
        self.calls = 0

    def complete(self, req: CompletionRequest) -> str:
        self.calls += 1
        prompt = req.user_text
        sentence_match = _SENTENCE.search(prompt)
        if sentence_match is None:
            raise AssertionError("solver backend got a prompt without the sentence")
        words = sentence_match.group(1).split()
        answer = "".join(w.rstrip(".,!?;:")[-1] for w in words).lower()

        if "Write exactly three sections" in prompt:
            return (
                "Decomposition [Easy]\n"
                "Description: List the words of the sentence and take the last letter of each.\n\n"
                "Decomposition [Intermediate]\n"
                "Description: Join the collected last letters in sentence order.\n\n"
                "Decomposition [Final]\n"
                "Description: State the joined string as the final answer.\n"
            )

        level_match = _LEVEL.search(prompt)
        if level_match is None:
            raise AssertionError("solver backend got an unexpected prompt kind")
        tier = level_match.group(1).lower()
        letters = ", ".join(w.rstrip(".,!?;:")[-1].lower() for w in words)
        texts = {
            "easy": [
                f"The words of the sentence are: {', '.join(words)}.",
                f"The last letters of those words are: {letters}.",
                "Each word keeps its position so the letters stay in sentence order.",
            ],
            "intermediate": [
                f"Joining the letters {letters} in order gives \"{answer}\".",
                f"The joined string \"{answer}\" has one letter per word of the sentence.",
                "No letters were skipped or repeated while joining.",
            ],
            "final": [
                f"The concatenated string for this sentence is \"{answer}\".",
                f"Reading the last letters in order confirms \"{answer}\".",
                "All steps were applied to every word exactly once.",
            ],
        }[tier]

        single = _SINGLE.search(prompt)
        if single:
            ordinal = int(single.group(1))
            body = f"Thought {ordinal}: {texts[(ordinal - 1) % len(texts)]}"
        else:
            batch = _BATCH.search(prompt)
            n = int(batch.group(1)) if batch else 3
            lines = [f"Thought {i}: {texts[(i - 1) % len(texts)]}"
                     for i in range(1, n + 1)]
            body = "\n".join(lines)
        if tier == "final":
            body += f"\n\nFinal Answer: \"{answer}\""
        return body


def solver_script(question: str, n: int = 3) -> list[str]:
    """Materialize solver responses for the canonical 4-request deterministic run."""
    solver = LastLetterSolverBackend()
    prompts = [
        "Write exactly three sections\nsentence: '{s}'",
        "Current level: Easy\nsentence: '{s}'\nPropose {n} candidate thoughts",
        "Current level: Intermediate\nsentence: '{s}'\nPropose {n} candidate thoughts",
        "Current level: Final\nsentence: '{s}'\nPropose {n} candidate thoughts",
    ]
    sentence = question.split("'")[1]
    return [solver.complete(CompletionRequest(
        user_text=p.format(s=sentence, n=n))) for p in prompts]
