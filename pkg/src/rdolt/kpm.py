"""Append-only history of selected/rejected thoughts and its prompt rendering."""

from __future__ import annotations

from dataclasses import replace

from .errors import OutOfOrderError
from .model import KpmState, KpmStrategy, RoundOutcome, Thought, Tier

DEFAULT_ROUND_CAP = 2  # most recent rounds per tier rendered into prompts


def record_round(state: KpmState, outcome: RoundOutcome) -> KpmState:
    """Append an outcome; (tier, round) must directly follow the last recorded pair."""
    last = state.last()
    if last is None:
        expected = [(Tier.EASY, 0)]
    else:
        expected = [(last.tier, last.round + 1)]
        nxt = _next_tier(last.tier)
        if nxt is not None:
            expected.append((nxt, 0))
    if (outcome.tier, outcome.round) not in expected:
        allowed = " or ".join(f"({t.value}, {r})" for t, r in expected)
        raise OutOfOrderError(
            f"got ({outcome.tier.value}, {outcome.round}), expected {allowed}")
    latest = dict(state.latest_round)
    latest[outcome.tier.value] = outcome.round
    return replace(state, rounds=state.rounds + (outcome,), latest_round=latest)


def needs_regeneration(outcome: RoundOutcome) -> bool:
    """Per the empty-selection rule: regenerate when nothing met the threshold."""
    return len(outcome.selected) == 0


def visible_history(state: KpmState, tier: Tier) -> list[RoundOutcome]:
    """Outcomes visible when working at `tier`: earlier tiers plus earlier rounds of it."""
    return [o for o in state.rounds if o.tier <= tier]


def render_kpm_context(state: KpmState, tier: Tier, strategy: KpmStrategy,
                       with_scores: bool = False,
                       round_cap: int = DEFAULT_ROUND_CAP) -> str:
    """Deterministic per-tier blocks of selected/rejected thoughts, strategy-filtered.

    Block headers follow the exact transcript grammar, e.g.
    `Selected Thoughts (Easy): Thought 1, Thought 2`. Equal-score thoughts keep
    ordinal order; no score-based reordering happens here.
    """
    history = visible_history(state, tier)
    sections: list[str] = []
    for block_tier in Tier.ordered():
        rounds = [o for o in history if o.tier is block_tier]
        if not rounds:
            continue
        rounds = rounds[-round_cap:]
        multi_round = len(rounds) > 1
        selected = [t for o in rounds for t in o.selected_thoughts()]
        rejected = [t for o in rounds for t in o.rejected_thoughts()]
        selected, rejected = _apply_strategy(strategy, selected, rejected)
        lines: list[str] = []
        _emit_block(lines, "Selected", block_tier, selected, multi_round, with_scores)
        _emit_block(lines, "Rejected", block_tier, rejected, multi_round, with_scores)
        if lines:
            sections.append("\n".join(lines))
    return "\n\n".join(sections)


def _next_tier(tier: Tier) -> Tier | None:
    order = Tier.ordered()
    idx = order.index(tier)
    return order[idx + 1] if idx + 1 < len(order) else None


def _apply_strategy(strategy: KpmStrategy, selected: list[Thought],
                    rejected: list[Thought]) -> tuple[list[Thought], list[Thought]]:
    if strategy is KpmStrategy.SELECTED_ONLY:
        return selected, []
    if strategy is KpmStrategy.HIGHEST_SELECTED_ONLY:
        return _extreme_by_total(selected, max), []
    if strategy is KpmStrategy.LOWEST_REJECTED_ONLY:
        return selected, _extreme_by_total(rejected, min)
    return selected, rejected


def _extreme_by_total(thoughts: list[Thought], pick) -> list[Thought]:
    """The argmax/argmin set by total score; ties all kept with equal priority."""
    scored = [t for t in thoughts if t.scores is not None]
    if not scored:
        return []
    bound = pick(t.scores.total for t in scored)
    return [t for t in scored if t.scores.total == bound]


def _emit_block(lines: list[str], kind: str, tier: Tier, thoughts: list[Thought],
                multi_round: bool, with_scores: bool) -> None:
    if not thoughts:
        return
    labels = ", ".join(_label(t, multi_round) for t in thoughts)
    lines.append(f"{kind} Thoughts ({tier.label}): {labels}")
    for t in thoughts:
        detail = f"- {_label(t, multi_round)}: {t.text}"
        if with_scores and t.scores is not None:
            s = t.scores
            detail += (f" [LV: {s.validity}, COH: {s.coherence}, SIM: {s.simplicity},"
                       f" ADP: {s.adaptiveness}, Total: {s.total}]")
        lines.append(detail)


def _label(thought: Thought, multi_round: bool) -> str:
    if multi_round:
        return f"Thought {thought.ordinal} [round {thought.round}]"
    return f"Thought {thought.ordinal}"
