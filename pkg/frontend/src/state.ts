// Pure view-model reducer. The console renders exclusively from run events;
// selection coloring always comes from round_outcome payloads, never from
// comparing scores to a threshold locally.

import {
  PlanPayload,
  RunEvent,
  ThoughtPayload,
  TierName,
  TIERS,
} from "./types.js";

export interface HistoryBlock {
  tier: TierName;
  round: number;
  selectedLine: string;
  rejectedLine: string;
  regenerated: boolean;
}

export interface PendingGate {
  thoughtIds: string[];
  tier: TierName | null;
  round: number | null;
}

export interface ConsoleState {
  plan: PlanPayload | null;
  cards: Record<TierName, ThoughtPayload[]>;
  history: HistoryBlock[];
  pending: PendingGate | null;
  finalAnswer: { raw: string; normalized: string } | null;
  errorMessage: string | null;
  done: boolean;
}

export function initialState(): ConsoleState {
  return {
    plan: null,
    cards: { easy: [], intermediate: [], final: [] },
    history: [],
    pending: null,
    finalAnswer: null,
    errorMessage: null,
    done: false,
  };
}

function tierLabel(tier: TierName): string {
  return tier.charAt(0).toUpperCase() + tier.slice(1);
}

function labelList(outcome: { generated: ThoughtPayload[] }, ids: string[]): string {
  const byId = new Map(outcome.generated.map((t) => [t.id, t]));
  const ordinals = ids
    .map((id) => byId.get(id))
    .filter((t): t is ThoughtPayload => t !== undefined)
    .sort((a, b) => a.ordinal - b.ordinal)
    .map((t) => `Thought ${t.ordinal}`);
  return ordinals.length ? ordinals.join(", ") : "(none)";
}

function upsertCards(
  existing: ThoughtPayload[],
  incoming: ThoughtPayload[],
): ThoughtPayload[] {
  const merged = new Map(existing.map((t) => [t.id, t]));
  for (const thought of incoming) {
    merged.set(thought.id, thought);
  }
  return [...merged.values()].sort(
    (a, b) => a.round - b.round || a.ordinal - b.ordinal,
  );
}

export function applyEvent(state: ConsoleState, event: RunEvent): ConsoleState {
  switch (event.kind) {
    case "plan":
      return { ...state, plan: event.payload };
    case "thoughts": {
      const { tier, thoughts } = event.payload;
      return {
        ...state,
        cards: { ...state.cards, [tier]: upsertCards(state.cards[tier], thoughts) },
      };
    }
    case "scores_requested":
      return {
        ...state,
        pending: {
          thoughtIds: event.payload.thought_ids,
          tier: event.payload.tier,
          round: event.payload.round,
        },
      };
    case "round_outcome": {
      const outcome = event.payload;
      const label = tierLabel(outcome.tier);
      const block: HistoryBlock = {
        tier: outcome.tier,
        round: outcome.round,
        selectedLine: `Selected Thoughts (${label}): ${labelList(outcome, outcome.selected)}`,
        rejectedLine: `Rejected Thoughts (${label}): ${labelList(outcome, outcome.rejected)}`,
        regenerated: outcome.regenerated,
      };
      return {
        ...state,
        pending: null,
        cards: {
          ...state.cards,
          [outcome.tier]: upsertCards(state.cards[outcome.tier], outcome.generated),
        },
        history: [...state.history, block],
      };
    }
    case "regeneration":
      return state; // the next thoughts event introduces the new round's cards
    case "final_answer":
      return {
        ...state,
        pending: null,
        done: true,
        finalAnswer: {
          raw: event.payload.final_answer,
          normalized: event.payload.normalized_answer,
        },
      };
    case "error":
      return { ...state, pending: null, done: true, errorMessage: event.payload.message };
  }
}

export function replay(events: RunEvent[]): ConsoleState {
  return events.reduce(applyEvent, initialState());
}

export function cardsFor(state: ConsoleState, tier: TierName): ThoughtPayload[] {
  return state.cards[tier];
}

export function allTiers(): TierName[] {
  return TIERS;
}
