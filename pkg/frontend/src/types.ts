export type TierName = "easy" | "intermediate" | "final";

export const TIERS: TierName[] = ["easy", "intermediate", "final"];

export type ThoughtStatus = "pending" | "selected" | "rejected";

export interface ScoreVector {
  validity: number;
  coherence: number;
  simplicity: number;
  adaptiveness: number;
  total: number;
}

export interface ThoughtPayload {
  id: string;
  tier: TierName;
  round: number;
  ordinal: number;
  text: string;
  scores: ScoreVector | null;
  status: ThoughtStatus;
}

export interface PlanPayload {
  easy: string;
  intermediate: string;
  final: string;
}

export interface ThoughtsPayload {
  tier: TierName;
  round: number;
  thoughts: ThoughtPayload[];
}

export interface ScoresRequestedPayload {
  thought_ids: string[];
  tier: TierName | null;
  round: number | null;
}

export interface RoundOutcomePayload {
  tier: TierName;
  round: number;
  generated: ThoughtPayload[];
  selected: string[];
  rejected: string[];
  regenerated: boolean;
}

export interface FinalAnswerPayload {
  final_answer: string;
  normalized_answer: string;
}

export type RunEvent =
  | { kind: "plan"; payload: PlanPayload }
  | { kind: "thoughts"; payload: ThoughtsPayload }
  | { kind: "scores_requested"; payload: ScoresRequestedPayload }
  | { kind: "round_outcome"; payload: RoundOutcomePayload }
  | { kind: "regeneration"; payload: { tier: TierName; next_round: number } }
  | { kind: "final_answer"; payload: FinalAnswerPayload }
  | { kind: "error"; payload: { message: string } };

export const EVENT_KINDS = [
  "plan",
  "thoughts",
  "scores_requested",
  "round_outcome",
  "regeneration",
  "final_answer",
  "error",
] as const;
