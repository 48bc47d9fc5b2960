// Thin client over the control service; the console talks to nothing else.

import { EVENT_KINDS, RunEvent } from "./types.js";

export interface LaunchRequest {
  statement: string;
  source?: string;
  config: Record<string, unknown>;
}

export async function fetchDefaults(base = ""): Promise<Record<string, unknown>> {
  const resp = await fetch(`${base}/api/health`);
  const body = await resp.json();
  return (body.defaults ?? {}) as Record<string, unknown>;
}

export async function startRun(
  body: LaunchRequest,
  base = "",
): Promise<{ run_id: string }> {
  const resp = await fetch(`${base}/api/runs`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  const parsed = await resp.json();
  if (!resp.ok) {
    throw new Error(parsed.detail ?? `request failed with ${resp.status}`);
  }
  return parsed as { run_id: string };
}

export interface SubmitResult {
  ok: boolean;
  status: number;
  detail: string;
}

export async function submitScores(
  runId: string,
  payload: { scores: Record<string, Record<string, number>> },
  base = "",
): Promise<SubmitResult> {
  const resp = await fetch(`${base}/api/runs/${runId}/scores`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
  const body = await resp.json().catch(() => ({}));
  return {
    ok: resp.ok,
    status: resp.status,
    detail: (body as { detail?: string }).detail ?? "",
  };
}

export interface Subscription {
  close(): void;
}

/**
 * Subscribe to a run's event stream. The service replays the full history on
 * every (re)connect, so `onReset` fires before the replay and the view is
 * rebuilt identically; EventSource handles the reconnects themselves.
 */
export function subscribeEvents(
  runId: string,
  onReset: () => void,
  onEvent: (event: RunEvent) => void,
  base = "",
): Subscription {
  const source = new EventSource(`${base}/api/runs/${runId}/events`);
  source.onopen = () => onReset();
  for (const kind of EVENT_KINDS) {
    source.addEventListener(kind, (raw) => {
      const event = {
        kind,
        payload: JSON.parse((raw as MessageEvent).data),
      } as RunEvent;
      onEvent(event);
      if (kind === "final_answer" || kind === "error") {
        source.close(); // terminal: the server ends the stream after these
      }
    });
  }
  return { close: () => source.close() };
}
