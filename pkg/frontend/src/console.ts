// Run console: tier columns, thought cards colored by selection outcome,
// propagated-history panel, and the score form shown while the run waits.

import { submitScores, subscribeEvents, Subscription } from "./api.js";
import { applyEvent, ConsoleState, initialState } from "./state.js";
import { ThoughtPayload, TierName, TIERS } from "./types.js";
import {
  COMPONENTS,
  entryTotal,
  ScoreForm,
  toPayload,
  validateSubmission,
} from "./validate.js";

export class RunConsole {
  private state: ConsoleState = initialState();
  private form: ScoreForm = {};
  private submitError = "";
  private subscription: Subscription | null = null;

  constructor(
    private root: HTMLElement,
    private runId: string,
  ) {}

  connect(): void {
    this.subscription = subscribeEvents(
      this.runId,
      () => {
        // full replay follows: rebuild from scratch so reconnects are identical
        this.state = initialState();
        this.render();
      },
      (event) => {
        this.state = applyEvent(this.state, event);
        if (event.kind === "scores_requested") {
          this.form = {};
          this.submitError = "";
        }
        this.render();
      },
    );
  }

  disconnect(): void {
    this.subscription?.close();
  }

  private async submit(): Promise<void> {
    const pending = this.state.pending;
    if (!pending) return;
    const result = await submitScores(
      this.runId,
      toPayload(pending.thoughtIds, this.form),
    );
    this.submitError = result.ok ? "" : result.detail || `rejected (${result.status})`;
    this.render();
  }

  render(): void {
    this.root.replaceChildren();
    this.root.append(
      el("h2", {}, `Run ${this.runId}`),
      this.banner(),
      this.planPanel(),
      this.tierColumns(),
      this.historyPanel(),
      this.scorePanel(),
    );
  }

  private banner(): HTMLElement {
    const s = this.state;
    if (s.errorMessage) return el("p", { class: "banner error" }, `Run failed: ${s.errorMessage}`);
    if (s.finalAnswer) {
      return el("p", { class: "banner done" },
        `Final answer: ${s.finalAnswer.normalized} (raw: ${s.finalAnswer.raw})`);
    }
    if (s.pending) return el("p", { class: "banner waiting" }, "Waiting for your scores below.");
    return el("p", { class: "banner" }, "Running…");
  }

  private planPanel(): HTMLElement {
    const plan = this.state.plan;
    if (!plan) return el("div", {});
    const panel = el("div", { class: "panel" }, el("h3", {}, "Decomposition"));
    for (const tier of TIERS) {
      panel.append(el("p", {}, `${label(tier)}: ${plan[tier]}`));
    }
    return panel;
  }

  private tierColumns(): HTMLElement {
    const wrap = el("div", { class: "columns" });
    for (const tier of TIERS) {
      const column = el("div", { class: "column" }, el("h3", {}, label(tier)));
      for (const card of this.state.cards[tier]) {
        column.append(this.card(card));
      }
      wrap.append(column);
    }
    return wrap;
  }

  private card(thought: ThoughtPayload): HTMLElement {
    const node = el(
      "div",
      { class: `card ${thought.status}`, "data-thought": thought.id },
      el("strong", {}, `Thought ${thought.ordinal}`),
      thought.round > 0 ? el("em", {}, ` round ${thought.round}`) : "",
      el("p", {}, thought.text),
    );
    if (thought.scores) {
      const sc = thought.scores;
      node.append(el("p", { class: "scores" },
        `LV ${sc.validity} · COH ${sc.coherence} · SIM ${sc.simplicity} · ` +
        `ADP ${sc.adaptiveness} · Total ${sc.total}`));
    }
    return node;
  }

  private historyPanel(): HTMLElement {
    const panel = el("div", { class: "panel" }, el("h3", {}, "Propagated history"));
    if (!this.state.history.length) {
      panel.append(el("p", {}, "No rounds decided yet."));
      return panel;
    }
    for (const block of this.state.history) {
      const entry = el("div", { class: "history-block" },
        el("p", {}, block.selectedLine),
        el("p", {}, block.rejectedLine));
      if (block.regenerated) {
        entry.append(el("p", { class: "regen" }, "No thought met the threshold; the tier regenerated."));
      }
      panel.append(entry);
    }
    return panel;
  }

  private scorePanel(): HTMLElement {
    const pending = this.state.pending;
    if (!pending) return el("div", {});
    const panel = el("div", { class: "panel score-form" },
      el("h3", {}, `Score the ${pending.tier ?? ""} thoughts (0-10 each)`));

    const byId = new Map<string, ThoughtPayload>();
    for (const tier of TIERS) {
      for (const card of this.state.cards[tier]) byId.set(card.id, card);
    }

    for (const id of pending.thoughtIds) {
      const thought = byId.get(id);
      const row = el("div", { class: "score-row", "data-row": id },
        el("p", {}, thought ? `Thought ${thought.ordinal}: ${thought.text}` : id));
      for (const key of COMPONENTS) {
        const input = el("input", {
          type: "number", min: "0", max: "10", step: "1",
          "data-component": `${id}:${key}`, placeholder: key.toUpperCase(),
        }) as HTMLInputElement;
        input.value = this.form[id]?.[key] ?? "";
        input.addEventListener("input", () => {
          this.form[id] = { ...this.form[id], [key]: input.value };
          this.refreshFormState();
        });
        row.append(input);
      }
      row.append(el("span", { class: "total", "data-total": id },
        totalText(this.form[id] ?? {})));
      panel.append(row);
    }

    const button = el("button", { "data-submit": "1" }, "Submit scores") as HTMLButtonElement;
    button.disabled = !validateSubmission(pending.thoughtIds, this.form).ok;
    button.addEventListener("click", () => void this.submit());
    panel.append(button);
    if (this.submitError) {
      panel.append(el("p", { class: "error", "data-submit-error": "1" }, this.submitError));
    }
    return panel;
  }

  private refreshFormState(): void {
    const pending = this.state.pending;
    if (!pending) return;
    for (const id of pending.thoughtIds) {
      const span = this.root.querySelector(`[data-total="${id}"]`);
      if (span) span.textContent = totalText(this.form[id] ?? {});
    }
    const button = this.root.querySelector("[data-submit]") as HTMLButtonElement | null;
    if (button) {
      button.disabled = !validateSubmission(pending.thoughtIds, this.form).ok;
    }
  }
}

function label(tier: TierName): string {
  return tier.charAt(0).toUpperCase() + tier.slice(1);
}

function totalText(entry: Record<string, string | undefined>): string {
  const total = entryTotal(entry);
  return total === null ? "Total —" : `Total ${total}`;
}

function el(
  tag: string,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}
