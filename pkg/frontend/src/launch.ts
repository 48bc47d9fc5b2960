// Launch form: question, threshold, thought count, variant, scorer mode.

import { fetchDefaults, startRun } from "./api.js";

const VARIANTS = [
  ["", "default (batched rounds)"],
  ["single_step_sequential", "single-step sequential"],
  ["single_step_one_shot", "single-step one-shot"],
  ["few_shot_2", "few-shot (2 exemplars)"],
  ["multi_request_3", "multi-request (3)"],
  ["multi_request_unlimited", "multi-request unlimited"],
];

export function renderLaunchForm(
  root: HTMLElement,
  onStarted: (runId: string) => void,
): void {
  root.replaceChildren();
  const form = document.createElement("div");
  form.className = "panel launch";
  form.innerHTML = `
    <h2>Start a run</h2>
    <label>Question<br><textarea data-field="question" rows="4"></textarea></label>
    <label>Threshold <span data-threshold-value>30</span>
      <input data-field="threshold" type="range" min="0" max="40" step="1" value="30">
    </label>
    <label>Thoughts per step
      <select data-field="n_thoughts">
        <option>3</option><option>5</option><option>7</option>
      </select>
    </label>
    <label>Variant <select data-field="variant"></select></label>
    <label>Scorer
      <select data-field="scorer_mode">
        <option>human</option><option>judge</option><option>deterministic</option>
      </select>
    </label>
    <label>Backend endpoint<br><input data-field="endpoint" placeholder="http://localhost:1234"></label>
    <button data-field="start">Start</button>
    <p class="error" data-field="error"></p>
  `;
  root.append(form);

  const variantSelect = form.querySelector('[data-field="variant"]') as HTMLSelectElement;
  for (const [value, text] of VARIANTS) {
    const option = document.createElement("option");
    option.value = value;
    option.textContent = text;
    variantSelect.append(option);
  }

  const threshold = form.querySelector('[data-field="threshold"]') as HTMLInputElement;
  const thresholdValue = form.querySelector("[data-threshold-value]") as HTMLElement;
  threshold.addEventListener("input", () => {
    thresholdValue.textContent = threshold.value;
  });

  // the slider default mirrors what the service advertises
  void fetchDefaults().then((defaults) => {
    if (typeof defaults.threshold === "number") {
      threshold.value = String(defaults.threshold);
      thresholdValue.textContent = threshold.value;
    }
  }).catch(() => undefined);

  const errorLine = form.querySelector('[data-field="error"]') as HTMLElement;
  const button = form.querySelector('[data-field="start"]') as HTMLButtonElement;
  button.addEventListener("click", async () => {
    const question = (form.querySelector('[data-field="question"]') as HTMLTextAreaElement)
      .value.trim();
    if (!question) {
      errorLine.textContent = "A question is required.";
      return; // no request leaves the page
    }
    errorLine.textContent = "";
    const config: Record<string, unknown> = {
      threshold: parseInt(threshold.value, 10),
      n_thoughts: parseInt(
        (form.querySelector('[data-field="n_thoughts"]') as HTMLSelectElement).value, 10),
      scorer_mode: (form.querySelector('[data-field="scorer_mode"]') as HTMLSelectElement).value,
      endpoint: (form.querySelector('[data-field="endpoint"]') as HTMLInputElement).value.trim(),
    };
    const variant = variantSelect.value;
    if (variant) config.variant = variant;
    try {
      const { run_id } = await startRun({ statement: question, config });
      onStarted(run_id);
    } catch (err) {
      errorLine.textContent = err instanceof Error ? err.message : String(err);
    }
  });
}
