// Score-form validation mirroring the service rules: four integer components
// in [0, 10] for every pending thought. Displayed totals are advisory; the
// service recomputes them authoritatively.

export const COMPONENTS = ["lv", "coh", "sim", "adp"] as const;
export type ComponentKey = (typeof COMPONENTS)[number];

export type FormEntry = Partial<Record<ComponentKey, string>>;
export type ScoreForm = Record<string, FormEntry>;

export function parseComponent(raw: string | undefined): number | null {
  if (raw === undefined || raw.trim() === "") return null;
  if (!/^-?\d+$/.test(raw.trim())) return null;
  const value = parseInt(raw.trim(), 10);
  if (value < 0 || value > 10) return null;
  return value;
}

/** Live total for one thought's entry, or null until all four are valid. */
export function entryTotal(entry: FormEntry): number | null {
  let total = 0;
  for (const key of COMPONENTS) {
    const value = parseComponent(entry[key]);
    if (value === null) return null;
    total += value;
  }
  return total;
}

export interface ValidationResult {
  ok: boolean;
  errors: string[];
}

export function validateSubmission(
  pendingIds: string[],
  form: ScoreForm,
): ValidationResult {
  const errors: string[] = [];
  for (const id of pendingIds) {
    const entry = form[id];
    if (!entry) {
      errors.push(`${id}: not scored yet`);
      continue;
    }
    for (const key of COMPONENTS) {
      if (parseComponent(entry[key]) === null) {
        errors.push(`${id}: ${key.toUpperCase()} must be an integer 0-10`);
      }
    }
  }
  return { ok: errors.length === 0, errors };
}

export function toPayload(
  pendingIds: string[],
  form: ScoreForm,
): { scores: Record<string, Record<ComponentKey, number>> } {
  const scores: Record<string, Record<ComponentKey, number>> = {};
  for (const id of pendingIds) {
    const entry = form[id] ?? {};
    scores[id] = {
      lv: parseComponent(entry.lv) ?? 0,
      coh: parseComponent(entry.coh) ?? 0,
      sim: parseComponent(entry.sim) ?? 0,
      adp: parseComponent(entry.adp) ?? 0,
    };
  }
  return { scores };
}
