/**
 * Pairwise preference questionnaire for feedback co-design sessions.
 *
 * Each scenario offers two feedback variants. A variant is previewed live:
 * its profile overlay is applied, the matching episode plays on the tower
 * with sound, and the prior profile is restored afterwards — the preview
 * machinery is just the ordinary customization path. Choices are persisted
 * engine-side through save_session.
 */

import { canonicalJson } from "./protocol.js";
import type { ConsoleSession } from "./session.js";
import { validateProfileDoc } from "./validate.js";

export interface VariantSpec {
  label: string;
  /** episode kind this variant previews, e.g. "system_error" */
  episode: string;
  /** partial episode entry merged over the current profile's entry */
  overlay: Record<string, unknown>;
}

export interface Scenario {
  id: string;
  prompt: string;
  variantA: VariantSpec;
  variantB: VariantSpec;
}

export interface PreferenceRecord {
  scenario: string;
  variant_a: Record<string, unknown>;
  variant_b: Record<string, unknown>;
  choice: "A" | "B" | "skipped";
  note: string;
  t_ms: number;
}

export interface QuestionnaireUi {
  /** Hold the preview on screen (the episode is playing) until it resolves. */
  present(scenario: Scenario, variant: VariantSpec, applied: Record<string, unknown>): Promise<void>;
  /** Ask for the participant's pick once both variants have played. */
  choose(scenario: Scenario): Promise<{ choice: "A" | "B"; note: string }>;
  now(): number;
}

function deepClone<T>(value: T): T {
  return JSON.parse(JSON.stringify(value)) as T;
}

/** The profile document with one episode entry overlaid. */
export function applyOverlay(
  profile: Record<string, unknown>,
  episode: string,
  overlay: Record<string, unknown>,
): Record<string, unknown> {
  const doc = deepClone(profile);
  const episodes = doc.episodes as Record<string, Record<string, unknown>>;
  episodes[episode] = { ...episodes[episode], ...deepClone(overlay) };
  return doc;
}

export interface QuestionnaireResult {
  records: PreferenceRecord[];
  complete: boolean;
  restoredProfile: Record<string, unknown>;
}

export async function runQuestionnaire(
  session: ConsoleSession,
  sessionId: string,
  scenarios: Scenario[],
  ui: QuestionnaireUi,
): Promise<QuestionnaireResult> {
  const original = await session.getProfile();
  const originalBytes = canonicalJson(original);
  const records: PreferenceRecord[] = [];
  let complete = true;

  const preview = async (scenario: Scenario, variant: VariantSpec): Promise<Record<string, unknown>> => {
    const applied = applyOverlay(original, variant.episode, variant.overlay);
    if (variant.episode === "workflow_reward") {
      // let a single injected assembly fire the reward during the preview
      applied.reward_threshold = 1;
    }
    const issues = validateProfileDoc(applied);
    if (issues.length > 0) {
      throw new Error(`variant ${variant.label} is invalid: ${issues[0].path}: ${issues[0].message}`);
    }
    await session.setProfile(applied);
    await session.inject(eventFor(variant.episode));
    await ui.present(scenario, variant, applied);
    // settle the engine: previews must not leave a latched fault or a
    // half-played episode behind
    await session.reset();
    return applied;
  };

  try {
    for (const scenario of scenarios) {
      try {
        const appliedA = await preview(scenario, scenario.variantA);
        const appliedB = await preview(scenario, scenario.variantB);
        await session.setProfile(deepClone(original)); // back to baseline before judging
        const { choice, note } = await ui.choose(scenario);
        records.push({
          scenario: scenario.id,
          variant_a: appliedA.episodes as Record<string, unknown>,
          variant_b: appliedB.episodes as Record<string, unknown>,
          choice,
          note,
          t_ms: ui.now(),
        });
      } catch (err) {
        // a failed preview aborts this pair only
        records.push({
          scenario: scenario.id,
          variant_a: { error: String(err) },
          variant_b: {},
          choice: "skipped",
          note: String(err),
          t_ms: ui.now(),
        });
        await session.setProfile(deepClone(original));
      }
    }
  } catch (err) {
    complete = false; // aborted mid-session: persist what we have, flagged
  }

  // restore first, persist always — a dead preview path must not lose records
  let restored = original;
  try {
    await session.setProfile(deepClone(original));
    restored = await session.getProfile();
    if (canonicalJson(restored) !== originalBytes) {
      throw new Error("profile came back different after restore");
    }
  } catch (err) {
    complete = false;
  }
  await session.saveSession({
    session_id: sessionId,
    complete,
    records: records as unknown as Record<string, unknown>[],
  });
  return { records, complete, restoredProfile: restored };
}

function eventFor(episode: string): string {
  switch (episode) {
    case "system_error":
      return "fault";
    case "searching":
      return "search_started";
    case "confirmation":
      return "piece_detected";
    case "workflow_reward":
      return "assembly_completed";
    default:
      throw new Error(`no preview event for episode ${episode}`);
  }
}
