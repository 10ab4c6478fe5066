/**
 * Local profile validation mirroring the engine's rules, so a draft the
 * engine would reject is never sent. Every violation is reported with a
 * field path, same as the engine's own reports.
 */

export interface Issue {
  path: string;
  message: string;
}

const EPISODE_KINDS = ["system_error", "searching", "confirmation", "workflow_reward"];
const SHAPES = ["x_cross", "down_chevrons", "full_fill", "rainbow_scroll", "off"];
const BUILTIN_CUE_NAMES = ["error", "suspense", "confirmation", "victory"];

type Doc = Record<string, unknown>;

function isInt(v: unknown): v is number {
  return typeof v === "number" && Number.isInteger(v);
}

function checkKeys(obj: Doc, allowed: string[], required: string[], path: string, issues: Issue[]): boolean {
  let ok = true;
  for (const key of Object.keys(obj).sort()) {
    if (!allowed.includes(key)) {
      issues.push({ path: path ? `${path}.${key}` : key, message: "unknown field" });
      ok = false;
    }
  }
  for (const key of required) {
    if (!(key in obj)) {
      issues.push({ path: path ? `${path}.${key}` : key, message: "missing required field" });
      ok = false;
    }
  }
  return ok;
}

function checkInt(obj: Doc, key: string, path: string, issues: Issue[], minimum?: number): void {
  const v = obj[key];
  const p = path ? `${path}.${key}` : key;
  if (!isInt(v)) {
    issues.push({ path: p, message: `expected an integer, got ${JSON.stringify(v)}` });
  } else if (minimum !== undefined && v < minimum) {
    issues.push({ path: p, message: `must be >= ${minimum}, got ${v}` });
  }
}

function checkColor(raw: unknown, path: string, issues: Issue[]): void {
  if (!Array.isArray(raw) || raw.length !== 3 || raw.some((ch) => !isInt(ch))) {
    issues.push({ path, message: "expected [r, g, b] integers" });
    return;
  }
  raw.forEach((ch, i) => {
    if (ch < 0 || ch > 255) issues.push({ path: `${path}[${i}]`, message: `channel ${ch} outside 0..255` });
  });
}

function checkSchedule(raw: unknown, path: string, issues: Issue[]): void {
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    issues.push({ path, message: "expected an object" });
    return;
  }
  const obj = raw as Doc;
  if ("duration_ms" in obj) {
    if (checkKeys(obj, ["duration_ms"], ["duration_ms"], path, issues)) {
      checkInt(obj, "duration_ms", path, issues, 1);
    }
    return;
  }
  if (!checkKeys(obj, ["on_ms", "off_ms", "repeats", "hold_after"], ["on_ms"], path, issues)) return;
  checkInt(obj, "on_ms", path, issues, 1);
  if ("off_ms" in obj) checkInt(obj, "off_ms", path, issues, 0);
  if ("repeats" in obj && obj.repeats !== "infinite" && (!isInt(obj.repeats) || (obj.repeats as number) < 1)) {
    issues.push({ path: `${path}.repeats`, message: 'must be a positive integer or "infinite"' });
  }
  if ("hold_after" in obj && typeof obj.hold_after !== "boolean") {
    issues.push({ path: `${path}.hold_after`, message: "expected a boolean" });
  }
}

function checkCue(raw: unknown, path: string, issues: Issue[]): void {
  if (typeof raw === "string") {
    if (!BUILTIN_CUE_NAMES.includes(raw)) {
      issues.push({ path, message: `unknown cue name ${JSON.stringify(raw)}` });
    }
    return;
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    issues.push({ path, message: "expected a cue name or cue object" });
    return;
  }
  const obj = raw as Doc;
  if (!checkKeys(obj, ["name", "segments", "amplitude", "attack_ms", "release_ms"], ["name", "segments"], path, issues)) {
    return;
  }
  const segments = obj.segments;
  if (!Array.isArray(segments) || segments.length === 0 || segments.some((s) => !Array.isArray(s) || s.length !== 2)) {
    issues.push({ path: `${path}.segments`, message: "expected a non-empty list of [freq_hz, dur_ms] pairs" });
    return;
  }
  for (const [freq, dur] of segments as [number, number][]) {
    if (typeof freq !== "number" || freq < 0) issues.push({ path: `${path}.segments`, message: "frequency must be >= 0" });
    if (!isInt(dur) || dur < 1) issues.push({ path: `${path}.segments`, message: "duration must be an integer >= 1 ms" });
  }
  const amplitude = (obj.amplitude as number) ?? 0.3;
  if (typeof amplitude !== "number" || amplitude <= 0 || amplitude > 1) {
    issues.push({ path: `${path}.amplitude`, message: "must be in (0, 1]" });
  }
  const attack = (obj.attack_ms as number) ?? 10;
  const release = (obj.release_ms as number) ?? 10;
  const voiced = (segments as [number, number][]).filter(([f]) => f > 0).map(([, d]) => d);
  if (voiced.length > 0 && attack + release > Math.min(...voiced)) {
    issues.push({ path, message: "attack + release exceed the shortest voiced segment" });
  }
}

/** Validate a full profile document; empty list means it is safe to send. */
export function validateProfileDoc(doc: unknown): Issue[] {
  const issues: Issue[] = [];
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    return [{ path: "$", message: "top level must be an object" }];
  }
  const obj = doc as Doc;
  const top = ["version", "geometry", "tick_hz", "reward_threshold", "episodes"];
  checkKeys(obj, top, top, "", issues);
  if ("version" in obj && obj.version !== 1) {
    issues.push({ path: "version", message: `unsupported version ${JSON.stringify(obj.version)}` });
  }
  if (typeof obj.geometry === "object" && obj.geometry !== null) {
    const geo = obj.geometry as Doc;
    if (checkKeys(geo, ["width", "height"], ["width", "height"], "geometry", issues)) {
      checkInt(geo, "width", "geometry", issues, 1);
      checkInt(geo, "height", "geometry", issues, 1);
    }
  } else if ("geometry" in obj) {
    issues.push({ path: "geometry", message: "expected an object" });
  }
  if ("tick_hz" in obj) checkInt(obj, "tick_hz", "", issues, 1);
  if ("reward_threshold" in obj) checkInt(obj, "reward_threshold", "", issues, 1);

  const shapesInUse: Record<string, string[]> = {};
  if (typeof obj.episodes === "object" && obj.episodes !== null) {
    const episodes = obj.episodes as Doc;
    checkKeys(episodes, EPISODE_KINDS, EPISODE_KINDS, "episodes", issues);
    for (const kind of EPISODE_KINDS) {
      const raw = episodes[kind];
      if (raw === undefined) continue;
      const path = `episodes.${kind}`;
      if (typeof raw !== "object" || raw === null) {
        issues.push({ path, message: "expected an object" });
        continue;
      }
      const entry = raw as Doc;
      const fields = ["enabled", "shape", "color", "schedule", "cue"];
      if (!checkKeys(entry, fields, fields, path, issues)) continue;
      if (typeof entry.enabled !== "boolean") {
        issues.push({ path: `${path}.enabled`, message: "expected a boolean" });
      }
      if (typeof entry.shape !== "string" || !SHAPES.includes(entry.shape)) {
        issues.push({ path: `${path}.shape`, message: `unknown shape ${JSON.stringify(entry.shape)}` });
      } else if (entry.enabled === true) {
        (shapesInUse[entry.shape] ??= []).push(kind);
      }
      checkColor(entry.color, `${path}.color`, issues);
      checkSchedule(entry.schedule, `${path}.schedule`, issues);
      checkCue(entry.cue, `${path}.cue`, issues);
    }
  } else if ("episodes" in obj) {
    issues.push({ path: "episodes", message: "expected an object" });
  }

  for (const [shape, kinds] of Object.entries(shapesInUse).sort()) {
    if (kinds.length > 1) {
      issues.push({
        path: "episodes",
        message: `episodes ${JSON.stringify(kinds)} share shape ${JSON.stringify(shape)}; enabled episodes need distinct shapes to stay distinguishable without color`,
      });
    }
  }
  return issues;
}
