/**
 * Operator console entry point: live tower, cue playback, event injection,
 * profile editing with hot-swap, and the co-design questionnaire.
 */

import { CuePlayer } from "./audio.js";
import type { CueSpecDoc } from "./audio.js";
import { runQuestionnaire } from "./questionnaire.js";
import type { Scenario } from "./questionnaire.js";
import { ConsoleSession, webSocketTransport } from "./session.js";
import { TowerView } from "./tower.js";
import { validateProfileDoc } from "./validate.js";

const WS_URL = new URLSearchParams(location.search).get("ws") ?? "ws://127.0.0.1:7778";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

const tower = new TowerView(el("tower"));
const player = new CuePlayer();
const banner = el("banner");
const log = el<HTMLPreElement>("log");

function note(text: string): void {
  log.textContent = `${new Date().toLocaleTimeString()}  ${text}\n` + (log.textContent ?? "");
}

let session: ConsoleSession;

function connect(): void {
  session = new ConsoleSession(webSocketTransport(WS_URL));
  session.onFrame = (frame) => tower.render(frame);
  session.onCue = (name) => {
    player.playCue(name);
    note(`cue: ${name}`);
  };
  session.onProtocolError = (message) => {
    banner.textContent = `protocol error: ${message}`;
    banner.className = "banner error";
  };
  session.onStatus = (connected) => {
    banner.textContent = connected ? `connected to ${WS_URL}` : "disconnected - reconnecting…";
    banner.className = connected ? "banner ok" : "banner error";
    document.querySelectorAll("button[data-needs-connection]").forEach((b) => {
      (b as HTMLButtonElement).disabled = !connected;
    });
    if (connected) {
      refreshCues();
    } else {
      setTimeout(connect, 1000);
    }
  };
}

async function refreshCues(): Promise<void> {
  try {
    const doc = await session.getProfile();
    el<HTMLTextAreaElement>("profile").value = JSON.stringify(doc, null, 2);
    const episodes = doc.episodes as Record<string, { cue: string | CueSpecDoc }>;
    for (const entry of Object.values(episodes)) {
      if (typeof entry.cue === "object") player.specs[entry.cue.name] = entry.cue;
    }
  } catch (err) {
    note(`get_profile failed: ${err}`);
  }
}

for (const [id, event] of [
  ["btn-fault", "fault"],
  ["btn-clear", "fault_cleared"],
  ["btn-search", "search_started"],
  ["btn-piece", "piece_detected"],
  ["btn-assembly", "assembly_completed"],
] as const) {
  el<HTMLButtonElement>(id).onclick = () => {
    session.inject(event).then(
      () => note(`injected ${event}`),
      (err) => note(`inject failed: ${err}`),
    );
  };
}

el<HTMLButtonElement>("btn-reset").onclick = () => {
  session.reset().then(
    () => note("engine reset"),
    (err) => note(`reset failed: ${err}`),
  );
};

el<HTMLButtonElement>("btn-apply").onclick = () => {
  let doc: unknown;
  try {
    doc = JSON.parse(el<HTMLTextAreaElement>("profile").value);
  } catch (err) {
    note(`profile draft is not JSON: ${err}`);
    return;
  }
  const issues = validateProfileDoc(doc);
  if (issues.length > 0) {
    // rejected locally: never sent to the engine
    note(`profile draft rejected:\n  ${issues.map((i) => `${i.path}: ${i.message}`).join("\n  ")}`);
    return;
  }
  session.setProfile(doc as Record<string, unknown>).then(
    () => note("profile applied"),
    (err) => note(`engine rejected profile: ${err}`),
  );
};

const SCENARIOS: Scenario[] = [
  {
    id: "fault-stop",
    prompt: "The cell stops on a fault that needs a technician.",
    variantA: { label: "blinking X", episode: "system_error", overlay: {} },
    variantB: {
      label: "slow X",
      episode: "system_error",
      overlay: { schedule: { on_ms: 800, off_ms: 400, repeats: 3, hold_after: true } },
    },
  },
  {
    id: "piece-search",
    prompt: "The cobot cannot find the piece on the worktable.",
    variantA: { label: "orange chevrons", episode: "searching", overlay: {} },
    variantB: { label: "dim orange", episode: "searching", overlay: { color: [120, 50, 0] } },
  },
  {
    id: "placement-ok",
    prompt: "The piece was placed correctly.",
    variantA: { label: "green flash", episode: "confirmation", overlay: {} },
    variantB: {
      label: "double flash",
      episode: "confirmation",
      overlay: { schedule: { on_ms: 250, off_ms: 100, repeats: 2, hold_after: false } },
    },
  },
];

el<HTMLButtonElement>("btn-questionnaire").onclick = async () => {
  const ui = {
    present: (scenario: Scenario, variant: { label: string }) => {
      note(`previewing ${scenario.id} / ${variant.label}`);
      return new Promise<void>((resolve) => setTimeout(resolve, 3500));
    },
    choose: (scenario: Scenario) => {
      const pick = window.prompt(`${scenario.prompt}\nWhich felt better, A or B?`, "A") ?? "A";
      const note_ = window.prompt("Any comment?", "") ?? "";
      return Promise.resolve({ choice: pick.trim().toUpperCase() === "B" ? ("B" as const) : ("A" as const), note: note_ });
    },
    now: () => Date.now(),
  };
  try {
    const result = await runQuestionnaire(session, `session-${Date.now()}`, SCENARIOS, ui);
    note(`questionnaire saved: ${result.records.length} records, complete=${result.complete}`);
  } catch (err) {
    note(`questionnaire failed: ${err}`);
  }
};

connect();
