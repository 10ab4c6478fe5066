/**
 * Wire protocol v1: one JSON object per line, mirroring the engine's schema.
 * The console performs no feedback logic of its own; it renders exactly what
 * the frame lines say and validates inbound payloads the same way the engine
 * does (strict fields, pixel-length check).
 */

export const PROTOCOL_VERSION = 1;

export type EventName =
  | "fault"
  | "fault_cleared"
  | "search_started"
  | "piece_detected"
  | "assembly_completed"
  | "running"
  | "shutdown";

export const EVENT_NAMES: EventName[] = [
  "fault",
  "fault_cleared",
  "search_started",
  "piece_detected",
  "assembly_completed",
  "running",
  "shutdown",
];

export interface FrameMsg {
  type: "frame";
  t_ms: number;
  w: number;
  h: number;
  /** decoded row-major RGB bytes, 3 per pixel */
  px: Uint8Array;
}

export interface CueMsg {
  type: "cue";
  name: string;
  t_ms: number;
}

export interface AckMsg {
  type: "ack";
  of: string;
  body?: Record<string, unknown>;
}

export interface ErrorMsg {
  type: "error";
  code: string;
  message: string;
}

export interface EventMsg {
  type: "event";
  name: EventName;
  t_ms: number;
}

export type InboundMsg = FrameMsg | CueMsg | AckMsg | ErrorMsg | EventMsg;

export class WireError extends Error {
  constructor(public code: string, message: string) {
    super(message);
  }
}

function b64ToBytes(b64: string): Uint8Array {
  const bin = atob(b64);
  const out = new Uint8Array(bin.length);
  for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
  return out;
}

function requireInt(obj: Record<string, unknown>, key: string, minimum = 0): number {
  const v = obj[key];
  if (typeof v !== "number" || !Number.isInteger(v) || v < minimum) {
    throw new WireError("E_SCHEMA", `${key} must be an integer >= ${minimum}`);
  }
  return v;
}

function requireString(obj: Record<string, unknown>, key: string): string {
  const v = obj[key];
  if (typeof v !== "string" || v.length === 0) {
    throw new WireError("E_SCHEMA", `${key} must be a non-empty string`);
  }
  return v;
}

/** Parse one protocol line (LF optional). Throws WireError on anything off. */
export function decodeLine(line: string): InboundMsg {
  let obj: Record<string, unknown>;
  try {
    obj = JSON.parse(line);
  } catch (e) {
    throw new WireError("E_SCHEMA", `invalid JSON: ${e}`);
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new WireError("E_SCHEMA", "message must be a JSON object");
  }
  if (!("v" in obj)) throw new WireError("E_SCHEMA", "missing protocol version field 'v'");
  if (obj.v !== PROTOCOL_VERSION) {
    throw new WireError("E_VERSION", `unsupported protocol version ${JSON.stringify(obj.v)}`);
  }
  switch (obj.type) {
    case "frame": {
      const w = requireInt(obj, "w", 1);
      const h = requireInt(obj, "h", 1);
      const t_ms = requireInt(obj, "t_ms");
      let px: Uint8Array;
      try {
        px = b64ToBytes(requireString(obj, "px"));
      } catch (e) {
        if (e instanceof WireError) throw e;
        throw new WireError("E_SCHEMA", "px is not valid base64");
      }
      if (px.length !== w * h * 3) {
        throw new WireError("E_PIXELS", `px decodes to ${px.length} bytes, expected ${w * h * 3}`);
      }
      return { type: "frame", t_ms, w, h, px };
    }
    case "cue":
      return { type: "cue", name: requireString(obj, "name"), t_ms: requireInt(obj, "t_ms") };
    case "ack": {
      const msg: AckMsg = { type: "ack", of: requireString(obj, "of") };
      if (obj.body !== undefined) msg.body = obj.body as Record<string, unknown>;
      return msg;
    }
    case "error":
      return {
        type: "error",
        code: requireString(obj, "code"),
        message: requireString(obj, "message"),
      };
    case "event": {
      const name = requireString(obj, "name");
      if (!EVENT_NAMES.includes(name as EventName)) {
        throw new WireError("E_EVENT_NAME", `unknown event name ${JSON.stringify(name)}`);
      }
      return { type: "event", name: name as EventName, t_ms: requireInt(obj, "t_ms") };
    }
    default:
      throw new WireError("E_SCHEMA", `unknown message type ${JSON.stringify(obj.type)}`);
  }
}

/** Canonical one-line JSON: keys sorted, no spaces — same bytes the engine emits. */
export function canonicalJson(value: unknown): string {
  if (Array.isArray(value)) {
    return `[${value.map(canonicalJson).join(",")}]`;
  }
  if (value !== null && typeof value === "object") {
    const entries = Object.entries(value as Record<string, unknown>)
      .filter(([, v]) => v !== undefined)
      .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
      .map(([k, v]) => `${JSON.stringify(k)}:${canonicalJson(v)}`);
    return `{${entries.join(",")}}`;
  }
  return JSON.stringify(value);
}

export function encodeControl(op: string, body?: Record<string, unknown>): string {
  const payload: Record<string, unknown> = { v: PROTOCOL_VERSION, type: "control", op };
  if (body !== undefined) payload.body = body;
  return canonicalJson(payload);
}
