import { describe, expect, it } from "vitest";

import { canonicalJson, decodeLine, encodeControl, WireError } from "../src/protocol.js";

function codeOf(fn: () => unknown): string {
  try {
    fn();
  } catch (err) {
    if (err instanceof WireError) return err.code;
    throw err;
  }
  throw new Error("expected a WireError");
}

describe("decodeLine", () => {
  it("parses a frame line and decodes pixels", () => {
    const line = '{"h":1,"px":"/wAA","t_ms":5,"type":"frame","v":1,"w":1}';
    const msg = decodeLine(line);
    expect(msg.type).toBe("frame");
    if (msg.type === "frame") {
      expect(Array.from(msg.px)).toEqual([255, 0, 0]);
      expect(msg.t_ms).toBe(5);
    }
  });

  it("parses cue, ack and error lines", () => {
    expect(decodeLine('{"name":"victory","t_ms":9,"type":"cue","v":1}')).toEqual({
      type: "cue",
      name: "victory",
      t_ms: 9,
    });
    expect(decodeLine('{"of":"reset","type":"ack","v":1}')).toEqual({ type: "ack", of: "reset" });
    expect(decodeLine('{"code":"E_SCHEMA","message":"x","type":"error","v":1}')).toEqual({
      type: "error",
      code: "E_SCHEMA",
      message: "x",
    });
  });

  it("mirrors the engine's error codes", () => {
    expect(codeOf(() => decodeLine('{"name":"fault","t_ms":0,"type":"event","v":2}'))).toBe("E_VERSION");
    expect(codeOf(() => decodeLine('{"h":2,"px":"AAAAAAAAAAAA","t_ms":0,"type":"frame","v":1,"w":2}'))).toBe(
      "E_PIXELS",
    );
    expect(codeOf(() => decodeLine('{"name":"melted","t_ms":0,"type":"event","v":1}'))).toBe("E_EVENT_NAME");
    expect(codeOf(() => decodeLine('{"type":"telemetry","v":1}'))).toBe("E_SCHEMA");
    expect(codeOf(() => decodeLine("garbage"))).toBe("E_SCHEMA");
  });
});

describe("canonicalJson", () => {
  it("emits the same bytes as the engine's encoder", () => {
    // matches python json.dumps(..., sort_keys=True, separators=(",", ":"))
    expect(canonicalJson({ v: 1, type: "event", name: "fault", t_ms: 1234 })).toBe(
      '{"name":"fault","t_ms":1234,"type":"event","v":1}',
    );
  });

  it("sorts nested keys and keeps arrays ordered", () => {
    expect(canonicalJson({ b: [3, 1], a: { z: 1, y: [true, null] } })).toBe(
      '{"a":{"y":[true,null],"z":1},"b":[3,1]}',
    );
  });

  it("builds control lines the engine accepts", () => {
    expect(encodeControl("inject_event", { name: "fault" })).toBe(
      '{"body":{"name":"fault"},"op":"inject_event","type":"control","v":1}',
    );
    expect(encodeControl("reset")).toBe('{"op":"reset","type":"control","v":1}');
  });
});
