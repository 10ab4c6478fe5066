/**
 * One console session: a WebSocket carrying protocol lines verbatim, the
 * latest frame, pending control acks, and connection status. The transport
 * is injectable so the session logic is testable without a browser socket.
 */

import { decodeLine, encodeControl, WireError } from "./protocol.js";
import type { FrameMsg, InboundMsg } from "./protocol.js";

export interface LineTransport {
  send(line: string): void;
  close(): void;
  onLine: ((line: string) => void) | null;
  onOpen: (() => void) | null;
  onClose: (() => void) | null;
}

export function webSocketTransport(url: string): LineTransport {
  const ws = new WebSocket(url);
  const transport: LineTransport = {
    send: (line) => ws.send(line),
    close: () => ws.close(),
    onLine: null,
    onOpen: null,
    onClose: null,
  };
  ws.onmessage = (event) => transport.onLine?.(String(event.data));
  ws.onopen = () => transport.onOpen?.();
  ws.onclose = () => transport.onClose?.();
  ws.onerror = () => undefined; // onclose follows and drives the banner
  return transport;
}

interface PendingAck {
  op: string;
  resolve: (body: Record<string, unknown> | undefined) => void;
  reject: (err: Error) => void;
}

export class ConsoleSession {
  latestFrame: FrameMsg | null = null;
  connected = false;

  onFrame: ((frame: FrameMsg) => void) | null = null;
  onCue: ((name: string) => void) | null = null;
  onStatus: ((connected: boolean) => void) | null = null;
  onProtocolError: ((message: string) => void) | null = null;

  private pending: PendingAck[] = [];

  constructor(private transport: LineTransport) {
    transport.onOpen = () => {
      this.connected = true;
      this.onStatus?.(true);
    };
    transport.onClose = () => {
      this.connected = false;
      this.onStatus?.(false);
      // a dead connection can never answer; fail callers promptly
      for (const waiter of this.pending.splice(0)) {
        waiter.reject(new Error("connection closed"));
      }
    };
    transport.onLine = (line) => this.handleLine(line);
  }

  private handleLine(line: string): void {
    let msg: InboundMsg;
    try {
      msg = decodeLine(line);
    } catch (err) {
      // malformed or truncated payload: surface it, drop the line, keep going
      const detail = err instanceof WireError ? `${err.code}: ${err.message}` : String(err);
      this.onProtocolError?.(detail);
      return;
    }
    switch (msg.type) {
      case "frame":
        this.latestFrame = msg;
        this.onFrame?.(msg);
        return;
      case "cue":
        this.onCue?.(msg.name);
        return;
      case "ack": {
        const i = this.pending.findIndex((p) => p.op === msg.of);
        if (i >= 0) this.pending.splice(i, 1)[0].resolve(msg.body);
        return;
      }
      case "error": {
        // an error answers the oldest outstanding request, if any
        const waiter = this.pending.shift();
        if (waiter) waiter.reject(new Error(`${msg.code}: ${msg.message}`));
        else this.onProtocolError?.(`${msg.code}: ${msg.message}`);
        return;
      }
      case "event":
        return; // engines do not broadcast events; tolerate and ignore
    }
  }

  private request(op: string, body?: Record<string, unknown>): Promise<Record<string, unknown> | undefined> {
    if (!this.connected) return Promise.reject(new Error("not connected"));
    return new Promise((resolve, reject) => {
      this.pending.push({ op, resolve, reject });
      this.transport.send(encodeControl(op, body));
    });
  }

  /** Send a cobot event by name; resolves when the engine acks the control. */
  inject(eventName: string): Promise<void> {
    return this.request("inject_event", { name: eventName }).then(() => undefined);
  }

  getProfile(): Promise<Record<string, unknown>> {
    return this.request("get_profile").then((body) => {
      if (!body) throw new Error("get_profile ack carried no profile");
      return body;
    });
  }

  setProfile(doc: Record<string, unknown>): Promise<void> {
    return this.request("set_profile", doc).then(() => undefined);
  }

  saveSession(body: Record<string, unknown>): Promise<void> {
    return this.request("save_session", body).then(() => undefined);
  }

  reset(): Promise<void> {
    return this.request("reset").then(() => undefined);
  }

  close(): void {
    this.transport.close();
  }
}
