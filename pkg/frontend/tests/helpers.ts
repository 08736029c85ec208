import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { AgentApi, AgentError, KeySystemInfo } from "../src/agent-client";
import { OverlayChannel } from "../src/overlay/common";
import { WireMessage, WireMessageType } from "../src/wire";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export const AGENT_ORIGIN = "http://127.0.0.1:8747";

export function loadFixture(name: string): void {
  const html = readFileSync(join(FIXTURES, name), "utf-8");
  const parsed = new DOMParser().parseFromString(html, "text/html");
  document.body.innerHTML = parsed.body.innerHTML;
  for (const meta of Array.from(document.head.querySelectorAll("meta[name='mg-bench']"))) {
    meta.remove();
  }
  for (const meta of Array.from(parsed.head.querySelectorAll("meta"))) {
    document.head.appendChild(document.importNode(meta, true));
  }
}

export function resetDocument(): void {
  document.body.innerHTML = "";
  for (const node of Array.from(
    document.head.querySelectorAll("meta, style[data-mg-theme]"),
  )) {
    node.remove();
  }
  document.body.classList.remove("mg-overlay-body");
  localStorage.clear();
}

const encoder = new TextEncoder();
const decoder = new TextDecoder();

export function makeStubArmor(plaintext: string): string {
  const bytes = encoder.encode(plaintext);
  let binary = "";
  for (const byte of bytes) binary += String.fromCharCode(byte);
  const body = btoa(binary).replace(/\+/g, "-").replace(/\//g, "_").replace(/=+$/, "");
  return `MG1.${body}.END`;
}

export function decodeStubArmor(armored: string): string {
  const body = armored.slice(4, -4).replace(/-/g, "+").replace(/_/g, "/");
  const padded = body + "=".repeat((4 - (body.length % 4)) % 4);
  const binary = atob(padded);
  const bytes = Uint8Array.from(binary, (ch) => ch.charCodeAt(0));
  return decoder.decode(bytes);
}

/** In-memory agent: stub armor is base64url of the plaintext. */
export class StubAgent implements AgentApi {
  locked = false;
  failNext: AgentError | null = null;
  benchRecords: object[] = [];
  systems: KeySystemInfo[] = [
    { scheme_id: 1, fingerprint: "aa".repeat(16), identity: "", label: "team" },
    { scheme_id: 3, fingerprint: "bb".repeat(16), identity: "me@x.com", label: "me@x.com" },
  ];
  unlockPassword = "master";
  packaged: { plaintext_html: string; recipients?: string[] }[] = [];

  private gate(): void {
    if (this.failNext) {
      const error = this.failNext;
      this.failNext = null;
      throw error;
    }
    if (this.locked) {
      throw new AgentError(423, "Locked", "unlock the agent first");
    }
  }

  async unlock(masterPassword: string): Promise<void> {
    if (masterPassword !== this.unlockPassword) {
      throw new AgentError(401, "WrongPassword", "master password rejected");
    }
    this.locked = false;
  }

  async keysystems(): Promise<KeySystemInfo[]> {
    this.gate();
    return this.systems;
  }

  async packageMessage(request: { plaintext_html: string; recipients?: string[] }): Promise<string> {
    this.gate();
    this.packaged.push(request);
    return makeStubArmor(request.plaintext_html);
  }

  async unpackage(armored: string): Promise<{
    plaintext_html: string;
    scheme_id: number;
    fingerprint: string;
  }> {
    this.gate();
    return {
      plaintext_html: decodeStubArmor(armored),
      scheme_id: 1,
      fingerprint: "aa".repeat(16),
    };
  }

  async postBench(record: {
    browser_label: string;
    stage: number;
    n: number;
    total_ms: number;
    per_element_ms: number;
  }): Promise<void> {
    this.gate();
    this.benchRecords.push(record);
  }
}

/** Direct channel for overlay-page tests: no iframes, just calls. */
export class TestChannel implements OverlayChannel {
  overlayId = "test-overlay";
  sent: WireMessage[] = [];
  private callbacks: ((message: WireMessage) => void)[] = [];
  private seq = 0;

  send(type: WireMessageType, body: string): void {
    this.seq += 1;
    this.sent.push({ overlayId: this.overlayId, seq: this.seq, type, body });
  }

  onMessage(callback: (message: WireMessage) => void): void {
    this.callbacks.push(callback);
  }

  deliver(type: WireMessageType, body: string, seq = 1000 + this.seq): void {
    for (const callback of this.callbacks) {
      callback({ overlayId: this.overlayId, seq, type, body });
    }
  }

  sentOfType(type: WireMessageType): WireMessage[] {
    return this.sent.filter((message) => message.type === type);
  }
}

export function flushMutations(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

export async function settle(times = 3): Promise<void> {
  for (let i = 0; i < times; i += 1) {
    await Promise.resolve();
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}
