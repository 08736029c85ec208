/**
 * The host-page <-> overlay messaging envelope.
 *
 * The host page is untrusted territory, so the channel is asymmetric:
 * overlay -> host bodies may carry only armored ciphertext, an integer
 * (height), or nothing; host -> overlay bodies are treated as untrusted
 * input and validated/sanitized by the overlay.  Messages carry sequence
 * numbers so stale drafts or resizes arriving out of order are dropped.
 */

export const ARMOR_RE = /MG1\.[A-Za-z0-9_-]+\.END/g;
const ARMOR_EXACT_RE = /^MG1\.[A-Za-z0-9_-]+\.END$/;
const INTEGER_RE = /^\d+$/;

export type WireMessageType = "init" | "ready" | "payload" | "result" | "draft" | "resize";

export interface WireMessage {
  overlayId: string;
  seq: number;
  type: WireMessageType;
  body: string;
}

const TYPES: ReadonlyArray<WireMessageType> = [
  "init", "ready", "payload", "result", "draft", "resize",
];

export function isArmor(text: string): boolean {
  if (!ARMOR_EXACT_RE.test(text)) return false;
  // unpadded base64url can never be 1 (mod 4) long
  return text.slice(4, -4).length % 4 !== 1;
}

/** Overlay -> host bodies: armored ciphertext, an integer, or empty. */
export function isSafeOutboundBody(body: string): boolean {
  return body === "" || INTEGER_RE.test(body) || isArmor(body);
}

export function makeMessage(
  overlayId: string,
  seq: number,
  type: WireMessageType,
  body: string,
): WireMessage {
  return { overlayId, seq, type, body };
}

/** Host-side parse of anything arriving on the message channel. */
export function parseWireMessage(data: unknown): WireMessage | null {
  if (typeof data !== "object" || data === null) return null;
  const msg = data as Record<string, unknown>;
  if (typeof msg.overlayId !== "string") return null;
  if (typeof msg.seq !== "number" || !Number.isFinite(msg.seq)) return null;
  if (typeof msg.type !== "string" || !TYPES.includes(msg.type as WireMessageType)) return null;
  if (typeof msg.body !== "string") return null;
  return {
    overlayId: msg.overlayId,
    seq: msg.seq,
    type: msg.type as WireMessageType,
    body: msg.body,
  };
}

/** Find every armored payload in a text, with codepoint-safe offsets. */
export function scanTextForArmor(text: string): { start: number; end: number; armored: string }[] {
  const spans: { start: number; end: number; armored: string }[] = [];
  ARMOR_RE.lastIndex = 0;
  let match: RegExpExecArray | null;
  while ((match = ARMOR_RE.exec(text)) !== null) {
    if (isArmor(match[0])) {
      spans.push({ start: match.index, end: match.index + match[0].length, armored: match[0] });
    }
  }
  return spans;
}
