/**
 * One overlay manager per overlay: it owns the iframe, relays messages
 * between the host page and the overlay, and enforces the channel
 * contract on everything the overlay sends back (armor, integer, or
 * empty; anything else is counted as a violation and dropped, so a
 * compromised overlay page still cannot leak plaintext into the host
 * DOM through this path).
 */
import { applyGeometry, occlude, OverlayPlacement, restore } from "./placement";
import {
  isSafeOutboundBody,
  makeMessage,
  parseWireMessage,
  WireMessage,
  WireMessageType,
} from "./wire";

let counter = 0;

function nextOverlayId(): string {
  counter += 1;
  return `mg-overlay-${counter}-${Math.random().toString(36).slice(2, 10)}`;
}

export abstract class OverlayManagerBase {
  readonly id: string;
  readonly iframe: HTMLIFrameElement;
  readonly placement: OverlayPlacement;
  protected readonly agentOrigin: string;
  protected sendSeq = 0;
  protected lastReceivedSeq = -1;
  violations = 0;
  ready = false;
  private readonly listener: (event: MessageEvent) => void;
  private disposed = false;

  constructor(placement: OverlayPlacement, agentOrigin: string) {
    this.id = nextOverlayId();
    this.placement = placement;
    this.agentOrigin = agentOrigin;
    const doc = placement.target.ownerDocument;
    this.iframe = doc.createElement("iframe");
    this.iframe.className = "mg-overlay-frame";
    this.iframe.setAttribute("data-mg-ui", "1");
    this.iframe.src =
      `${agentOrigin}/overlay/${placement.kind}.html#id=${encodeURIComponent(this.id)}`;
    applyGeometry(this.iframe, placement);

    this.listener = (event: MessageEvent) => this.handleMessage(event);
    const view = doc.defaultView;
    view?.addEventListener("message", this.listener);

    placement.target.parentNode?.insertBefore(this.iframe, placement.target.nextSibling);
    occlude(placement.target);
  }

  private handleMessage(event: MessageEvent): void {
    if (this.disposed) return;
    if (event.source !== this.iframe.contentWindow) return;
    const message = parseWireMessage(event.data);
    if (message === null || message.overlayId !== this.id) return;
    if (!isSafeOutboundBody(message.body)) {
      // plaintext (or anything unrecognizable) stops here
      this.violations += 1;
      return;
    }
    if (message.seq <= this.lastReceivedSeq) return; // stale, reordered
    this.lastReceivedSeq = message.seq;
    if (message.type === "ready") {
      this.ready = true;
      this.onReady();
      return;
    }
    if (message.type === "resize") {
      const height = Number.parseInt(message.body, 10);
      if (Number.isFinite(height) && height > 0 && height < 10000) {
        this.iframe.style.height = `${height}px`;
      }
      return;
    }
    this.onMessage(message);
  }

  protected sendToOverlay(type: WireMessageType, body: string): void {
    this.sendSeq += 1;
    const message = makeMessage(this.id, this.sendSeq, type, body);
    // target origin pinned: only a document from the agent origin can read it
    this.iframe.contentWindow?.postMessage(message, this.agentOrigin);
  }

  protected abstract onReady(): void;

  protected abstract onMessage(message: WireMessage): void;

  dispose(): void {
    if (this.disposed) return;
    this.disposed = true;
    this.placement.target.ownerDocument.defaultView?.removeEventListener(
      "message", this.listener,
    );
    this.iframe.remove();
    restore(this.placement.target);
  }
}

export class ReadOverlayManager extends OverlayManagerBase {
  constructor(placement: OverlayPlacement, agentOrigin: string, readonly armored: string) {
    super(placement, agentOrigin);
  }

  protected onReady(): void {
    this.sendToOverlay("payload", this.armored);
  }

  protected onMessage(_message: WireMessage): void {
    // read overlays only report ready/resize
  }
}

export type ComposeResultListener = (armored: string) => void;

export class ComposeOverlayManager extends OverlayManagerBase {
  private resultListeners: ComposeResultListener[] = [];
  lastDraft: string | null = null;

  constructor(placement: OverlayPlacement, agentOrigin: string) {
    super(placement, agentOrigin);
  }

  onResult(listener: ComposeResultListener): void {
    this.resultListeners.push(listener);
  }

  protected onReady(): void {
    // hand the overlay any armored draft already sitting in the target
    const existing = readElementText(this.placement.target);
    const match = existing.match(/MG1\.[A-Za-z0-9_-]+\.END/);
    this.sendToOverlay("init", match ? match[0] : "");
  }

  protected onMessage(message: WireMessage): void {
    if (message.type === "draft") {
      this.lastDraft = message.body;
      const view = this.placement.target.ownerDocument.defaultView;
      if (view) {
        this.placement.target.dispatchEvent(
          new view.CustomEvent("mg-draft", { detail: message.body, bubbles: true }),
        );
      }
      return;
    }
    if (message.type === "result") {
      writeElementText(this.placement.target, message.body);
      for (const listener of this.resultListeners) listener(message.body);
      this.dispose(); // restores the original element with armor in place
    }
  }
}

function isValueElement(element: Element): element is HTMLTextAreaElement | HTMLInputElement {
  const tag = element.tagName;
  return tag === "TEXTAREA" || tag === "INPUT";
}

export function readElementText(element: Element): string {
  if (isValueElement(element)) return element.value;
  return element.textContent ?? "";
}

export function writeElementText(element: Element, text: string): void {
  const view = element.ownerDocument.defaultView;
  const fire = (name: string) => {
    if (view) element.dispatchEvent(new view.Event(name, { bubbles: true }));
  };
  if (isValueElement(element)) {
    element.value = text;
    fire("input");
    fire("change");
  } else {
    element.textContent = text;
    fire("input");
  }
}
