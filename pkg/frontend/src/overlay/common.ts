/**
 * Overlay-page side of the wire channel plus shared UI pieces (dark
 * theme, unlock form).  The overlay page runs on the agent origin; its
 * parent is the untrusted host page, so outbound messages are checked
 * against the ciphertext-only rule one last time before posting and
 * inbound data is treated as hostile until validated.
 */
import { AgentApi, AgentError, Remediation } from "../agent-client";
import {
  isSafeOutboundBody,
  makeMessage,
  parseWireMessage,
  WireMessage,
  WireMessageType,
} from "../wire";

export interface OverlayChannel {
  overlayId: string;
  send(type: WireMessageType, body: string): void;
  onMessage(callback: (message: WireMessage) => void): void;
}

export function overlayIdFromLocation(view: Window): string {
  const match = /id=([^&]+)/.exec(view.location.hash);
  return match ? decodeURIComponent(match[1]) : "standalone";
}

/**
 * Channel talking to the embedding page.  The parent's origin is
 * whatever site the user is on, so the target origin is "*"; that is
 * safe precisely because only armor, integers, or empty bodies ever
 * leave here.
 */
export function createParentChannel(view: Window): OverlayChannel {
  const overlayId = overlayIdFromLocation(view);
  let sendSeq = 0;
  let lastReceived = -1;
  const callbacks: ((message: WireMessage) => void)[] = [];

  view.addEventListener("message", (event: MessageEvent) => {
    if (event.source !== view.parent) return;
    const message = parseWireMessage(event.data);
    if (message === null || message.overlayId !== overlayId) return;
    if (message.seq <= lastReceived) return;
    lastReceived = message.seq;
    for (const callback of callbacks) callback(message);
  });

  return {
    overlayId,
    send(type: WireMessageType, body: string): void {
      if (!isSafeOutboundBody(body)) {
        throw new Error("refusing to send non-ciphertext body to the host page");
      }
      sendSeq += 1;
      view.parent.postMessage(makeMessage(overlayId, sendSeq, type, body), "*");
    },
    onMessage(callback: (message: WireMessage) => void): void {
      callbacks.push(callback);
    },
  };
}

/** Distinctive dark theme: these panels must never look like the page. */
export const OVERLAY_CSS = `
  :root { color-scheme: dark; }
  body.mg-overlay-body {
    margin: 0; padding: 10px 12px;
    background: #161a22; color: #e8e8e8;
    font: 14px/1.45 system-ui, sans-serif;
    border: 2px solid #2e7d6b; border-radius: 4px;
    box-sizing: border-box; min-height: 100vh;
    overflow: auto; /* tiny overlays scroll; controls never clip away */
  }
  .mg-badge {
    display: flex; align-items: center; gap: 6px;
    font-size: 11px; letter-spacing: .08em; text-transform: uppercase;
    color: #7fd1b9; margin-bottom: 8px;
  }
  .mg-content { word-wrap: break-word; }
  .mg-content a { color: #8ab4f8; }
  .mg-error { color: #ff9d9d; white-space: pre-wrap; }
  .mg-toolbar { display: flex; gap: 4px; margin-bottom: 6px; }
  .mg-toolbar button {
    background: #222836; color: #e8e8e8; border: 1px solid #3a4152;
    border-radius: 3px; min-width: 28px; padding: 3px 7px; cursor: pointer;
  }
  .mg-narrow .mg-toolbar { display: none; }
  .mg-editor {
    min-height: 60px; border: 1px solid #3a4152; border-radius: 3px;
    padding: 6px 8px; background: #101420; outline: none;
  }
  .mg-row { display: flex; gap: 6px; margin-top: 6px; flex-wrap: wrap; }
  .mg-row input, .mg-row select {
    background: #101420; color: #e8e8e8; border: 1px solid #3a4152;
    border-radius: 3px; padding: 4px 6px; flex: 1 1 10em;
  }
  .mg-send {
    background: #2e7d6b; color: #fff; border: 0; border-radius: 3px;
    padding: 5px 14px; cursor: pointer;
  }
  .mg-form { margin-top: 8px; display: grid; gap: 6px; }
  .mg-form label { font-size: 12px; color: #aab3c5; }
  .mg-status { font-size: 12px; color: #aab3c5; margin-top: 6px; }
`;

export function injectTheme(doc: Document): void {
  if (doc.querySelector("style[data-mg-theme]")) return;
  const style = doc.createElement("style");
  style.setAttribute("data-mg-theme", "1");
  style.textContent = OVERLAY_CSS;
  doc.head.appendChild(style);
  doc.body.classList.add("mg-overlay-body");
}

export function securityBadge(doc: Document, text: string): HTMLElement {
  const badge = doc.createElement("div");
  badge.className = "mg-badge";
  badge.textContent = `\u{1F512} ${text}`;
  return badge;
}

/** Render a remediation form schema (labels + inputs), headless-core style. */
export function renderRemediation(
  doc: Document,
  remediation: Remediation,
  onSubmit: (values: Record<string, string>) => void,
): HTMLFormElement {
  const form = doc.createElement("form");
  form.className = "mg-form";
  if (remediation.title) {
    const title = doc.createElement("label");
    title.textContent = remediation.title;
    form.appendChild(title);
  }
  const inputs: Record<string, HTMLInputElement> = {};
  for (const field of remediation.fields) {
    const label = doc.createElement("label");
    label.textContent = field.label;
    const input = doc.createElement("input");
    input.name = field.field_name;
    input.type = field.input_kind === "password" ? "password" : "text";
    input.required = field.required;
    inputs[field.field_name] = input;
    label.appendChild(input);
    form.appendChild(label);
  }
  const submit = doc.createElement("button");
  submit.type = "submit";
  submit.className = "mg-send";
  submit.textContent = "continue";
  form.appendChild(submit);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const values: Record<string, string> = {};
    for (const [name, input] of Object.entries(inputs)) values[name] = input.value;
    onSubmit(values);
  });
  return form;
}

export function unlockForm(
  doc: Document,
  client: AgentApi,
  onUnlocked: () => void,
  onError: (error: AgentError) => void,
): HTMLFormElement {
  return renderRemediation(
    doc,
    {
      title: "Unlock your keys",
      fields: [
        { field_name: "master_password", label: "Master password",
          input_kind: "password", required: true },
      ],
    },
    (values) => {
      client
        .unlock(values.master_password)
        .then(onUnlocked)
        .catch((error: AgentError) => onError(error));
    },
  );
}
