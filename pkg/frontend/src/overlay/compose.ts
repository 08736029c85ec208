/**
 * Compose overlay page: a rich-text editor that encrypts through the
 * agent before anything leaves the frame.  Every message to the host
 * relay carries armor only, including the periodic draft saves.  The
 * layout is reactive: under 480 px the formatting toolbar disappears but
 * the keyboard shortcuts (ctrl/cmd+b, i, u) keep working.
 */
import { AgentApi, AgentError, KeySystemInfo } from "../agent-client";
import { sanitizeHtml } from "../sanitize";
import { isArmor } from "../wire";
import {
  OverlayChannel,
  injectTheme,
  securityBadge,
  unlockForm,
} from "./common";

export const NARROW_WIDTH_PX = 480;
export const DRAFT_INTERVAL_MS = 5000;

const SCHEME_NAMES: Record<number, string> = { 1: "password", 2: "rsa", 3: "ibe" };

export interface ComposeOverlayApp {
  root: HTMLElement;
  editor: HTMLElement;
  toolbar: HTMLElement;
  recipientsInput: HTMLInputElement;
  keySelect: HTMLSelectElement;
  layout(width: number): void;
  applyFormat(tag: "b" | "i" | "u"): void;
  submit(): Promise<boolean>;
  saveDraft(): Promise<boolean>;
  stop(): void;
}

export function initComposeOverlay(
  doc: Document,
  client: AgentApi,
  channel: OverlayChannel,
): ComposeOverlayApp {
  injectTheme(doc);
  const root = doc.createElement("div");
  root.className = "mg-compose";

  const badge = securityBadge(doc, "protected composer");

  const toolbar = doc.createElement("div");
  toolbar.className = "mg-toolbar";
  const formats: ("b" | "i" | "u")[] = ["b", "i", "u"];
  for (const tag of formats) {
    const button = doc.createElement("button");
    button.type = "button";
    button.dataset.format = tag;
    button.innerHTML = `<${tag}>${tag.toUpperCase()}</${tag}>`;
    button.addEventListener("click", () => applyFormat(tag));
    toolbar.appendChild(button);
  }

  const editor = doc.createElement("div");
  editor.className = "mg-editor";
  editor.setAttribute("contenteditable", "true");
  editor.addEventListener("keydown", (event: KeyboardEvent) => {
    if (!(event.ctrlKey || event.metaKey)) return;
    const key = event.key.toLowerCase();
    if (key === "b" || key === "i" || key === "u") {
      event.preventDefault();
      applyFormat(key);
    }
  });
  editor.addEventListener("input", () => {
    dirty = true;
  });

  const row = doc.createElement("div");
  row.className = "mg-row";
  const recipientsInput = doc.createElement("input");
  recipientsInput.placeholder = "recipients (comma separated)";
  const keySelect = doc.createElement("select");
  const sendButton = doc.createElement("button");
  sendButton.type = "button";
  sendButton.className = "mg-send";
  sendButton.textContent = "encrypt & place";
  sendButton.addEventListener("click", () => void submit());
  row.append(recipientsInput, keySelect, sendButton);

  const status = doc.createElement("div");
  status.className = "mg-status";

  root.append(badge, toolbar, editor, row, status);
  doc.body.appendChild(root);

  let dirty = false;
  let systems: KeySystemInfo[] = [];

  function applyFormat(tag: "b" | "i" | "u"): void {
    const view = doc.defaultView;
    const selection = view?.getSelection?.();
    if (!selection || selection.rangeCount === 0) return;
    const range = selection.getRangeAt(0);
    if (range.collapsed || !editor.contains(range.commonAncestorContainer)) return;
    const wrapper = doc.createElement(tag);
    wrapper.appendChild(range.extractContents());
    range.insertNode(wrapper);
    selection.removeAllRanges();
    dirty = true;
  }

  function layout(width: number): void {
    root.classList.toggle("mg-narrow", width < NARROW_WIDTH_PX);
  }

  function selectedFingerprint(): string | undefined {
    return keySelect.value || undefined;
  }

  function recipients(): string[] {
    return recipientsInput.value
      .split(",")
      .map((item) => item.trim())
      .filter((item) => item.length > 0);
  }

  async function encryptCurrent(): Promise<string> {
    return client.packageMessage({
      plaintext_html: editor.innerHTML,
      recipients: recipients(),
      fingerprint: selectedFingerprint(),
    });
  }

  function showLockedForm(retry: () => void): void {
    status.textContent = "";
    const form = unlockForm(
      doc, client,
      () => {
        form.remove();
        retry();
      },
      (error) => {
        status.textContent = `Unlock failed: ${error.message}`;
      },
    );
    status.appendChild(form);
    reportHeight();
  }

  async function submit(): Promise<boolean> {
    try {
      const armored = await encryptCurrent();
      channel.send("result", armored);
      dirty = false;
      status.textContent = "placed encrypted message into the page";
      return true;
    } catch (error) {
      if (error instanceof AgentError && error.locked) {
        showLockedForm(() => void submit());
        return false;
      }
      status.textContent =
        `Cannot encrypt: ${error instanceof Error ? error.message : String(error)}`;
      return false;
    }
  }

  async function saveDraft(): Promise<boolean> {
    if (!dirty) return false;
    try {
      const armored = await encryptCurrent();
      channel.send("draft", armored);
      dirty = false;
      return true;
    } catch {
      return false; // drafts are best-effort; locked agent just skips them
    }
  }

  function reportHeight(): void {
    channel.send("resize", String(Math.max(doc.body.scrollHeight, root.scrollHeight, 0)));
  }

  async function populateKeySystems(): Promise<void> {
    try {
      systems = await client.keysystems();
      keySelect.textContent = "";
      for (const system of systems) {
        const option = doc.createElement("option");
        option.value = system.fingerprint;
        const scheme = SCHEME_NAMES[system.scheme_id] ?? String(system.scheme_id);
        option.textContent = `${system.label} (${scheme})`;
        keySelect.appendChild(option);
      }
    } catch (error) {
      if (error instanceof AgentError && error.locked) {
        showLockedForm(() => void populateKeySystems());
      }
    }
  }

  channel.onMessage((message) => {
    if (message.type === "init" && message.body && isArmor(message.body)) {
      // continue editing an encrypted draft found in the host element
      void client
        .unpackage(message.body)
        .then((result) => {
          editor.textContent = "";
          editor.appendChild(sanitizeHtml(result.plaintext_html, doc));
        })
        .catch(() => {
          status.textContent = "Existing encrypted draft could not be opened.";
        });
    }
  });

  const view = doc.defaultView;
  layout(view?.innerWidth ?? 1024);
  view?.addEventListener("resize", () => layout(view.innerWidth));
  const timer = view?.setInterval(() => void saveDraft(), DRAFT_INTERVAL_MS);

  void populateKeySystems();
  channel.send("ready", "");
  reportHeight();

  return {
    root, editor, toolbar, recipientsInput, keySelect,
    layout, applyFormat, submit, saveDraft,
    stop: () => {
      if (timer !== undefined) view?.clearInterval(timer);
    },
  };
}
