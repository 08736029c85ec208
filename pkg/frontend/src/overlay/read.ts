/**
 * Read overlay page: receives an armored payload from the host relay,
 * has the agent unpackage it, and renders the sanitized result.  The
 * payload arrives from hostile territory and is checked against the
 * armor grammar before it goes anywhere near the agent; the decrypted
 * markup is rebuilt through the allowlist sanitizer, so scripts, event
 * handlers, and anything that loads a remote resource never execute
 * inside the overlay.
 */
import { AgentApi, AgentError } from "../agent-client";
import { sanitizeHtml } from "../sanitize";
import { isArmor } from "../wire";
import {
  OverlayChannel,
  injectTheme,
  renderRemediation,
  securityBadge,
  unlockForm,
} from "./common";

const SCHEME_NAMES: Record<number, string> = { 1: "password", 2: "rsa", 3: "ibe" };

export interface ReadOverlayApp {
  root: HTMLElement;
  handlePayload(armored: string): Promise<void>;
}

export function initReadOverlay(
  doc: Document,
  client: AgentApi,
  channel: OverlayChannel,
): ReadOverlayApp {
  injectTheme(doc);
  const root = doc.createElement("div");
  root.className = "mg-read";
  const badge = securityBadge(doc, "protected message");
  const meta = doc.createElement("div");
  meta.className = "mg-status";
  const content = doc.createElement("div");
  content.className = "mg-content";
  const problem = doc.createElement("div");
  problem.className = "mg-error";
  root.append(badge, meta, content, problem);
  doc.body.appendChild(root);

  let pendingArmor: string | null = null;

  function reportHeight(): void {
    const height = Math.max(doc.body.scrollHeight, root.scrollHeight, 0);
    channel.send("resize", String(height));
  }

  function showError(error: AgentError): void {
    content.textContent = "";
    problem.textContent = `Cannot display this message: ${error.message}`;
    if (error.remediation) {
      problem.appendChild(
        renderRemediation(doc, error.remediation, () => {
          // scheme-specific recovery is a stub; retry after input
          if (pendingArmor) void render(pendingArmor);
        }),
      );
    }
    reportHeight();
  }

  async function render(armored: string): Promise<void> {
    problem.textContent = "";
    try {
      const result = await client.unpackage(armored);
      meta.textContent =
        `scheme: ${SCHEME_NAMES[result.scheme_id] ?? result.scheme_id} · ` +
        `key: ${result.fingerprint.slice(0, 16)}`;
      content.textContent = "";
      content.appendChild(sanitizeHtml(result.plaintext_html, doc));
      reportHeight();
    } catch (error) {
      if (error instanceof AgentError && error.locked) {
        problem.textContent = "";
        const form = unlockForm(
          doc, client,
          () => {
            form.remove();
            if (pendingArmor) void render(pendingArmor);
          },
          (unlockError) => {
            problem.textContent = `Unlock failed: ${unlockError.message}`;
          },
        );
        problem.appendChild(form);
        reportHeight();
        return;
      }
      showError(error instanceof AgentError ? error : new AgentError(0, "Error", String(error)));
    }
  }

  async function handlePayload(armored: string): Promise<void> {
    if (!isArmor(armored)) {
      problem.textContent = "Received data that is not an encrypted payload.";
      reportHeight();
      return;
    }
    pendingArmor = armored;
    await render(armored);
  }

  channel.onMessage((message) => {
    if (message.type === "payload" || message.type === "init") {
      if (message.body) void handlePayload(message.body);
    }
  });
  channel.send("ready", "");

  return { root, handlePayload };
}
