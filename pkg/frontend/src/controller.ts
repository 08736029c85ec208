/**
 * Controllers decide what gets overlayed on a page.
 *
 * The default controller covers any site: every armored payload found in
 * text gets a read overlay, and every larger text entry surface
 * (textarea, contenteditable) gets a small button that swaps it for a
 * compose overlay.  Site-specific quirks are handled by subclassing with
 * a different CSS selector or a few lines of preparation logic, chosen
 * by URL pattern.
 *
 * Scanning is idempotent: elements are marked once handled, and a
 * repeated scan of the same tree creates nothing new and mutates nothing.
 */
import { ComposeOverlayManager, OverlayManagerBase, ReadOverlayManager } from "./overlay-manager";
import { measure } from "./placement";
import { scanTextForArmor } from "./wire";
import { showTutorialOnce } from "./tutorial";

export interface ControllerConfig {
  /** pages this controller applies to; undefined = fallback for all */
  urlPattern?: RegExp;
  /** entry surfaces that get a compose affordance */
  composeSelector: string;
  overlayKinds: ReadonlyArray<"read" | "compose">;
}

export const DEFAULT_CONFIG: ControllerConfig = {
  composeSelector: "textarea, [contenteditable]",
  overlayKinds: ["read", "compose"],
};

const PAYLOAD_MARK = "data-mg-overlayed";
const COMPOSE_MARK = "data-mg-compose";
const UI_MARK = "data-mg-ui";

export class ControllerBase {
  readonly managers: OverlayManagerBase[] = [];
  /** subtree roots handed to scan(); instrumentation for tests and bench */
  scannedRoots = 0;
  /** read overlays placed + compose affordances attached, cumulative */
  handled = 0;

  constructor(
    readonly agentOrigin: string,
    readonly config: ControllerConfig = DEFAULT_CONFIG,
  ) {}

  /** Hook for site-specific fixes before a compose target is overlayed. */
  protected prepareComposeTarget(_target: Element): void {}

  /** Scan a subtree; returns the number of new overlays/affordances. */
  scan(root: ParentNode & Node): number {
    this.scannedRoots += 1;
    let created = 0;
    if (this.config.overlayKinds.includes("read")) {
      created += this.scanForPayloads(root);
    }
    if (this.config.overlayKinds.includes("compose")) {
      created += this.scanForComposeTargets(root);
    }
    this.handled += created;
    return created;
  }

  private scanForPayloads(root: ParentNode & Node): number {
    const doc = root.ownerDocument ?? (root as Document);
    let created = 0;
    const walker = doc.createTreeWalker(root, 4 /* NodeFilter.SHOW_TEXT */);
    const hosts: Element[] = [];
    for (let node = walker.nextNode(); node; node = walker.nextNode()) {
      const text = node.nodeValue ?? "";
      if (!text.includes("MG1.")) continue;
      const host = node.parentElement;
      if (!host || this.isOurUi(host)) continue;
      if (host.closest(`[${PAYLOAD_MARK}]`)) continue;
      if (scanTextForArmor(text).length > 0) hosts.push(host);
    }
    for (const host of hosts) {
      if (host.hasAttribute(PAYLOAD_MARK)) continue;
      const spans = scanTextForArmor(host.textContent ?? "");
      if (spans.length === 0) continue;
      host.setAttribute(PAYLOAD_MARK, "1");
      for (const span of spans) {
        this.managers.push(
          new ReadOverlayManager(measure(host, "read"), this.agentOrigin, span.armored),
        );
        created += 1;
      }
      showTutorialOnce("read", doc);
    }
    // payloads inside accessible (same-origin) frames
    for (const frame of Array.from(queryAll(root, "iframe"))) {
      const inner = (frame as HTMLIFrameElement).contentDocument;
      if (inner?.body) created += this.scanForPayloads(inner.body);
    }
    return created;
  }

  private scanForComposeTargets(root: ParentNode & Node): number {
    let created = 0;
    for (const target of Array.from(queryAll(root, this.config.composeSelector))) {
      if (target.hasAttribute(COMPOSE_MARK) || this.isOurUi(target)) continue;
      if (target.hasAttribute(PAYLOAD_MARK)) continue;
      target.setAttribute(COMPOSE_MARK, "1");
      this.attachComposeButton(target);
      created += 1;
    }
    return created;
  }

  private attachComposeButton(target: Element): void {
    const doc = target.ownerDocument;
    const button = doc.createElement("button");
    button.type = "button";
    button.className = "mg-compose-button";
    button.setAttribute(UI_MARK, "1");
    button.textContent = "\u{1F512} compose encrypted";
    button.addEventListener("click", (event) => {
      event.preventDefault();
      this.openCompose(target, button);
    });
    target.parentNode?.insertBefore(button, target.nextSibling);
    showTutorialOnce("compose", doc);
  }

  openCompose(target: Element, button?: Element): ComposeOverlayManager {
    this.prepareComposeTarget(target);
    const manager = new ComposeOverlayManager(measure(target, "compose"), this.agentOrigin);
    if (button instanceof HTMLElement) button.style.display = "none";
    manager.onResult(() => {
      if (button instanceof HTMLElement) button.style.display = "";
    });
    this.managers.push(manager);
    return manager;
  }

  private isOurUi(element: Element): boolean {
    return element.closest(`[${UI_MARK}]`) !== null
      || element.tagName.toLowerCase() === "iframe"
      && element.classList.contains("mg-overlay-frame");
  }

  get overlayCount(): number {
    return this.managers.length;
  }

  totalViolations(): number {
    return this.managers.reduce((sum, manager) => sum + manager.violations, 0);
  }
}

function queryAll(root: ParentNode & Node, selector: string): Element[] {
  const found = Array.from(root.querySelectorAll(selector));
  if (root.nodeType === 1 && (root as Element).matches(selector)) {
    found.unshift(root as Element);
  }
  return found;
}

export class DefaultController extends ControllerBase {}

/**
 * Example site-specific controller: some applications remove their
 * comment field the moment it loses focus, which happens as soon as the
 * compose overlay takes it over.  Swallowing the blur event before the
 * page sees it keeps the field alive.
 */
export class KeepAliveOnBlurController extends ControllerBase {
  protected prepareComposeTarget(target: Element): void {
    const swallow = (event: Event) => event.stopImmediatePropagation();
    target.addEventListener("blur", swallow, true);
    target.addEventListener("focusout", swallow, true);
  }
}

export interface ControllerEntry {
  pattern: RegExp;
  build: (agentOrigin: string) => ControllerBase;
}

export const CONTROLLER_REGISTRY: ControllerEntry[] = [
  {
    pattern: /disappear-on-blur/,
    build: (origin) => new KeepAliveOnBlurController(origin),
  },
];

export function pickController(url: string, agentOrigin: string): ControllerBase {
  for (const entry of CONTROLLER_REGISTRY) {
    if (entry.pattern.test(url)) return entry.build(agentOrigin);
  }
  return new DefaultController(agentOrigin);
}
