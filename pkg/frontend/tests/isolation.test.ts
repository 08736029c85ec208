/**
 * The isolation contract, end to end at the host-page level: across the
 * whole fixture corpus, no plaintext ever enters the host document, and
 * every message crossing overlay -> host passes the armor-or-integer
 * check.  (True cross-origin frame opacity is a browser guarantee; what
 * the frontend owes - and what is asserted here - is that nothing it
 * writes or relays into host territory is ever plaintext.)
 */
import { afterEach, describe, expect, it } from "vitest";

import { ComposeOverlayManager } from "../src/overlay-manager";
import { startFrontend } from "../src/main";
import { makeMessage, scanTextForArmor } from "../src/wire";
import {
  AGENT_ORIGIN,
  decodeStubArmor,
  flushMutations,
  loadFixture,
  makeStubArmor,
  resetDocument,
} from "./helpers";

const cleanups: (() => void)[] = [];

afterEach(() => {
  while (cleanups.length) cleanups.pop()!();
  resetDocument();
});

const CORPUS = [
  "01-payload-in-div.html",
  "02-payload-inline-paragraph.html",
  "03-textarea.html",
  "04-contenteditable.html",
  "05-iframe-nested.html",
  "06-dynamic-insertion.html",
  "07-disappear-on-blur.html",
  "08-multiple-payloads.html",
  "09-mixed.html",
  "10-payload-in-table.html",
  "11-payload-in-list.html",
  "12-deep-nesting.html",
];

describe("isolation across the fixture corpus", () => {
  it("no decrypted plaintext appears in any host document; zero violations", async () => {
    let targets = 0;
    let handled = 0;
    for (const fixture of CORPUS) {
      loadFixture(fixture);
      if (fixture === "05-iframe-nested.html") {
        const widget = document.getElementById("widget") as HTMLIFrameElement;
        widget.contentDocument!.body.innerHTML = "<div>MG1.ZnJhbWUgc2VjcmV0.END</div>";
      }
      // the plaintexts hiding behind every armored payload on the page
      const secrets = scanTextForArmor(document.body.textContent ?? "").map((span) =>
        decodeStubArmor(span.armored),
      );

      const handle = startFrontend(document, AGENT_ORIGIN);
      cleanups.push(handle.stop);

      if (fixture === "06-dynamic-insertion.html") {
        const feed = document.getElementById("feed")!;
        const div = document.createElement("div");
        div.textContent = makeStubArmor("dynamic secret");
        feed.appendChild(div);
        secrets.push("dynamic secret");
        await flushMutations();
      }

      targets += document.querySelectorAll("iframe.mg-overlay-frame").length;
      targets += document.querySelectorAll("button.mg-compose-button").length;
      handled += handle.controller.handled;

      const hostDom = document.documentElement.outerHTML;
      for (const secret of secrets) {
        expect(secret.length).toBeGreaterThan(0);
        expect(hostDom, fixture).not.toContain(secret);
      }
      expect(handle.controller.totalViolations(), fixture).toBe(0);
      handle.stop();
      resetDocument();
    }
    expect(handled).toBeGreaterThanOrEqual(targets);
    expect(handled).toBeGreaterThan(10);
  });

  it("host scripts reading an occluded element see only armor", () => {
    loadFixture("01-payload-in-div.html");
    const handle = startFrontend(document, AGENT_ORIGIN);
    cleanups.push(handle.stop);
    const host = document.querySelector(".message-body")!;
    // what the page's own code can read from its DOM
    expect(host.textContent).toMatch(/^MG1\.[A-Za-z0-9_-]+\.END$/);
    expect(host.textContent).not.toContain("fixture payload one");
  });

  it("complete compose flow leaves armor in the host element that decrypts correctly", () => {
    loadFixture("03-textarea.html");
    const handle = startFrontend(document, AGENT_ORIGIN);
    cleanups.push(handle.stop);
    (document.querySelector("button.mg-compose-button") as HTMLButtonElement).click();
    const manager = handle.controller.managers[0] as ComposeOverlayManager;

    // the overlay (simulated) returns the encrypted composition
    const armored = makeStubArmor("hi");
    window.dispatchEvent(
      new MessageEvent("message", {
        data: makeMessage(manager.id, 1, "result", armored),
        source: manager.iframe.contentWindow,
      }),
    );
    const field = document.querySelector("textarea") as HTMLTextAreaElement;
    expect(field.value).toMatch(/^MG1\.[A-Za-z0-9_-]+\.END$/);
    expect(decodeStubArmor(field.value)).toBe("hi");
    expect(document.documentElement.outerHTML).not.toContain(">hi<");
  });

  it("a compromised overlay cannot push plaintext into the host page", () => {
    loadFixture("03-textarea.html");
    const handle = startFrontend(document, AGENT_ORIGIN);
    cleanups.push(handle.stop);
    (document.querySelector("button.mg-compose-button") as HTMLButtonElement).click();
    const manager = handle.controller.managers[0] as ComposeOverlayManager;

    for (const [index, evil] of ["raw secret", "<img src=x>", "MG1.AQ.END trailing"].entries()) {
      window.dispatchEvent(
        new MessageEvent("message", {
          data: makeMessage(manager.id, index + 1, "result", evil),
          source: manager.iframe.contentWindow,
        }),
      );
    }
    expect(manager.violations).toBe(3);
    const field = document.querySelector("textarea") as HTMLTextAreaElement;
    expect(field.value).toBe("");
    expect(document.documentElement.outerHTML).not.toContain("raw secret");
  });
});
