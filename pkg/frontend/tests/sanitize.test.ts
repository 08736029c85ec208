import { afterEach, describe, expect, it, vi } from "vitest";

import { sanitizeHtml } from "../src/sanitize";
import { resetDocument } from "./helpers";

afterEach(resetDocument);

/** Twenty hostile payloads: scripts, handlers, loaders, exfil vectors. */
const HOSTILE: string[] = [
  `<script>window.__canary()</script>`,
  `<img src="https://evil.example/x.png" onerror="window.__canary()">`,
  `<div onclick="window.__canary()">click me</div>`,
  `<a href="javascript:window.__canary()">link</a>`,
  `<iframe src="https://evil.example/frame"></iframe>`,
  `<object data="https://evil.example/o"></object>`,
  `<embed src="https://evil.example/e">`,
  `<svg onload="window.__canary()"><circle r="1"/></svg>`,
  `<style>body { background: url("https://evil.example/css"); }</style>`,
  `<form action="https://evil.example/post"><input name="x"></form>`,
  `<meta http-equiv="refresh" content="0;url=https://evil.example/">`,
  `<base href="https://evil.example/">`,
  `<link rel="stylesheet" href="https://evil.example/s.css">`,
  `<video src="https://evil.example/v.mp4" autoplay></video>`,
  `<audio src="https://evil.example/a.mp3" autoplay></audio>`,
  `<details open ontoggle="window.__canary()">x</details>`,
  `<b onmouseover="window.__canary()">formatted</b>`,
  `<span class="x" style="background:url('https://evil.example/s')">styled</span>`,
  `<p><template><script>window.__canary()</script></template>ok</p>`,
  `<a href="data:text/html,<script>window.__canary()</script>">data link</a>`,
];

const LOADING_TAGS =
  "script, style, img, iframe, frame, object, embed, link, video, audio, source, meta, base, form, svg, template";

describe("hostile payload corpus", () => {
  it("renders all 20 payloads with zero canary executions and zero loaders", () => {
    const canary = vi.fn();
    (window as Window & { __canary?: () => void }).__canary = canary;

    for (const payload of HOSTILE) {
      const host = document.createElement("div");
      host.appendChild(sanitizeHtml(payload, document));
      document.body.appendChild(host);

      // nothing that can execute or load survives
      expect(host.querySelectorAll(LOADING_TAGS), payload).toHaveLength(0);
      for (const element of Array.from(host.querySelectorAll("*"))) {
        for (const attribute of Array.from(element.attributes)) {
          expect(attribute.name.startsWith("on"), payload).toBe(false);
          expect(attribute.name, payload).not.toBe("style");
          if (attribute.name === "href") {
            expect(attribute.value).toMatch(/^(https?:|mailto:)/i);
          }
          if (attribute.name === "src" || attribute.name === "action") {
            throw new Error(`loader attribute survived: ${payload}`);
          }
        }
      }
      // poke the content to flush any surviving handler wiring
      for (const element of Array.from(host.querySelectorAll("*"))) {
        element.dispatchEvent(new MouseEvent("click", { bubbles: true }));
        element.dispatchEvent(new MouseEvent("mouseover", { bubbles: true }));
      }
    }
    expect(canary).not.toHaveBeenCalled();
    expect(HOSTILE).toHaveLength(20);
  });

  it("keeps harmless formatting", () => {
    const fragment = sanitizeHtml(
      `<p>keep <b>bold</b>, <i>italic</i>, <em>em</em>, <strong>strong</strong>,
       <u>underline</u></p><ul><li>a</li><li>b</li></ul>`,
      document,
    );
    const host = document.createElement("div");
    host.appendChild(fragment);
    expect(host.querySelector("b")?.textContent).toBe("bold");
    expect(host.querySelector("i")?.textContent).toBe("italic");
    expect(host.querySelectorAll("li")).toHaveLength(2);
  });

  it("keeps safe links without referrer leakage", () => {
    const host = document.createElement("div");
    host.appendChild(
      sanitizeHtml(`<a href="https://example.com/page">ok</a>`, document),
    );
    const anchor = host.querySelector("a")!;
    expect(anchor.getAttribute("href")).toBe("https://example.com/page");
    expect(anchor.getAttribute("rel")).toContain("noreferrer");
    expect(anchor.getAttribute("target")).toBe("_blank");
  });

  it("drops javascript links but keeps their text", () => {
    const host = document.createElement("div");
    host.appendChild(sanitizeHtml(`<a href="javascript:alert(1)">text</a>`, document));
    const anchor = host.querySelector("a")!;
    expect(anchor.hasAttribute("href")).toBe(false);
    expect(anchor.textContent).toBe("text");
  });

  it("keeps span classes only", () => {
    const host = document.createElement("div");
    host.appendChild(
      sanitizeHtml(`<span class="tag" id="x" data-y="1">s</span>`, document),
    );
    const span = host.querySelector("span")!;
    expect(span.getAttribute("class")).toBe("tag");
    expect(span.hasAttribute("id")).toBe(false);
    expect(span.hasAttribute("data-y")).toBe(false);
  });

  it("unwraps unknown containers but preserves their text", () => {
    const host = document.createElement("div");
    host.appendChild(
      sanitizeHtml(`<section><h1>title</h1><div>body <b>bold</b></div></section>`, document),
    );
    expect(host.querySelector("section")).toBeNull();
    expect(host.querySelector("h1")).toBeNull();
    expect(host.textContent).toContain("title");
    expect(host.textContent).toContain("body bold");
    expect(host.querySelector("b")?.textContent).toBe("bold");
  });

  it("drops script and style content entirely", () => {
    const host = document.createElement("div");
    host.appendChild(
      sanitizeHtml(`before<script>var leaked = "code";</script>after`, document),
    );
    expect(host.textContent).toBe("beforeafter");
  });
});
