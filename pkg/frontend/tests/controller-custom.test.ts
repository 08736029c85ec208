import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { afterEach, describe, expect, it } from "vitest";

import {
  DefaultController,
  KeepAliveOnBlurController,
  pickController,
} from "../src/controller";
import { AGENT_ORIGIN, loadFixture, resetDocument } from "./helpers";

afterEach(resetDocument);

/** Emulate the hostile host-page behavior: field vanishes on blur. */
function armRemoveOnBlur(): HTMLTextAreaElement {
  loadFixture("07-disappear-on-blur.html");
  const field = document.getElementById("comment") as HTMLTextAreaElement;
  field.addEventListener("blur", () => field.remove());
  return field;
}

describe("site-specific controller selection", () => {
  it("URL pattern picks the fix; everything else gets the default", () => {
    expect(
      pickController("https://site.example/disappear-on-blur/comments", AGENT_ORIGIN),
    ).toBeInstanceOf(KeepAliveOnBlurController);
    expect(
      pickController("https://ordinary.example/page", AGENT_ORIGIN),
    ).toBeInstanceOf(DefaultController);
  });

  it("without the fix, overlaying loses the field on blur", () => {
    const field = armRemoveOnBlur();
    const controller = new DefaultController(AGENT_ORIGIN);
    controller.scan(document.body);
    controller.openCompose(field);
    field.dispatchEvent(new FocusEvent("blur"));
    expect(document.getElementById("comment")).toBeNull(); // the failure mode
  });

  it("the custom controller keeps the field alive through blur", () => {
    const field = armRemoveOnBlur();
    const controller = new KeepAliveOnBlurController(AGENT_ORIGIN);
    controller.scan(document.body);
    controller.openCompose(field);
    field.dispatchEvent(new FocusEvent("blur"));
    expect(document.getElementById("comment")).toBe(field); // still there
  });

  it("the site fix is a small-constant amount of code", () => {
    const source = readFileSync(
      join(dirname(fileURLToPath(import.meta.url)), "..", "src", "controller.ts"),
      "utf-8",
    );
    const match = /export class KeepAliveOnBlurController[^{]*\{([\s\S]*?)\n\}/.exec(source);
    expect(match).not.toBeNull();
    const lines = match![1]
      .split("\n")
      .map((line) => line.trim())
      .filter((line) => line.length > 0 && !line.startsWith("//") && !line.startsWith("*"));
    expect(lines.length).toBeLessThanOrEqual(20);
  });
});
