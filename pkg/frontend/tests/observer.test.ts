import { afterEach, describe, expect, it } from "vitest";

import { DefaultController } from "../src/controller";
import { PageObserver, activeObserverCount, dedupeByContainment } from "../src/observer";
import { startFrontend } from "../src/main";
import {
  AGENT_ORIGIN,
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

describe("mutation tracking", () => {
  it("overlays nodes appended after the initial scan", async () => {
    loadFixture("06-dynamic-insertion.html");
    const handle = startFrontend(document, AGENT_ORIGIN);
    cleanups.push(handle.stop);
    expect(handle.controller.handled).toBe(0);

    const feed = document.getElementById("feed")!;
    for (let i = 0; i < 10; i += 1) {
      const div = document.createElement("div");
      div.textContent = makeStubArmor(`dynamic ${i}`);
      feed.appendChild(div);
    }
    await flushMutations();
    expect(handle.controller.handled).toBe(10);
    expect(document.querySelectorAll("iframe.mg-overlay-frame")).toHaveLength(10);
  });

  it("rescans only the mutated subtrees", async () => {
    loadFixture("09-mixed.html");
    const handle = startFrontend(document, AGENT_ORIGIN);
    cleanups.push(handle.stop);
    const rootsAfterInit = handle.controller.scannedRoots;

    const side = document.createElement("aside");
    side.textContent = "unrelated change";
    document.body.appendChild(side);
    await flushMutations();

    // exactly one extra scan, rooted at the inserted node, not the body
    expect(handle.controller.scannedRoots).toBe(rootsAfterInit + 1);
    expect(handle.controller.handled).toBe(4); // nothing new overlayed
  });

  it("keeps exactly one observer even across re-injection", () => {
    loadFixture("13-no-matches.html");
    const handle = startFrontend(document, AGENT_ORIGIN);
    cleanups.push(handle.stop);
    expect(activeObserverCount()).toBe(1);
    const again = startFrontend(document, AGENT_ORIGIN); // bookmarklet clicked twice
    expect(again).toBe(handle);
    expect(activeObserverCount()).toBe(1);
  });

  it("double start of the same observer is a no-op", () => {
    const observer = new PageObserver(document.body, () => {});
    observer.start();
    observer.start();
    expect(activeObserverCount()).toBe(1);
    observer.stop();
    observer.stop();
    expect(activeObserverCount()).toBe(0);
  });

  it("text mutations inside an element trigger a rescan of its parent", async () => {
    document.body.innerHTML = "<div id='slot'>plain</div>";
    const controller = new DefaultController(AGENT_ORIGIN);
    controller.scan(document.body);
    const observer = new PageObserver(document.body, (roots) => {
      for (const root of roots) controller.scan(root as ParentNode & Node);
    });
    observer.start();
    cleanups.push(() => observer.stop());

    const slot = document.getElementById("slot")!;
    slot.firstChild!.nodeValue = makeStubArmor("now encrypted");
    await flushMutations();
    expect(controller.handled).toBe(1);
  });
});

describe("containment dedupe", () => {
  it("drops nodes whose ancestor is already listed", () => {
    const parent = document.createElement("div");
    const child = document.createElement("p");
    parent.appendChild(child);
    expect(dedupeByContainment([parent, child])).toEqual([parent]);
    expect(dedupeByContainment([child, parent])).toEqual([parent]);
    expect(dedupeByContainment([parent, parent])).toEqual([parent]);
  });
});
