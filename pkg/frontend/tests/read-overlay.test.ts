import { afterEach, describe, expect, it } from "vitest";

import { AgentError } from "../src/agent-client";
import { initReadOverlay } from "../src/overlay/read";
import {
  StubAgent,
  TestChannel,
  makeStubArmor,
  resetDocument,
  settle,
} from "./helpers";

afterEach(resetDocument);

function setup() {
  const agent = new StubAgent();
  const channel = new TestChannel();
  const app = initReadOverlay(document, agent, channel);
  return { agent, channel, app };
}

describe("read overlay", () => {
  it("announces readiness with an empty body", () => {
    const { channel } = setup();
    expect(channel.sentOfType("ready")).toHaveLength(1);
    expect(channel.sentOfType("ready")[0].body).toBe("");
  });

  it("renders a delivered payload, sanitized, with scheme metadata", async () => {
    const { channel } = setup();
    channel.deliver("payload", makeStubArmor("<b>bold</b><script>window.x()</script> ok"));
    await settle();
    const content = document.querySelector(".mg-content")!;
    expect(content.querySelector("b")?.textContent).toBe("bold");
    expect(content.querySelector("script")).toBeNull();
    expect(content.textContent).toContain("ok");
    expect(document.querySelector(".mg-status")?.textContent).toContain("password");
    const resizes = channel.sentOfType("resize");
    expect(resizes.length).toBeGreaterThan(0);
    expect(resizes.at(-1)!.body).toMatch(/^\d+$/);
  });

  it("applies the distinctive dark theme", () => {
    setup();
    expect(document.body.classList.contains("mg-overlay-body")).toBe(true);
    expect(document.querySelector("style[data-mg-theme]")).not.toBeNull();
    expect(document.querySelector(".mg-badge")?.textContent).toContain("protected");
  });

  it("content scrolls at tiny sizes instead of clipping controls", () => {
    setup();
    const css = document.querySelector("style[data-mg-theme]")!.textContent!;
    expect(css).toMatch(/body\.mg-overlay-body\s*{[^}]*overflow:\s*auto/s);
  });

  it("refuses non-armor payload bodies without calling the agent", async () => {
    const { channel, agent } = setup();
    const calls: string[] = [];
    const original = agent.unpackage.bind(agent);
    agent.unpackage = async (armored: string) => {
      calls.push(armored);
      return original(armored);
    };
    channel.deliver("payload", "MG1.A.END"); // regex-shaped, undecodable
    await settle();
    expect(calls).toHaveLength(0);
    expect(document.querySelector(".mg-error")?.textContent).toContain("not an encrypted");
  });

  it("shows the unlock form when the agent is locked, then renders", async () => {
    const { agent, channel } = setup();
    agent.locked = true;
    channel.deliver("payload", makeStubArmor("waiting"));
    await settle();
    const form = document.querySelector(".mg-error form.mg-form") as HTMLFormElement;
    expect(form).not.toBeNull();
    const input = form.querySelector("input[name='master_password']") as HTMLInputElement;
    input.value = "master";
    form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    await settle();
    expect(document.querySelector(".mg-content")?.textContent).toContain("waiting");
  });

  it("renders remediation for missing-key errors", async () => {
    const { agent, channel } = setup();
    agent.failNext = new AgentError(404, "NoMatchingKey", "no key system can decrypt this", {
      title: "Enter password",
      fields: [
        { field_name: "password", label: "Password", input_kind: "password", required: true },
      ],
    });
    channel.deliver("payload", makeStubArmor("locked away"));
    await settle();
    const problem = document.querySelector(".mg-error")!;
    expect(problem.textContent).toContain("no key system");
    expect(problem.querySelector("form.mg-form input[type='password']")).not.toBeNull();
  });

  it("reports integrity failures without leaking anything", async () => {
    const { agent, channel } = setup();
    agent.failNext = new AgentError(400, "IntegrityFailure", "payload authentication failed");
    channel.deliver("payload", makeStubArmor("tampered"));
    await settle();
    expect(document.querySelector(".mg-error")?.textContent).toContain("authentication failed");
    expect(document.querySelector(".mg-content")?.textContent).toBe("");
  });
});
