/**
 * Page entry point for the injected frontend (content script or
 * bookmarklet).  Figures out the agent origin, picks a controller for
 * the current URL, runs the initial scan, then watches mutations and
 * rescans only what changed.  On bench fixture pages it also reports
 * timing to the agent.
 */
import { AgentClient } from "./agent-client";
import { BenchReporter, browserLabel, detectBenchPage, runBench } from "./bench";
import { ControllerBase, pickController } from "./controller";
import { PageObserver } from "./observer";

// replaced when the agent serves this file; overridden by currentScript
const DEFAULT_ORIGIN = "__AGENT_ORIGIN__";

export function resolveAgentOrigin(doc: Document): string {
  const script = doc.currentScript as HTMLScriptElement | null;
  if (script?.src) {
    try {
      return new URL(script.src).origin;
    } catch {
      // fall through to globals
    }
  }
  const injected = (doc.defaultView as (Window & { __MG_AGENT_ORIGIN?: string }) | null)
    ?.__MG_AGENT_ORIGIN;
  return injected ?? DEFAULT_ORIGIN;
}

export interface FrontendHandle {
  controller: ControllerBase;
  observer: PageObserver;
  benchDone: Promise<boolean> | null;
  stop: () => void;
}

export function startFrontend(doc: Document, agentOrigin: string): FrontendHandle {
  const view = doc.defaultView as (Window & { __mgFrontend?: FrontendHandle }) | null;
  if (view?.__mgFrontend) return view.__mgFrontend; // second injection is a no-op

  const controller = pickController(view?.location?.href ?? "", agentOrigin);
  const perf = view?.performance ?? performance;

  const scanStart = perf.now();
  controller.scan(doc.body ?? doc);
  const initialScanMs = perf.now() - scanStart;

  const observer = new PageObserver(doc.body ?? doc, (roots) => {
    for (const root of roots) {
      controller.scan(root as ParentNode & Node);
    }
  });
  observer.start();

  let benchDone: Promise<boolean> | null = null;
  const benchContext = detectBenchPage(doc);
  if (benchContext) {
    const reporter = new BenchReporter(
      new AgentClient(agentOrigin),
      safeStorage(view),
      browserLabel(view?.navigator?.userAgent ?? ""),
    );
    benchDone = runBench(benchContext, controller, doc, reporter, initialScanMs);
  }

  const handle: FrontendHandle = {
    controller,
    observer,
    benchDone,
    stop: () => {
      observer.stop();
      if (view?.__mgFrontend === handle) delete view.__mgFrontend;
    },
  };
  if (view) view.__mgFrontend = handle;
  return handle;
}

function safeStorage(view: Window | null): Storage | null {
  try {
    return view?.localStorage ?? null;
  } catch {
    return null;
  }
}

/* c8 ignore start: browser-only autostart */
declare const __MG_BUNDLE__: boolean | undefined;
if (typeof __MG_BUNDLE__ !== "undefined" && __MG_BUNDLE__ && typeof document !== "undefined") {
  const origin = resolveAgentOrigin(document);
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", () => startFrontend(document, origin));
  } else {
    startFrontend(document, origin);
  }
}
/* c8 ignore stop */
