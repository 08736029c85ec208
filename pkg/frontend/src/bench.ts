/**
 * Benchmark instrumentation, active only on fixture pages that declare
 * themselves with <meta name="mg-bench" content="stage=N;n=M">.
 *
 * Stage 1 measures overlaying content present at load; stage 2 measures
 * content inserted after load (from the fixture's `bench-dynamic-insert`
 * performance mark to the moment every expected overlay exists).  One
 * record per run goes to the agent's bench intake; if the agent is down
 * the record is buffered in localStorage and flushed on the next run.
 */
import { AgentApi } from "./agent-client";
import { ControllerBase } from "./controller";

export interface BenchContext {
  stage: number;
  n: number;
}

const BUFFER_KEY = "mg-bench-buffer";

export function detectBenchPage(doc: Document): BenchContext | null {
  const meta = doc.querySelector('meta[name="mg-bench"]');
  if (!meta) return null;
  const content = meta.getAttribute("content") ?? "";
  const stage = /stage=(\d+)/.exec(content);
  const n = /n=(\d+)/.exec(content);
  if (!stage || !n) return null;
  return { stage: Number(stage[1]), n: Number(n[1]) };
}

export function browserLabel(userAgent: string): string {
  for (const name of ["Firefox", "Edg", "OPR", "Chrome", "Safari"]) {
    const match = new RegExp(`${name}/([\\d.]+)`).exec(userAgent);
    if (match) return `${name}-${match[1].split(".")[0]}`;
  }
  return "unknown-browser";
}

export class BenchReporter {
  constructor(
    private readonly client: AgentApi,
    private readonly storage: Storage | null,
    private readonly label: string,
  ) {}

  async report(record: {
    stage: number;
    n: number;
    total_ms: number;
    per_element_ms: number;
  }): Promise<boolean> {
    const full = { browser_label: this.label, ...record };
    try {
      await this.flushBuffer();
      await this.client.postBench(full);
      return true;
    } catch {
      this.buffer(full);
      return false;
    }
  }

  private buffer(record: object): void {
    if (!this.storage) return;
    const existing = this.storage.getItem(BUFFER_KEY);
    const items = existing ? (JSON.parse(existing) as object[]) : [];
    items.push(record);
    this.storage.setItem(BUFFER_KEY, JSON.stringify(items));
  }

  async flushBuffer(): Promise<void> {
    if (!this.storage) return;
    const existing = this.storage.getItem(BUFFER_KEY);
    if (!existing) return;
    const items = JSON.parse(existing) as Parameters<AgentApi["postBench"]>[0][];
    for (const item of items) {
      await this.client.postBench(item);
    }
    this.storage.removeItem(BUFFER_KEY);
  }
}

/**
 * Wire bench measurement around a controller on a fixture page.
 * Returns a promise resolving once the record for this run is handled
 * (tests await it; production pages fire and forget).
 */
export function runBench(
  context: BenchContext,
  controller: ControllerBase,
  doc: Document,
  reporter: BenchReporter,
  initialScanMs: number,
): Promise<boolean> {
  const perf = doc.defaultView?.performance ?? performance;
  if (context.stage === 1) {
    return reporter.report({
      stage: 1,
      n: context.n,
      total_ms: initialScanMs,
      per_element_ms: initialScanMs / context.n,
    });
  }
  // stage 2: poll until the dynamic batch is fully overlayed
  return new Promise((resolve) => {
    const expected = context.n;
    const check = () => {
      if (controller.handled >= expected) {
        const marks = perf.getEntriesByName?.("bench-dynamic-insert") ?? [];
        const start = marks.length > 0 ? marks[marks.length - 1].startTime : 0;
        const total = perf.now() - start;
        void reporter
          .report({
            stage: 2,
            n: expected,
            total_ms: total,
            per_element_ms: total / expected,
          })
          .then(resolve);
        return;
      }
      setTimeout(check, 25);
    };
    check();
  });
}
