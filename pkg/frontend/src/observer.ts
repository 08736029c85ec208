/**
 * Incremental scanning: after the initial pass, one MutationObserver per
 * page watches for changes and only the mutated subtrees are rescanned.
 * The observer count is exposed so tests can assert there is exactly one.
 */

let activeObservers = 0;

export function activeObserverCount(): number {
  return activeObservers;
}

export class PageObserver {
  private observer: MutationObserver | null = null;

  constructor(
    private readonly root: Node,
    private readonly onSubtrees: (roots: Node[]) => void,
  ) {}

  start(): void {
    if (this.observer) return;
    const view = (this.root.ownerDocument ?? (this.root as Document)).defaultView;
    const Observer = view?.MutationObserver ?? MutationObserver;
    this.observer = new Observer((records) => this.handle(records));
    this.observer.observe(this.root, {
      childList: true,
      subtree: true,
      characterData: true,
    });
    activeObservers += 1;
  }

  private handle(records: MutationRecord[]): void {
    const roots: Node[] = [];
    for (const record of records) {
      if (record.type === "characterData") {
        const host = record.target.parentNode;
        if (host) roots.push(host);
        continue;
      }
      for (const added of Array.from(record.addedNodes)) {
        if (added.nodeType === 1) {
          roots.push(added);
        } else if (added.nodeType === 3 && added.parentNode) {
          roots.push(added.parentNode);
        }
      }
    }
    const deduped = dedupeByContainment(roots);
    if (deduped.length > 0) this.onSubtrees(deduped);
  }

  stop(): void {
    if (!this.observer) return;
    this.observer.disconnect();
    this.observer = null;
    activeObservers -= 1;
  }
}

/** Drop nodes already contained in another candidate subtree. */
export function dedupeByContainment(nodes: Node[]): Node[] {
  const unique = [...new Set(nodes)];
  return unique.filter(
    (node) => !unique.some((other) => other !== node && other.contains(node)),
  );
}
