/**
 * First-use hints, one per overlay kind, persisted so they never repeat.
 * Deliberately a stub: a dismissible banner with one sentence.
 */

const COPY: Record<string, string> = {
  read: "This message is encrypted. The dark panel decrypts it for you; the page it sits on never sees the text.",
  compose: "Click the lock button to write inside a protected panel. The page only ever receives the encrypted result.",
};

function storageFor(doc: Document): Storage | null {
  try {
    return doc.defaultView?.localStorage ?? null;
  } catch {
    return null; // storage can be blocked; tutorials just repeat then
  }
}

export function showTutorialOnce(kind: "read" | "compose", doc: Document): boolean {
  const storage = storageFor(doc);
  const key = `mg-tutorial-${kind}`;
  if (storage?.getItem(key)) return false;
  storage?.setItem(key, "shown");

  const banner = doc.createElement("div");
  banner.className = "mg-tutorial";
  banner.setAttribute("data-mg-ui", "1");
  banner.textContent = COPY[kind];
  const dismiss = doc.createElement("button");
  dismiss.type = "button";
  dismiss.setAttribute("data-mg-ui", "1");
  dismiss.textContent = "got it";
  dismiss.addEventListener("click", () => banner.remove());
  banner.appendChild(dismiss);
  doc.body?.appendChild(banner);
  return true;
}

export function resetTutorials(doc: Document): void {
  const storage = storageFor(doc);
  storage?.removeItem("mg-tutorial-read");
  storage?.removeItem("mg-tutorial-compose");
}
