/**
 * Allowlist sanitizer for decrypted message bodies.
 *
 * A hostile correspondent controls the plaintext, so the read overlay
 * never assigns it to innerHTML.  The dirty markup is parsed in an inert
 * document and rebuilt element by element: only harmless formatting tags
 * survive, event-handler attributes never copy over, and nothing that
 * triggers a network load (images, frames, scripts, styles) comes
 * through.  Links keep their href only for http/https/mailto and open in
 * a new tab without a referrer.
 */

const ALLOWED_TAGS = new Set([
  "b", "i", "u", "em", "strong", "p", "br", "ul", "ol", "li", "a", "span",
]);

/** Contents of these are dropped outright rather than unwrapped. */
const DROP_WITH_CONTENT = new Set([
  "script", "style", "template", "iframe", "frame", "object", "embed",
  "svg", "math", "noscript", "head", "title",
]);

const SAFE_LINK_RE = /^(https?:|mailto:)/i;

function cleanNode(node: Node, doc: Document): Node | null {
  if (node.nodeType === 3 /* TEXT_NODE */) {
    return doc.createTextNode(node.nodeValue ?? "");
  }
  if (node.nodeType !== 1 /* ELEMENT_NODE */) {
    return null;
  }
  const element = node as Element;
  const tag = element.tagName.toLowerCase();
  if (DROP_WITH_CONTENT.has(tag)) {
    return null;
  }
  let clean: Element | DocumentFragment;
  if (ALLOWED_TAGS.has(tag)) {
    const cleanElement = doc.createElement(tag);
    if (tag === "a") {
      const href = element.getAttribute("href") ?? "";
      if (SAFE_LINK_RE.test(href.trim())) {
        cleanElement.setAttribute("href", href.trim());
        cleanElement.setAttribute("rel", "noreferrer noopener");
        cleanElement.setAttribute("target", "_blank");
      }
    } else if (tag === "span") {
      const cls = element.getAttribute("class");
      if (cls) cleanElement.setAttribute("class", cls);
    }
    clean = cleanElement;
  } else {
    // unknown container: strip the tag, keep its (sanitized) children
    clean = doc.createDocumentFragment();
  }
  for (const child of Array.from(element.childNodes)) {
    const cleanChild = cleanNode(child, doc);
    if (cleanChild) clean.appendChild(cleanChild);
  }
  return clean;
}

/** Parse untrusted markup and return a safe fragment for `doc`. */
export function sanitizeHtml(dirty: string, doc: Document): DocumentFragment {
  const parsed = new (doc.defaultView?.DOMParser ?? DOMParser)().parseFromString(
    dirty, "text/html",
  );
  const fragment = doc.createDocumentFragment();
  for (const child of Array.from(parsed.body.childNodes)) {
    const clean = cleanNode(child, doc);
    if (clean) fragment.appendChild(clean);
  }
  return fragment;
}
