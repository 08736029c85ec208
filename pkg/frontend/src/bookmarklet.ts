/**
 * Bookmarklet loader: injects the full frontend from the agent origin.
 *
 * Pages with a restrictive Content-Security-Policy may refuse the script
 * or the overlay frames; in that case a small fallback banner offers a
 * link to the standalone compose/read pages on the agent origin, where
 * everything works regardless of the host page's policy.
 */

const AGENT_ORIGIN = "__AGENT_ORIGIN__";

function showCspFallback(reason: string): void {
  const banner = document.createElement("div");
  banner.setAttribute("data-mg-ui", "1");
  banner.setAttribute(
    "style",
    "position:fixed;top:8px;right:8px;z-index:2147483647;background:#1f2430;" +
      "color:#e6e6e6;padding:10px 14px;border-radius:6px;font:13px sans-serif;" +
      "box-shadow:0 2px 12px rgba(0,0,0,.5)",
  );
  const text = document.createElement("span");
  text.textContent = `This page blocks embedded protection (${reason}). `;
  const link = document.createElement("a");
  link.href = `${AGENT_ORIGIN}/overlay/compose.html#standalone`;
  link.target = "_blank";
  link.rel = "noreferrer noopener";
  link.style.color = "#7fd1b9";
  link.textContent = "Open the standalone secure composer";
  banner.appendChild(text);
  banner.appendChild(link);
  document.body.appendChild(banner);
}

(function inject(): void {
  if ((window as Window & { __mgFrontend?: unknown }).__mgFrontend) return;
  (window as Window & { __MG_AGENT_ORIGIN?: string }).__MG_AGENT_ORIGIN = AGENT_ORIGIN;
  const script = document.createElement("script");
  script.src = `${AGENT_ORIGIN}/frontend.js`;
  script.onerror = () => showCspFallback("script-src");
  document.head ? document.head.appendChild(script) : document.body.appendChild(script);
})();
