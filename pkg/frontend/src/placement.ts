/**
 * Overlay geometry: the iframe takes the target's rendered box and the
 * target is hidden, never removed, so the page can get it back intact
 * (and the armored content stays in the DOM for the host application to
 * store or transmit).
 */

export type OverlayKind = "read" | "compose";

export interface OverlayPlacement {
  target: Element;
  kind: OverlayKind;
  rect: { x: number; y: number; width: number; height: number };
}

const MIN_READ_HEIGHT = 48;
const MIN_COMPOSE_HEIGHT = 120;

export function measure(target: Element, kind: OverlayKind): OverlayPlacement {
  const box = target.getBoundingClientRect();
  const minHeight = kind === "read" ? MIN_READ_HEIGHT : MIN_COMPOSE_HEIGHT;
  return {
    target,
    kind,
    rect: {
      x: box.x,
      y: box.y,
      width: Math.max(box.width, 200),
      height: Math.max(box.height, minHeight),
    },
  };
}

interface Occluded {
  previousDisplay: string;
}

const occluded = new WeakMap<Element, Occluded>();

/** Hide the target in place; returns false if it was already hidden by us. */
export function occlude(target: Element): boolean {
  if (occluded.has(target)) return false;
  const style = (target as HTMLElement).style;
  occluded.set(target, { previousDisplay: style.display });
  style.display = "none";
  return true;
}

export function restore(target: Element): void {
  const saved = occluded.get(target);
  if (saved === undefined) return;
  (target as HTMLElement).style.display = saved.previousDisplay;
  occluded.delete(target);
}

export function isOccluded(target: Element): boolean {
  return occluded.has(target);
}

/** Size and place an overlay iframe over the measured box. */
export function applyGeometry(iframe: HTMLIFrameElement, placement: OverlayPlacement): void {
  iframe.style.width = `${placement.rect.width}px`;
  iframe.style.height = `${placement.rect.height}px`;
  iframe.style.border = "0";
  iframe.style.display = "block";
}
