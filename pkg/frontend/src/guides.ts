/** Radial guide lines through the vanishing point, and endpoint snapping.
 *
 * After the VP is picked, 12 undirected lines fan out from it. Desired
 * outline endpoints snap onto the nearest guide when they land within a
 * screen-space tolerance, which is how corrected outlines end up
 * converging exactly at the VP.
 */

import type { Point } from "./types.js";

export const GUIDE_COUNT = 12;

export interface Guide {
  /** a point on the line (the VP itself) */
  origin: Point;
  /** unit direction of the line */
  dir: Point;
}

export function radialGuides(vp: Point, count: number = GUIDE_COUNT): Guide[] {
  const guides: Guide[] = [];
  for (let i = 0; i < count; i++) {
    const ang = (Math.PI * i) / count; // undirected lines cover [0, pi)
    guides.push({ origin: { x: vp.x, y: vp.y }, dir: { x: Math.cos(ang), y: Math.sin(ang) } });
  }
  return guides;
}

/** Perpendicular foot of p on the guide's infinite line. */
export function projectOntoGuide(p: Point, g: Guide): Point {
  const t = (p.x - g.origin.x) * g.dir.x + (p.y - g.origin.y) * g.dir.y;
  return { x: g.origin.x + t * g.dir.x, y: g.origin.y + t * g.dir.y };
}

export function distanceToGuide(p: Point, g: Guide): number {
  const foot = projectOntoGuide(p, g);
  return Math.hypot(p.x - foot.x, p.y - foot.y);
}

/**
 * Snap an image-space point onto the nearest guide when it lies within
 * toleranceImagePx of it; otherwise return the point unchanged.
 */
export function snapToGuides(p: Point, guides: Guide[], toleranceImagePx: number): Point {
  let best: { d: number; foot: Point } | null = null;
  for (const g of guides) {
    const foot = projectOntoGuide(p, g);
    const d = Math.hypot(p.x - foot.x, p.y - foot.y);
    if (best === null || d < best.d) {
      best = { d, foot };
    }
  }
  if (best !== null && best.d <= toleranceImagePx) {
    return best.foot;
  }
  return p;
}
