import { describe, expect, it } from "vitest";

import { distanceToGuide, GUIDE_COUNT, projectOntoGuide, radialGuides, snapToGuides } from "../src/guides.js";

describe("radial guides", () => {
  it("produces 12 lines all passing through the VP", () => {
    const vp = { x: 321.5, y: -87.25 };
    const guides = radialGuides(vp);
    expect(guides).toHaveLength(GUIDE_COUNT);
    for (const g of guides) {
      // the VP itself is at distance 0 from every guide line
      expect(distanceToGuide(vp, g)).toBeLessThan(0.5);
      expect(Math.hypot(g.dir.x, g.dir.y)).toBeCloseTo(1, 12);
    }
  });

  it("covers the half-circle of undirected directions", () => {
    const guides = radialGuides({ x: 0, y: 0 });
    const angles = guides.map((g) => Math.atan2(g.dir.y, g.dir.x));
    for (let i = 1; i < angles.length; i++) {
      expect(angles[i]! - angles[i - 1]!).toBeCloseTo(Math.PI / GUIDE_COUNT, 12);
    }
  });
});

describe("snapping", () => {
  it("snapped points land on the guide line to sub-pixel accuracy", () => {
    const vp = { x: 100, y: 50 };
    const guides = radialGuides(vp);
    // a point 3 px off the horizontal guide
    const p = { x: 220, y: 53 };
    const snapped = snapToGuides(p, guides, 8);
    const dists = guides.map((g) => distanceToGuide(snapped, g));
    expect(Math.min(...dists)).toBeLessThan(1e-9);
    // snapping moved the point by at most the tolerance
    expect(Math.hypot(snapped.x - p.x, snapped.y - p.y)).toBeLessThanOrEqual(8);
  });

  it("leaves far points unchanged", () => {
    const guides = radialGuides({ x: 0, y: 0 });
    // equidistant-ish from the 0 and 15 degree guides, well beyond tolerance
    const p = { x: 200, y: Math.tan(Math.PI / GUIDE_COUNT / 2) * 200 };
    const snapped = snapToGuides(p, guides, 3);
    expect(snapped).toEqual(p);
  });

  it("projection is idempotent", () => {
    const guides = radialGuides({ x: 10, y: 20 });
    const g = guides[5]!;
    const p = { x: -40, y: 90 };
    const once = projectOntoGuide(p, g);
    const twice = projectOntoGuide(once, g);
    expect(Math.hypot(once.x - twice.x, once.y - twice.y)).toBeLessThan(1e-12);
  });
});
