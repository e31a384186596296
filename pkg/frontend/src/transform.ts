/** Zoom/pan mapping between image coordinates and canvas pixels.
 *
 * canvas = image * scale + offset. The transform is the single source
 * of truth for hit-testing and drawing, so both directions live here
 * and must stay exact inverses of each other.
 */

import type { Point } from "./types.js";

export class ViewTransform {
  scale: number;
  offsetX: number;
  offsetY: number;

  constructor(scale = 1, offsetX = 0, offsetY = 0) {
    this.scale = scale;
    this.offsetX = offsetX;
    this.offsetY = offsetY;
  }

  imageToCanvas(p: Point): Point {
    return { x: p.x * this.scale + this.offsetX, y: p.y * this.scale + this.offsetY };
  }

  canvasToImage(p: Point): Point {
    return { x: (p.x - this.offsetX) / this.scale, y: (p.y - this.offsetY) / this.scale };
  }

  /** Zoom by a factor keeping the given canvas point fixed. */
  zoomAt(canvasPoint: Point, factor: number): void {
    const before = this.canvasToImage(canvasPoint);
    this.scale *= factor;
    const after = this.imageToCanvas(before);
    this.offsetX += canvasPoint.x - after.x;
    this.offsetY += canvasPoint.y - after.y;
  }

  panBy(dx: number, dy: number): void {
    this.offsetX += dx;
    this.offsetY += dy;
  }

  /** Fit an image into a viewport with a small margin. */
  static fit(imageW: number, imageH: number, viewW: number, viewH: number): ViewTransform {
    const scale = Math.min(viewW / imageW, viewH / imageH) * 0.95;
    return new ViewTransform(
      scale,
      (viewW - imageW * scale) / 2,
      (viewH - imageH * scale) / 2,
    );
  }
}
