/** Zoom/pan mapping between image coordinates and canvas pixels.
 *
 * canvas = image * scale + offset. The transform is the single source
 * of truth for hit-testing and drawing, so both directions live here
 * and must stay exact inverses of each other.
 */
export class ViewTransform {
    scale;
    offsetX;
    offsetY;
    constructor(scale = 1, offsetX = 0, offsetY = 0) {
        this.scale = scale;
        this.offsetX = offsetX;
        this.offsetY = offsetY;
    }
    imageToCanvas(p) {
        return { x: p.x * this.scale + this.offsetX, y: p.y * this.scale + this.offsetY };
    }
    canvasToImage(p) {
        return { x: (p.x - this.offsetX) / this.scale, y: (p.y - this.offsetY) / this.scale };
    }
    /** Zoom by a factor keeping the given canvas point fixed. */
    zoomAt(canvasPoint, factor) {
        const before = this.canvasToImage(canvasPoint);
        this.scale *= factor;
        const after = this.imageToCanvas(before);
        this.offsetX += canvasPoint.x - after.x;
        this.offsetY += canvasPoint.y - after.y;
    }
    panBy(dx, dy) {
        this.offsetX += dx;
        this.offsetY += dy;
    }
    /** Fit an image into a viewport with a small margin. */
    static fit(imageW, imageH, viewW, viewH) {
        const scale = Math.min(viewW / imageW, viewH / imageH) * 0.95;
        return new ViewTransform(scale, (viewW - imageW * scale) / 2, (viewH - imageH * scale) / 2);
    }
}
