/** Canvas rendering and DOM wiring. Pure logic lives in session.ts,
 * transform.ts, and guides.ts; this layer only draws and routes events. */

import { ApiClient, ApiError } from "./api.js";
import { Session } from "./session.js";
import { ViewTransform } from "./transform.js";
import type { ImageEntry, Point } from "./types.js";

const MODE_LABEL: Record<string, string> = {
  select_vp: "tap the target vanishing point (or a suggested marker)",
  draw_desired: "tap the two endpoints of the CORRECT outline (snaps to guides)",
  draw_original: "tap the two endpoints of the ORIGINAL misaligned outline",
  review: "review: save, export, or add another correction",
};

export class App {
  private api: ApiClient;
  private canvas: HTMLCanvasElement;
  private ctx: CanvasRenderingContext2D;
  private view = new ViewTransform();
  private session: Session | null = null;
  private image: HTMLImageElement | null = null;
  private maskImage: HTMLImageElement | null = null;
  private maskRefreshTimer: number | null = null;
  private images: ImageEntry[] = [];
  private panning = false;
  private lastPointer: Point = { x: 0, y: 0 };
  private moved = false;

  constructor(api: ApiClient, root: Document = document) {
    this.api = api;
    this.canvas = root.getElementById("canvas") as HTMLCanvasElement;
    this.ctx = this.canvas.getContext("2d")!;
    this.bindToolbar(root);
    this.bindCanvas();
  }

  async start(): Promise<void> {
    this.images = await this.api.listImages();
    const select = document.getElementById("image-select") as HTMLSelectElement;
    select.innerHTML = "";
    for (const entry of this.images) {
      const opt = document.createElement("option");
      opt.value = entry.image_id;
      opt.textContent = `${entry.image_id}${entry.annotated ? " (annotated)" : ""}`;
      select.appendChild(opt);
    }
    if (this.images.length > 0) {
      await this.openImage(this.images[0]!.image_id);
    } else {
      this.setStatus("no images in the store");
    }
  }

  private setStatus(text: string): void {
    const el = document.getElementById("status");
    if (el) {
      el.textContent = text;
    }
  }

  private modeBanner(): void {
    if (this.session) {
      this.setStatus(MODE_LABEL[this.session.mode] ?? this.session.mode);
    }
  }

  async openImage(imageId: string): Promise<void> {
    const entry = this.images.find((e) => e.image_id === imageId);
    if (!entry) {
      return;
    }
    try {
      this.session = await Session.load(this.api, imageId, entry.size, {
        onMaskRefresh: () => this.scheduleMaskRefresh(),
        onMessage: (text) => this.setStatus(text),
      });
    } catch (e) {
      this.setStatus(`service error: ${(e as Error).message}; retry by re-selecting the image`);
      return;
    }
    this.image = await this.loadImageElement(this.api.imageUrl(imageId));
    this.maskImage = null;
    this.view = ViewTransform.fit(entry.size[0], entry.size[1], this.canvas.width, this.canvas.height);
    if (this.session.mode === "review") {
      this.scheduleMaskRefresh();
    }
    this.modeBanner();
    this.render();
  }

  private loadImageElement(url: string): Promise<HTMLImageElement> {
    return new Promise((resolve, reject) => {
      const img = new Image();
      img.onload = () => resolve(img);
      img.onerror = () => reject(new Error(`failed to load ${url}`));
      img.src = url;
    });
  }

  /** Debounced: save the draft, then refetch the mask preview. */
  private scheduleMaskRefresh(): void {
    if (this.maskRefreshTimer !== null) {
      window.clearTimeout(this.maskRefreshTimer);
    }
    this.maskRefreshTimer = window.setTimeout(() => {
      void this.refreshMask();
    }, 300);
  }

  private async refreshMask(): Promise<void> {
    const s = this.session;
    if (!s || !s.canSave) {
      return;
    }
    try {
      await s.save();
      this.maskImage = await this.loadImageElement(
        `${this.api.maskUrl(s.imageId)}?t=${Date.now()}`,
      );
      this.render();
    } catch (e) {
      if (e instanceof ApiError && e.isConflict) {
        await this.handleConflict();
      } else {
        this.setStatus(`mask preview failed: ${(e as Error).message}`);
      }
    }
  }

  private async handleConflict(): Promise<void> {
    const s = this.session!;
    const theirs = await this.api.getAnnotation(s.imageId);
    const keepMine = window.confirm(
      "someone else saved this annotation. OK = keep my edits, Cancel = load theirs",
    );
    if (keepMine) {
      s.rebaseOnto(theirs?.updated_at ?? null);
      await s.save();
    } else if (theirs) {
      s.adoptServerRecord(theirs);
    }
    this.render();
  }

  private bindToolbar(root: Document): void {
    (root.getElementById("image-select") as HTMLSelectElement).addEventListener("change", (ev) => {
      void this.openImage((ev.target as HTMLSelectElement).value);
    });
    root.getElementById("btn-save")?.addEventListener("click", () => {
      void this.refreshMask();
    });
    root.getElementById("btn-undo")?.addEventListener("click", () => {
      this.session?.undo();
      this.modeBanner();
      this.render();
    });
    root.getElementById("btn-add-pair")?.addEventListener("click", () => {
      this.session?.addAnotherPair();
      this.modeBanner();
      this.render();
    });
    root.getElementById("btn-export")?.addEventListener("click", () => {
      void this.exportAll();
    });
    root.addEventListener("keydown", (ev) => {
      const kev = ev as KeyboardEvent;
      if (kev.key === "u") {
        this.session?.undo();
        this.modeBanner();
        this.render();
      } else if (kev.key === "a") {
        this.session?.addAnotherPair();
        this.modeBanner();
        this.render();
      }
    });
  }

  private async exportAll(): Promise<void> {
    const annotated = this.images.filter((e) => e.annotated).map((e) => e.image_id);
    if (this.session && !this.session.dirty && !annotated.includes(this.session.imageId)) {
      annotated.push(this.session.imageId);
    }
    if (annotated.length === 0) {
      this.setStatus("nothing annotated yet");
      return;
    }
    try {
      const manifest = await this.api.exportDataset("annotator-export", annotated);
      this.setStatus(`exported ${manifest.images.length} images as '${manifest.name}'`);
    } catch (e) {
      this.setStatus(`export failed: ${(e as Error).message}`);
    }
  }

  private canvasPoint(ev: MouseEvent): Point {
    const rect = this.canvas.getBoundingClientRect();
    return { x: ev.clientX - rect.left, y: ev.clientY - rect.top };
  }

  private bindCanvas(): void {
    this.canvas.addEventListener("pointerdown", (ev) => {
      this.panning = true;
      this.moved = false;
      this.lastPointer = this.canvasPoint(ev);
    });
    this.canvas.addEventListener("pointermove", (ev) => {
      if (!this.panning) {
        return;
      }
      const p = this.canvasPoint(ev);
      const dx = p.x - this.lastPointer.x;
      const dy = p.y - this.lastPointer.y;
      if (Math.hypot(dx, dy) > 3) {
        this.moved = true;
      }
      if (this.moved) {
        this.view.panBy(dx, dy);
        this.lastPointer = p;
        this.render();
      }
    });
    this.canvas.addEventListener("pointerup", (ev) => {
      this.panning = false;
      if (this.moved || !this.session) {
        return;
      }
      const imagePt = this.view.canvasToImage(this.canvasPoint(ev));
      this.session.tap(imagePt, this.view.scale);
      this.modeBanner();
      this.render();
    });
    this.canvas.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      const factor = ev.deltaY < 0 ? 1.15 : 1 / 1.15;
      this.view.zoomAt(this.canvasPoint(ev), factor);
      this.render();
    });
  }

  render(): void {
    const ctx = this.ctx;
    ctx.setTransform(1, 0, 0, 1, 0, 0);
    ctx.fillStyle = "#14161a";
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
    const s = this.session;
    if (!s || !this.image) {
      return;
    }
    const v = this.view;
    ctx.setTransform(v.scale, 0, 0, v.scale, v.offsetX, v.offsetY);
    ctx.drawImage(this.image, 0, 0);
    if (this.maskImage) {
      ctx.globalAlpha = 0.35;
      ctx.drawImage(this.maskImage, 0, 0);
      ctx.globalAlpha = 1.0;
    }
    const px = 1 / v.scale; // one screen pixel in image units

    // guide lines through the VP
    for (const g of s.vpGuides) {
      ctx.strokeStyle = "rgba(120, 200, 255, 0.35)";
      ctx.lineWidth = px;
      const span = 4000;
      ctx.beginPath();
      ctx.moveTo(g.origin.x - g.dir.x * span, g.origin.y - g.dir.y * span);
      ctx.lineTo(g.origin.x + g.dir.x * span, g.origin.y + g.dir.y * span);
      ctx.stroke();
    }

    // candidate markers
    for (const c of s.candidates) {
      const [x, y, w] = c.vp;
      if (Math.abs(w) < 1e-9) {
        continue;
      }
      ctx.strokeStyle = "rgba(255, 210, 80, 0.9)";
      ctx.lineWidth = 2 * px;
      ctx.beginPath();
      ctx.arc(x / w, y / w, 6 * px, 0, Math.PI * 2);
      ctx.stroke();
    }

    // the chosen VP
    if (s.draft.targetVp) {
      const [x, y, w] = s.draft.targetVp;
      if (w !== 0) {
        ctx.fillStyle = "#4dd2ff";
        ctx.beginPath();
        ctx.arc(x / w, y / w, 5 * px, 0, Math.PI * 2);
        ctx.fill();
      }
    }

    // committed pairs: desired in green, original in red
    for (const pair of s.draft.pairs) {
      ctx.strokeStyle = "#ff5a5a";
      ctx.lineWidth = 2 * px;
      ctx.beginPath();
      ctx.moveTo(pair.original.p0[0], pair.original.p0[1]);
      ctx.lineTo(pair.original.p1[0], pair.original.p1[1]);
      ctx.stroke();
      ctx.strokeStyle = "#53e079";
      ctx.beginPath();
      ctx.moveTo(pair.desired.p0[0], pair.desired.p0[1]);
      ctx.lineTo(pair.desired.p1[0], pair.desired.p1[1]);
      ctx.stroke();
    }

    // in-progress taps
    ctx.fillStyle = "#ffffff";
    for (const p of s.pendingTaps) {
      ctx.beginPath();
      ctx.arc(p.x, p.y, 3 * px, 0, Math.PI * 2);
      ctx.fill();
    }
  }
}
