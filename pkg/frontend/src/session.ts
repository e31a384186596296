/** The annotation session state machine.
 *
 * Five taps correct one region: (1) pick the VP (free tap or candidate
 * marker), (2)+(3) the endpoints of the desired outline, which snap
 * onto the VP guide lines, (4)+(5) the endpoints of the original
 * misaligned outline, never snapped. Completed pairs land in the draft;
 * review mode shows the mask preview and allows saving or adding more
 * pairs. Every mutation pushes an undo snapshot.
 */

import { ApiClient, ApiError } from "./api.js";
import { Guide, radialGuides, snapToGuides } from "./guides.js";
import type { AnnotationRecord, PairJson, Point, VpCandidate } from "./types.js";
import { validateRecord, FieldError } from "./validate.js";

export type Mode = "select_vp" | "draw_desired" | "draw_original" | "review";

export const SNAP_TOLERANCE_SCREEN_PX = 8;
export const CANDIDATE_HIT_SCREEN_PX = 12;

export interface Draft {
  targetVp: [number, number, number] | null;
  pairs: PairJson[];
  dilationPx: number;
  prompt: string;
}

function cloneDraft(d: Draft): Draft {
  return JSON.parse(JSON.stringify(d)) as Draft;
}

export interface SessionEvents {
  onMaskRefresh?: (imageId: string) => void;
  onMessage?: (text: string) => void;
}

export class Session {
  readonly imageId: string;
  readonly imageSize: [number, number];
  mode: Mode = "select_vp";
  draft: Draft;
  dirty = false;
  candidates: VpCandidate[] = [];
  baseUpdatedAt: string | null = null;
  pendingTaps: Point[] = [];
  private undoStack: Array<{ mode: Mode; draft: Draft; pending: Point[] }> = [];
  private api: ApiClient;
  private events: SessionEvents;

  constructor(
    api: ApiClient,
    imageId: string,
    imageSize: [number, number],
    events: SessionEvents = {},
  ) {
    this.api = api;
    this.imageId = imageId;
    this.imageSize = imageSize;
    this.events = events;
    this.draft = { targetVp: null, pairs: [], dilationPx: 5, prompt: "" };
  }

  /** Fetch existing annotation and VP candidates; annotated images open in review. */
  static async load(
    api: ApiClient,
    imageId: string,
    imageSize: [number, number],
    events: SessionEvents = {},
  ): Promise<Session> {
    const s = new Session(api, imageId, imageSize, events);
    const [existing, cands] = await Promise.all([
      api.getAnnotation(imageId),
      api.vpCandidates(imageId),
    ]);
    s.candidates = cands.candidates;
    if (existing) {
      s.draft = {
        targetVp: existing.target_vp,
        pairs: existing.pairs,
        dilationPx: existing.dilation_px,
        prompt: existing.prompt,
      };
      s.baseUpdatedAt = existing.updated_at ?? null;
      s.mode = "review";
    }
    return s;
  }

  get vpGuides(): Guide[] {
    if (!this.draft.targetVp) {
      return [];
    }
    const [x, y, w] = this.draft.targetVp;
    if (w === 0) {
      return [];
    }
    return radialGuides({ x: x / w, y: y / w });
  }

  private snapshot(): void {
    this.undoStack.push({
      mode: this.mode,
      draft: cloneDraft(this.draft),
      pending: this.pendingTaps.map((p) => ({ ...p })),
    });
  }

  /** Restore the exact previous state; returns false when nothing to undo. */
  undo(): boolean {
    const prev = this.undoStack.pop();
    if (!prev) {
      return false;
    }
    this.mode = prev.mode;
    this.draft = prev.draft;
    this.pendingTaps = prev.pending;
    this.dirty = true;
    return true;
  }

  /** Candidate marker within hit range of an image-space tap, if any. */
  candidateNear(p: Point, scale: number): VpCandidate | null {
    let best: { c: VpCandidate; d: number } | null = null;
    for (const c of this.candidates) {
      const [x, y, w] = c.vp;
      if (Math.abs(w) < 1e-9) {
        continue; // at-infinity candidates have no pixel position to tap
      }
      const d = Math.hypot(x / w - p.x, y / w - p.y) * scale;
      if (d <= CANDIDATE_HIT_SCREEN_PX && (best === null || d < best.d)) {
        best = { c, d };
      }
    }
    return best ? best.c : null;
  }

  /**
   * Handle one tap in image coordinates. `scale` is the current
   * canvas-pixels-per-image-pixel zoom, used to express snap tolerances
   * in screen pixels.
   */
  tap(p: Point, scale = 1): void {
    switch (this.mode) {
      case "select_vp":
      case "review":
        this.selectVp(p, scale);
        return;
      case "draw_desired":
        this.addDesiredTap(p, scale);
        return;
      case "draw_original":
        this.addOriginalTap(p);
        return;
    }
  }

  /** Set the target VP from a tap or a candidate marker hit. */
  selectVp(p: Point, scale = 1): void {
    this.snapshot();
    const hit = this.candidateNear(p, scale);
    if (hit) {
      const [x, y, w] = hit.vp;
      this.draft.targetVp = [x / w, y / w, 1];
    } else {
      this.draft.targetVp = [p.x, p.y, 1];
    }
    this.dirty = true;
    this.mode = "draw_desired";
    this.pendingTaps = [];
  }

  private addDesiredTap(p: Point, scale: number): void {
    const snapped = snapToGuides(p, this.vpGuides, SNAP_TOLERANCE_SCREEN_PX / scale);
    if (this.pendingTaps.length === 0) {
      this.snapshot();
      this.pendingTaps.push(snapped);
      return;
    }
    const first = this.pendingTaps[0]!;
    if (Math.hypot(first.x - snapped.x, first.y - snapped.y) < 1e-9) {
      this.events.onMessage?.("desired outline endpoints coincide; tap a different point");
      return;
    }
    this.snapshot();
    this.pendingTaps.push(snapped);
    this.mode = "draw_original";
  }

  private addOriginalTap(p: Point): void {
    if (this.pendingTaps.length === 2) {
      this.snapshot();
      this.pendingTaps.push(p);
      return;
    }
    const third = this.pendingTaps[2]!;
    if (Math.hypot(third.x - p.x, third.y - p.y) < 1e-9) {
      this.events.onMessage?.("original outline endpoints coincide; tap a different point");
      return;
    }
    const [d0, d1, o0] = this.pendingTaps as [Point, Point, Point];
    const pair: PairJson = {
      desired: { p0: [d0.x, d0.y], p1: [d1.x, d1.y] },
      original: { p0: [o0.x, o0.y], p1: [p.x, p.y] },
    };
    const probe = this.buildRecord([...this.draft.pairs, pair]);
    const pairErrors = validateRecord(probe).filter((e) =>
      e.field.startsWith(`pairs[${this.draft.pairs.length}]`),
    );
    if (pairErrors.length > 0) {
      this.events.onMessage?.(pairErrors[0]!.message);
      return;
    }
    this.snapshot();
    this.draft.pairs.push(pair);
    this.pendingTaps = [];
    this.dirty = true;
    this.mode = "review";
    this.events.onMaskRefresh?.(this.imageId);
  }

  /** Start marking another correction pair from review. */
  addAnotherPair(): void {
    if (!this.draft.targetVp) {
      return;
    }
    this.snapshot();
    this.mode = "draw_desired";
    this.pendingTaps = [];
  }

  removePair(index: number): void {
    if (index < 0 || index >= this.draft.pairs.length) {
      return;
    }
    this.snapshot();
    this.draft.pairs.splice(index, 1);
    this.dirty = true;
    this.events.onMaskRefresh?.(this.imageId);
  }

  buildRecord(pairs?: PairJson[]): AnnotationRecord {
    return {
      schema_version: 1,
      image_id: this.imageId,
      image_size: this.imageSize,
      target_vp: this.draft.targetVp ?? [0, 0, 1],
      pairs: pairs ?? this.draft.pairs,
      dilation_px: this.draft.dilationPx,
      prompt: this.draft.prompt,
    };
  }

  validationErrors(): FieldError[] {
    const errors = validateRecord(this.buildRecord());
    if (!this.draft.targetVp) {
      errors.push({ field: "target_vp", message: "pick a vanishing point first" });
    }
    return errors;
  }

  get canSave(): boolean {
    return this.validationErrors().length === 0;
  }

  /**
   * PUT the draft with the optimistic-concurrency stamp. On conflict the
   * caller decides (reload-theirs / keep-mine); this just surfaces it.
   */
  async save(): Promise<AnnotationRecord> {
    const errors = this.validationErrors();
    if (errors.length > 0) {
      throw new ApiError(0, "invalid_draft", errors.map((e) => `${e.field}: ${e.message}`).join("; "));
    }
    const stored = await this.api.putAnnotation(
      this.imageId,
      this.buildRecord(),
      this.baseUpdatedAt,
    );
    this.baseUpdatedAt = stored.updated_at ?? null;
    this.dirty = false;
    this.mode = "review";
    return stored;
  }

  /** Overwrite the draft with the server's record (conflict: reload-theirs). */
  adoptServerRecord(record: AnnotationRecord): void {
    this.snapshot();
    this.draft = {
      targetVp: record.target_vp,
      pairs: record.pairs,
      dilationPx: record.dilation_px,
      prompt: record.prompt,
    };
    this.baseUpdatedAt = record.updated_at ?? null;
    this.dirty = false;
    this.mode = "review";
  }

  /** Conflict resolution: keep-mine rebases onto the server stamp. */
  rebaseOnto(updatedAt: string | null): void {
    this.baseUpdatedAt = updatedAt;
  }
}
