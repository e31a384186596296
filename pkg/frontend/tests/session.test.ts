import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { Session } from "../src/session.js";
import { validateRecord } from "../src/validate.js";
import { FakeService } from "./fake_service.js";

function freshSession(events = {}) {
  const service = new FakeService();
  service.addImage("img01", [96, 72], [
    { vp: [48, -30, 1], score: 120, inliers: [0, 1, 2, 3] },
  ]);
  const api = new ApiClient("", service.fetch);
  return { service, api, load: () => Session.load(api, "img01", [96, 72], events) };
}

describe("five-tap workflow", () => {
  it("walks select_vp -> draw_desired -> draw_original -> review", async () => {
    const { load } = freshSession();
    const s = await load();
    expect(s.mode).toBe("select_vp");

    s.tap({ x: 48, y: -30 });              // 1: the VP
    expect(s.mode).toBe("draw_desired");
    expect(s.draft.targetVp).toEqual([48, -30, 1]);

    s.tap({ x: 12, y: 36 });               // 2, 3: desired outline
    expect(s.mode).toBe("draw_desired");
    s.tap({ x: 70, y: 36 });
    expect(s.mode).toBe("draw_original");

    s.tap({ x: 12, y: 40 });               // 4, 5: original outline
    s.tap({ x: 70, y: 44 });
    expect(s.mode).toBe("review");
    expect(s.draft.pairs).toHaveLength(1);
    expect(s.canSave).toBe(true);
  });

  it("tapping near a candidate marker snaps the VP onto it", async () => {
    const { load } = freshSession();
    const s = await load();
    // 5 image px away at scale 1 => inside the 12 screen px hit radius
    s.tap({ x: 52, y: -27 }, 1);
    expect(s.draft.targetVp).toEqual([48, -30, 1]);
  });

  it("desired endpoints snap onto a guide line to sub-pixel", async () => {
    const { load } = freshSession();
    const s = await load();
    s.tap({ x: 48, y: -30 });
    // the vertical guide through the VP is x = 48; tap 3 px off it
    s.tap({ x: 51, y: 40 }, 1);
    const p = s.pendingTaps[0]!;
    const onGuide = s.vpGuides.some((g) => {
      const t = (p.x - g.origin.x) * g.dir.x + (p.y - g.origin.y) * g.dir.y;
      const fx = g.origin.x + t * g.dir.x;
      const fy = g.origin.y + t * g.dir.y;
      return Math.hypot(p.x - fx, p.y - fy) < 1e-9;
    });
    expect(onGuide).toBe(true);
  });

  it("original endpoints never snap", async () => {
    const { load } = freshSession();
    const s = await load();
    s.tap({ x: 48, y: -30 });
    s.tap({ x: 10, y: 30 });
    s.tap({ x: 60, y: 30 });
    expect(s.mode).toBe("draw_original");
    s.tap({ x: 49, y: 40 }, 1); // 1 px from the vertical guide; must stay put
    expect(s.pendingTaps[2]).toEqual({ x: 49, y: 40 });
  });

  it("rejects coincident taps with a message and keeps state", async () => {
    const messages: string[] = [];
    const { load } = freshSession({ onMessage: (t: string) => messages.push(t) });
    const s = await load();
    s.tap({ x: 48, y: -30 });
    s.tap({ x: 20, y: 30 });
    s.tap({ x: 20, y: 30 }); // identical second tap
    expect(s.mode).toBe("draw_desired");
    expect(s.pendingTaps).toHaveLength(1);
    expect(messages.length).toBeGreaterThan(0);
  });

  it("rejects a pair identical to its correction", async () => {
    const messages: string[] = [];
    const { load } = freshSession({ onMessage: (t: string) => messages.push(t) });
    const s = await load();
    s.tap({ x: 48, y: -30 });
    // zoomed in: desired taps keep their exact coordinates (no snap)
    s.tap({ x: 10, y: 30 }, 1e9);
    s.tap({ x: 60, y: 30 }, 1e9);
    s.tap({ x: 10, y: 30 });
    s.tap({ x: 60, y: 30 }); // original == desired
    expect(s.mode).toBe("draw_original");
    expect(s.draft.pairs).toHaveLength(0);
    expect(messages.some((m) => m.includes("identical"))).toBe(true);
  });
});

describe("undo", () => {
  it("restores the exact previous draft after every action (pushdown)", async () => {
    const { load } = freshSession();
    const s = await load();
    const snapshots: string[] = [];
    const actions: Array<() => void> = [
      () => s.tap({ x: 48, y: -30 }),
      () => s.tap({ x: 12, y: 36 }),
      () => s.tap({ x: 70, y: 36 }),
      () => s.tap({ x: 12, y: 40 }),
      () => s.tap({ x: 70, y: 44 }),
      () => s.addAnotherPair(),
      () => s.tap({ x: 20, y: 60 }),
      () => s.tap({ x: 80, y: 60 }),
    ];
    const stateOf = () =>
      JSON.stringify({ mode: s.mode, draft: s.draft, pending: s.pendingTaps });
    for (const act of actions) {
      snapshots.push(stateOf());
      act();
    }
    for (let i = actions.length - 1; i >= 0; i--) {
      expect(s.undo()).toBe(true);
      expect(stateOf()).toBe(snapshots[i]);
    }
    expect(s.undo()).toBe(false);
  });
});

describe("save and reload", () => {
  it("round-trips every coordinate exactly", async () => {
    const { api, load } = freshSession();
    const s = await load();
    s.tap({ x: 48, y: -30 });
    s.tap({ x: 12.25, y: 36.5 });
    s.tap({ x: 70.125, y: 36.5 });
    s.tap({ x: 12.25, y: 40.0625 });
    s.tap({ x: 70.5, y: 44.75 });
    const stored = await s.save();
    expect(validateRecord(stored)).toEqual([]);
    const reloaded = await Session.load(api, "img01", [96, 72]);
    expect(reloaded.mode).toBe("review");
    expect(reloaded.draft.pairs).toEqual(s.draft.pairs);
    expect(reloaded.draft.targetVp).toEqual(s.draft.targetVp);
  });

  it("saved records always satisfy the record invariants", async () => {
    const { load } = freshSession();
    const s = await load();
    expect(s.canSave).toBe(false); // nothing marked yet
    s.tap({ x: 48, y: -30 });
    expect(s.canSave).toBe(false); // VP alone is not a complete record
    s.tap({ x: 12, y: 36 });
    s.tap({ x: 70, y: 36 });
    s.tap({ x: 12, y: 40 });
    s.tap({ x: 70, y: 44 });
    expect(s.canSave).toBe(true);
    expect(validateRecord(s.buildRecord())).toEqual([]);
  });

  it("a stale second tab gets a Conflict it can resolve either way", async () => {
    const { service, api, load } = freshSession();
    const tab1 = await load();
    tab1.tap({ x: 48, y: -30 });
    tab1.tap({ x: 12, y: 36 });
    tab1.tap({ x: 70, y: 36 });
    tab1.tap({ x: 12, y: 40 });
    tab1.tap({ x: 70, y: 44 });
    await tab1.save();

    const tab2 = await Session.load(api, "img01", [96, 72]);
    tab2.draft.prompt = "tab2 edit";

    tab1.draft.prompt = "tab1 edit";
    await tab1.save(); // bumps updated_at

    await expect(tab2.save()).rejects.toSatisfy(
      (e: unknown) => e instanceof ApiError && e.isConflict,
    );
    // keep-mine: rebase onto the server stamp and save again
    const theirs = service.records.get("img01")!;
    tab2.rebaseOnto(theirs.updated_at ?? null);
    const stored = await tab2.save();
    expect(stored.prompt).toBe("tab2 edit");
  });

  it("reload-theirs adopts the server record and clears dirty", async () => {
    const { api, load } = freshSession();
    const tab1 = await load();
    tab1.tap({ x: 48, y: -30 });
    tab1.tap({ x: 12, y: 36 });
    tab1.tap({ x: 70, y: 36 });
    tab1.tap({ x: 12, y: 40 });
    tab1.tap({ x: 70, y: 44 });
    const stored = await tab1.save();

    const tab2 = await Session.load(api, "img01", [96, 72]);
    tab2.draft.prompt = "doomed edit";
    tab2.dirty = true;
    tab2.adoptServerRecord(stored);
    expect(tab2.dirty).toBe(false);
    expect(tab2.draft.prompt).toBe(stored.prompt);
    expect(tab2.undo()).toBe(true); // the doomed edit is still one undo away
    expect(tab2.draft.prompt).toBe("doomed edit");
  });
});
