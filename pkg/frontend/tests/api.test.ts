import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { FakeService } from "./fake_service.js";
import type { AnnotationRecord } from "../src/types.js";

function record(): AnnotationRecord {
  return {
    schema_version: 1,
    image_id: "img01",
    image_size: [96, 72],
    target_vp: [48, -30, 1],
    pairs: [
      { original: { p0: [12, 40], p1: [70, 44] }, desired: { p0: [12, 36], p1: [70, 36] } },
    ],
    dilation_px: 3,
    prompt: "",
  };
}

describe("ApiClient", () => {
  it("lists images with annotated flags", async () => {
    const service = new FakeService();
    service.addImage("a", [10, 10]);
    service.addImage("b", [20, 20]);
    const api = new ApiClient("", service.fetch);
    let entries = await api.listImages();
    expect(entries.map((e) => e.annotated)).toEqual([false, false]);
    await api.putAnnotation("a", { ...record(), image_id: "a", image_size: [10, 10] });
    entries = await api.listImages();
    expect(entries.find((e) => e.image_id === "a")?.annotated).toBe(true);
  });

  it("maps service errors onto ApiError with code and details", async () => {
    const service = new FakeService();
    service.addImage("img01", [96, 72]);
    const api = new ApiClient("", service.fetch);
    const bad = { ...record(), pairs: [] };
    const err = await api.putAnnotation("img01", bad).catch((e) => e as ApiError);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(400);
    expect((err as ApiError).code).toBe("validation_failed");
    expect((err as ApiError).details.length).toBeGreaterThan(0);
  });

  it("missing annotation reads as null, missing image as 404", async () => {
    const service = new FakeService();
    service.addImage("img01", [96, 72]);
    const api = new ApiClient("", service.fetch);
    expect(await api.getAnnotation("img01")).toBeNull();
    const err = await api.vpCandidates("ghost").catch((e) => e as ApiError);
    expect((err as ApiError).status).toBe(404);
  });

  it("sends the optimistic-concurrency header only when given", async () => {
    const service = new FakeService();
    service.addImage("img01", [96, 72]);
    const api = new ApiClient("", service.fetch);
    const first = await api.putAnnotation("img01", record());
    // second write with the fresh stamp succeeds
    const second = await api.putAnnotation("img01", record(), first.updated_at);
    expect(second.updated_at).not.toBe(first.updated_at);
    // stale stamp conflicts
    const err = await api
      .putAnnotation("img01", record(), first.updated_at)
      .catch((e) => e as ApiError);
    expect((err as ApiError).isConflict).toBe(true);
  });

  it("export surfaces incomplete annotations with offender details", async () => {
    const service = new FakeService();
    service.addImage("img01", [96, 72]);
    service.addImage("img02", [96, 72]);
    const api = new ApiClient("", service.fetch);
    await api.putAnnotation("img01", record());
    const err = await api
      .exportDataset("set", ["img01", "img02"])
      .catch((e) => e as ApiError);
    expect((err as ApiError).code).toBe("incomplete_annotation");
    expect((err as ApiError).details).toContainEqual({ image_id: "img02" });
    const manifest = await api.exportDataset("set", ["img01"]);
    expect(manifest.images).toHaveLength(1);
    expect(manifest.images[0]!.depth_file).toBeNull();
  });
});
