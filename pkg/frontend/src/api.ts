/** Typed client for the annotation service HTTP API. */

import type {
  AnnotationRecord,
  ApiErrorBody,
  ExportManifest,
  ImageEntry,
  VpCandidate,
} from "./types.js";

export class ApiError extends Error {
  status: number;
  code: string;
  details: unknown[];

  constructor(status: number, code: string, message: string, details: unknown[] = []) {
    super(message);
    this.status = status;
    this.code = code;
    this.details = details;
  }

  get isConflict(): boolean {
    return this.status === 409 && this.code === "conflict";
  }
}

async function raiseFor(res: Response): Promise<never> {
  let code = "http_error";
  let message = `${res.status} ${res.statusText}`;
  let details: unknown[] = [];
  try {
    const body = (await res.json()) as ApiErrorBody;
    if (body && body.error) {
      code = body.error.code;
      message = body.error.message;
      details = body.error.details ?? [];
    }
  } catch {
    // non-JSON error body; keep the HTTP status text
  }
  throw new ApiError(res.status, code, message, details);
}

export class ApiClient {
  base: string;
  fetchFn: typeof fetch;

  constructor(base = "", fetchFn: typeof fetch = fetch) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(`${this.base}${path}`, init);
    if (!res.ok) {
      await raiseFor(res);
    }
    return (await res.json()) as T;
  }

  health(): Promise<{ name: string; version: string }> {
    return this.json("/api/health");
  }

  listImages(): Promise<ImageEntry[]> {
    return this.json("/api/images");
  }

  imageUrl(imageId: string): string {
    return `${this.base}/api/images/${encodeURIComponent(imageId)}/file`;
  }

  maskUrl(imageId: string): string {
    return `${this.base}/api/images/${encodeURIComponent(imageId)}/mask.png`;
  }

  vpCandidates(imageId: string): Promise<{ candidates: VpCandidate[] }> {
    return this.json(`/api/images/${encodeURIComponent(imageId)}/vp-candidates`);
  }

  async getAnnotation(imageId: string): Promise<AnnotationRecord | null> {
    try {
      return await this.json<AnnotationRecord>(
        `/api/images/${encodeURIComponent(imageId)}/annotation`,
      );
    } catch (e) {
      if (e instanceof ApiError && e.status === 404) {
        return null;
      }
      throw e;
    }
  }

  /**
   * Full-record replacement. Pass the updated_at stamp the edit was
   * based on; the service answers 409 when someone else saved since.
   */
  putAnnotation(
    imageId: string,
    record: AnnotationRecord,
    expectedUpdatedAt?: string | null,
  ): Promise<AnnotationRecord> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (expectedUpdatedAt) {
      headers["X-Expected-Updated-At"] = expectedUpdatedAt;
    }
    return this.json(`/api/images/${encodeURIComponent(imageId)}/annotation`, {
      method: "PUT",
      headers,
      body: JSON.stringify(record),
    });
  }

  async fetchMaskPng(imageId: string): Promise<Uint8Array> {
    const res = await this.fetchFn(`${this.base}/api/images/${encodeURIComponent(imageId)}/mask.png`);
    if (!res.ok) {
      await raiseFor(res);
    }
    return new Uint8Array(await res.arrayBuffer());
  }

  exportDataset(name: string, imageIds: string[]): Promise<ExportManifest> {
    return this.json("/api/export", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ name, image_ids: imageIds }),
    });
  }
}
