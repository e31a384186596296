/** Typed client for the annotation service HTTP API. */
export class ApiError extends Error {
    status;
    code;
    details;
    constructor(status, code, message, details = []) {
        super(message);
        this.status = status;
        this.code = code;
        this.details = details;
    }
    get isConflict() {
        return this.status === 409 && this.code === "conflict";
    }
}
async function raiseFor(res) {
    let code = "http_error";
    let message = `${res.status} ${res.statusText}`;
    let details = [];
    try {
        const body = (await res.json());
        if (body && body.error) {
            code = body.error.code;
            message = body.error.message;
            details = body.error.details ?? [];
        }
    }
    catch {
        // non-JSON error body; keep the HTTP status text
    }
    throw new ApiError(res.status, code, message, details);
}
export class ApiClient {
    base;
    fetchFn;
    constructor(base = "", fetchFn = fetch) {
        this.base = base.replace(/\/$/, "");
        this.fetchFn = fetchFn;
    }
    async json(path, init) {
        const res = await this.fetchFn(`${this.base}${path}`, init);
        if (!res.ok) {
            await raiseFor(res);
        }
        return (await res.json());
    }
    health() {
        return this.json("/api/health");
    }
    listImages() {
        return this.json("/api/images");
    }
    imageUrl(imageId) {
        return `${this.base}/api/images/${encodeURIComponent(imageId)}/file`;
    }
    maskUrl(imageId) {
        return `${this.base}/api/images/${encodeURIComponent(imageId)}/mask.png`;
    }
    vpCandidates(imageId) {
        return this.json(`/api/images/${encodeURIComponent(imageId)}/vp-candidates`);
    }
    async getAnnotation(imageId) {
        try {
            return await this.json(`/api/images/${encodeURIComponent(imageId)}/annotation`);
        }
        catch (e) {
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
    putAnnotation(imageId, record, expectedUpdatedAt) {
        const headers = { "Content-Type": "application/json" };
        if (expectedUpdatedAt) {
            headers["X-Expected-Updated-At"] = expectedUpdatedAt;
        }
        return this.json(`/api/images/${encodeURIComponent(imageId)}/annotation`, {
            method: "PUT",
            headers,
            body: JSON.stringify(record),
        });
    }
    async fetchMaskPng(imageId) {
        const res = await this.fetchFn(`${this.base}/api/images/${encodeURIComponent(imageId)}/mask.png`);
        if (!res.ok) {
            await raiseFor(res);
        }
        return new Uint8Array(await res.arrayBuffer());
    }
    exportDataset(name, imageIds) {
        return this.json("/api/export", {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ name, image_ids: imageIds }),
        });
    }
}
