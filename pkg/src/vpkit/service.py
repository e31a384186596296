"""Flat-file annotation store and the HTTP service over it.

Persistence is one `<image_id>.annotation.json` per image plus derived
PNG artifacts, written atomically (temp file in the same directory,
fsync, rename) so a crash mid-write never leaves a partial record.
Writes are serialized per image id; concurrent edits are guarded by an
optimistic-concurrency precondition on updated_at.
"""

from __future__ import annotations

import datetime
import hashlib
import io
import json
import os
import shutil
import tempfile
import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from PIL import Image

from . import __version__
from .annotations import AnnotationRecord, is_complete, parse_annotation
from .contours import OutlineEdge, render_condition
from .detect import RansacConfig, candidates_to_json_dict, detect_vps_in_image
from .errors import (
    Conflict,
    IncompleteAnnotation,
    NotFound,
    StoreUnavailable,
    ValidationFailed,
)
from .geometry import segment_vp_deviation
from .errors import DegenerateDirection
from .maskgen import build_mask

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg")

COND_LINE_WIDTH = 3


def _utc_now_iso() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="microseconds")


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode()


class AnnotationStore:
    """Images from one directory, annotation JSON in another."""

    def __init__(self, image_dir, store_dir):
        self.image_dir = Path(image_dir)
        self.store_dir = Path(store_dir)
        if not self.image_dir.is_dir():
            raise StoreUnavailable(f"image directory {self.image_dir} does not exist")
        self.store_dir.mkdir(parents=True, exist_ok=True)
        self._locks: dict = {}
        self._locks_guard = threading.Lock()
        self._size_cache: dict = {}

    def _lock_for(self, image_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(image_id, threading.Lock())

    def image_path(self, image_id: str) -> Path:
        for ext in IMAGE_EXTENSIONS:
            p = self.image_dir / f"{image_id}{ext}"
            if p.is_file():
                return p
        raise NotFound(f"image {image_id!r} not found")

    def annotation_path(self, image_id: str) -> Path:
        return self.store_dir / f"{image_id}.annotation.json"

    def image_size(self, image_id: str) -> tuple:
        p = self.image_path(image_id)
        key = (str(p), p.stat().st_mtime_ns)
        if key not in self._size_cache:
            with Image.open(p) as img:
                self._size_cache[key] = img.size  # (width, height)
        return self._size_cache[key]

    def list_images(self) -> list:
        out = []
        for p in sorted(self.image_dir.iterdir()):
            if not p.is_file() or p.suffix.lower() not in IMAGE_EXTENSIONS:
                continue
            image_id = p.stem
            record = None
            try:
                record = self.get(image_id)
            except (NotFound, ValidationFailed):
                pass
            w, h = self.image_size(image_id)
            out.append(
                {
                    "image_id": image_id,
                    "size": [w, h],
                    "annotated": record is not None and is_complete(record),
                }
            )
        return out

    def get(self, image_id: str) -> AnnotationRecord | None:
        p = self.annotation_path(image_id)
        if not p.is_file():
            return None
        with open(p) as f:
            return parse_annotation(json.load(f), expected_image_id=image_id)

    def put(self, image_id: str, record_dict: dict, expected_updated_at: str | None = None) -> AnnotationRecord:
        self.image_path(image_id)  # NotFound if the image is missing
        with self._lock_for(image_id):
            record = parse_annotation(record_dict, expected_image_id=image_id)
            w, h = self.image_size(image_id)
            if tuple(record.image_size) != (w, h):
                raise ValidationFailed(
                    [{"field": "image_size", "message": f"must equal the image's [{w}, {h}]"}]
                )
            existing = self.get(image_id)
            if expected_updated_at is not None:
                current = existing.updated_at if existing else None
                if current != expected_updated_at:
                    raise Conflict(
                        f"stale precondition: expected {expected_updated_at!r}, have {current!r}"
                    )
            now = _utc_now_iso()
            created = existing.created_at if existing and existing.created_at else now
            if existing and existing.updated_at == now:
                # same-microsecond rewrite; force a distinct stamp
                bumped = datetime.datetime.fromisoformat(now) + datetime.timedelta(microseconds=1)
                now = bumped.isoformat(timespec="microseconds")
            stored = record.with_timestamps(created, now)
            _atomic_write_bytes(self.annotation_path(image_id), _json_bytes(stored.to_json_dict()))
            return stored


def _require_complete(store: AnnotationStore, image_id: str) -> AnnotationRecord:
    record = store.get(image_id)
    if record is None or not is_complete(record):
        raise IncompleteAnnotation([image_id])
    return record


def mask_png_for(record: AnnotationRecord) -> bytes:
    w, h = record.image_size
    mask = build_mask(record.pairs, w, h, dilation=record.dilation_px)
    return mask.to_png_bytes()


def condition_png_for(record: AnnotationRecord, line_width: int = COND_LINE_WIDTH) -> bytes:
    w, h = record.image_size
    edges = []
    for p in record.pairs:
        try:
            dev = segment_vp_deviation(p.desired, record.target_vp)
        except DegenerateDirection:
            dev = 0.0
        edges.append(OutlineEdge(seg=p.desired, vp_index=0, deviation=dev))
    bitmap = render_condition(edges, w, h, line_width=line_width)
    buf = io.BytesIO()
    Image.fromarray(bitmap.astype(np.uint8) * 255, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def export_dataset(store: AnnotationStore, export_root, name: str, image_ids) -> dict:
    """Write masks, condition images, annotations, and a manifest.

    Deterministic: repeated exports of unchanged annotations are
    byte-identical, so the manifest's created_at is the latest
    updated_at among the exported records rather than wall-clock time.
    """
    image_ids = list(image_ids)
    if not image_ids:
        raise ValidationFailed([{"field": "image_ids", "message": "must not be empty"}])
    if len(set(image_ids)) != len(image_ids):
        raise ValidationFailed([{"field": "image_ids", "message": "must be unique"}])
    missing = []
    records = {}
    for image_id in image_ids:
        try:
            records[image_id] = _require_complete(store, image_id)
        except (IncompleteAnnotation, NotFound):
            missing.append(image_id)
    if missing:
        raise IncompleteAnnotation(missing)

    out_dir = Path(export_root) / name
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for image_id in image_ids:
        record = records[image_id]
        src = store.image_path(image_id)
        img_file = f"{image_id}{src.suffix.lower()}"
        shutil.copyfile(src, out_dir / img_file)
        ann_file = f"{image_id}.annotation.json"
        _atomic_write_bytes(out_dir / ann_file, _json_bytes(record.to_json_dict()))
        mask_file = f"{image_id}.mask.png"
        _atomic_write_bytes(out_dir / mask_file, mask_png_for(record))
        cond_file = f"{image_id}.cond.png"
        _atomic_write_bytes(out_dir / cond_file, condition_png_for(record))
        entries.append(
            {
                "image_id": image_id,
                "file": img_file,
                "annotation_file": ann_file,
                "mask_file": mask_file,
                "cond_file": cond_file,
                "depth_file": None,
            }
        )
    manifest = {
        "name": name,
        "images": entries,
        "created_at": max(r.updated_at or "" for r in records.values()),
    }
    _atomic_write_bytes(out_dir / "manifest.json", _json_bytes(manifest))
    return manifest


def create_app(
    image_dir,
    store_dir,
    ransac_config: RansacConfig | None = None,
    export_root=None,
    cond_line_width: int = COND_LINE_WIDTH,
    ui_dir=None,
):
    """Build the FastAPI application for the annotation workflow."""
    store = AnnotationStore(image_dir, store_dir)
    cfg = ransac_config or RansacConfig()
    export_to = Path(export_root) if export_root else store.store_dir / "exports"
    cfg_hash = hashlib.sha1(json.dumps(cfg.to_json_dict(), sort_keys=True).encode()).hexdigest()
    candidate_cache: dict = {}
    cache_lock = threading.Lock()

    app = FastAPI(title="vpkit annotation service", version=__version__)
    app.state.store = store

    def error_response(status: int, code: str, message: str, details=None):
        return JSONResponse(
            status_code=status,
            content={"error": {"code": code, "message": message, "details": details or []}},
        )

    @app.exception_handler(NotFound)
    async def _nf(request: Request, exc: NotFound):
        return error_response(404, "not_found", str(exc))

    @app.exception_handler(ValidationFailed)
    async def _vf(request: Request, exc: ValidationFailed):
        return error_response(400, "validation_failed", "annotation failed validation", exc.details)

    @app.exception_handler(Conflict)
    async def _cf(request: Request, exc: Conflict):
        return error_response(409, "conflict", str(exc))

    @app.exception_handler(IncompleteAnnotation)
    async def _ia(request: Request, exc: IncompleteAnnotation):
        return error_response(
            409, "incomplete_annotation", str(exc), [{"image_id": i} for i in exc.image_ids]
        )

    @app.get("/api/health")
    def health():
        return {"name": "vpkit", "version": __version__}

    @app.get("/api/images")
    def list_images():
        return store.list_images()

    @app.get("/api/images/{image_id}/file")
    def image_file(image_id: str):
        p = store.image_path(image_id)
        media = "image/png" if p.suffix.lower() == ".png" else "image/jpeg"
        return Response(content=p.read_bytes(), media_type=media)

    @app.get("/api/images/{image_id}/vp-candidates")
    def vp_candidates(image_id: str):
        p = store.image_path(image_id)
        key = (image_id, p.stat().st_mtime_ns, cfg_hash)
        with cache_lock:
            cached = candidate_cache.get(key)
        if cached is None:
            with Image.open(p) as img:
                gray = np.asarray(img.convert("L"), dtype=float) / 255.0
            cands = detect_vps_in_image(gray, cfg)
            cached = candidates_to_json_dict(cands)
            with cache_lock:
                candidate_cache[key] = cached
        return cached

    @app.get("/api/images/{image_id}/annotation")
    def get_annotation(image_id: str):
        store.image_path(image_id)
        record = store.get(image_id)
        if record is None:
            raise NotFound(f"no annotation for {image_id!r}")
        return record.to_json_dict()

    @app.put("/api/images/{image_id}/annotation")
    async def put_annotation(image_id: str, request: Request):
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as e:
            raise ValidationFailed([{"field": "", "message": f"invalid JSON: {e}"}])
        expected = request.headers.get("X-Expected-Updated-At")
        stored = store.put(image_id, body, expected_updated_at=expected)
        return stored.to_json_dict()

    @app.get("/api/images/{image_id}/mask.png")
    def mask_png(image_id: str):
        store.image_path(image_id)
        record = _require_complete(store, image_id)
        return Response(content=mask_png_for(record), media_type="image/png")

    @app.get("/api/images/{image_id}/condition.png")
    def condition_png(image_id: str):
        store.image_path(image_id)
        record = _require_complete(store, image_id)
        return Response(
            content=condition_png_for(record, line_width=cond_line_width),
            media_type="image/png",
        )

    @app.post("/api/export")
    async def export(request: Request):
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as e:
            raise ValidationFailed([{"field": "", "message": f"invalid JSON: {e}"}])
        name = body.get("name")
        if not isinstance(name, str) or not name or "/" in name or name.startswith("."):
            raise ValidationFailed([{"field": "name", "message": "required plain directory name"}])
        image_ids = body.get("image_ids")
        if not isinstance(image_ids, list):
            raise ValidationFailed([{"field": "image_ids", "message": "required list"}])
        return export_dataset(store, export_to, name, image_ids)

    site = Path(ui_dir) if ui_dir else Path(__file__).parent / "ui"
    if site.is_dir():
        app.mount("/", StaticFiles(directory=str(site), html=True), name="ui")

    return app
