"""The annotation record: one image's correction instructions.

A record holds the target VP, the original/desired outline pairs, the
mask dilation radius, and a prompt. It is the interchange format
between the browser UI, the HTTP service, and the dataset export, so
parsing and validation live here and report field-level messages.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import DegenerateRegion, ValidationFailed
from .geometry import HomogeneousPoint, LineSegment, Point2
from .maskgen import OutlinePair

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class AnnotationRecord:
    image_id: str
    image_size: tuple  # (width, height)
    target_vp: HomogeneousPoint
    pairs: tuple  # of OutlinePair
    dilation_px: int = 5
    prompt: str = ""
    created_at: str | None = None
    updated_at: str | None = None
    schema_version: int = SCHEMA_VERSION

    def with_timestamps(self, created_at: str, updated_at: str) -> "AnnotationRecord":
        return replace(self, created_at=created_at, updated_at=updated_at)

    def to_json_dict(self) -> dict:
        def seg_dict(s: LineSegment) -> dict:
            return {"p0": [s.p0.x, s.p0.y], "p1": [s.p1.x, s.p1.y]}

        return {
            "schema_version": self.schema_version,
            "image_id": self.image_id,
            "image_size": [self.image_size[0], self.image_size[1]],
            "target_vp": [self.target_vp.x, self.target_vp.y, self.target_vp.w],
            "pairs": [
                {"original": seg_dict(p.original), "desired": seg_dict(p.desired)}
                for p in self.pairs
            ],
            "dilation_px": self.dilation_px,
            "prompt": self.prompt,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }


def _parse_segment(d, field_name: str, errors: list) -> LineSegment | None:
    try:
        (x0, y0), (x1, y1) = d["p0"], d["p1"]
        return LineSegment(Point2(float(x0), float(y0)), Point2(float(x1), float(y1)))
    except (KeyError, TypeError, ValueError) as e:
        errors.append({"field": field_name, "message": f"invalid segment: {e}"})
        return None


def parse_annotation(d: dict, expected_image_id: str | None = None) -> AnnotationRecord:
    """Parse and validate a record dict; raises ValidationFailed with details."""
    errors = []
    if not isinstance(d, dict):
        raise ValidationFailed([{"field": "", "message": "record must be a JSON object"}])

    version = d.get("schema_version")
    if version != SCHEMA_VERSION:
        errors.append({"field": "schema_version", "message": f"must be {SCHEMA_VERSION}"})

    image_id = d.get("image_id")
    if not isinstance(image_id, str) or not image_id:
        errors.append({"field": "image_id", "message": "required non-empty string"})
    elif expected_image_id is not None and image_id != expected_image_id:
        errors.append({"field": "image_id", "message": f"must equal {expected_image_id!r}"})

    width = height = None
    try:
        width, height = int(d["image_size"][0]), int(d["image_size"][1])
        if width <= 0 or height <= 0:
            raise ValueError
    except (KeyError, TypeError, ValueError, IndexError):
        errors.append({"field": "image_size", "message": "required [width, height] of positive ints"})

    target_vp = None
    try:
        x, y, w = (float(v) for v in d["target_vp"])
        target_vp = HomogeneousPoint(x, y, w)
    except (KeyError, TypeError, ValueError):
        errors.append({"field": "target_vp", "message": "required [x, y, w] homogeneous point"})

    raw_pairs = d.get("pairs")
    pairs = []
    if not isinstance(raw_pairs, list) or len(raw_pairs) == 0:
        errors.append({"field": "pairs", "message": "at least one outline pair is required"})
    else:
        for i, p in enumerate(raw_pairs):
            if not isinstance(p, dict):
                errors.append({"field": f"pairs[{i}]", "message": "must be an object"})
                continue
            orig = _parse_segment(p.get("original", {}), f"pairs[{i}].original", errors)
            des = _parse_segment(p.get("desired", {}), f"pairs[{i}].desired", errors)
            if orig is None or des is None:
                continue
            try:
                pairs.append(OutlinePair(original=orig, desired=des))
            except DegenerateRegion:
                errors.append(
                    {"field": f"pairs[{i}]", "message": "original and desired outlines are identical"}
                )

    dilation = d.get("dilation_px", 5)
    if not isinstance(dilation, int) or dilation < 0:
        errors.append({"field": "dilation_px", "message": "must be a non-negative integer"})

    prompt = d.get("prompt", "")
    if not isinstance(prompt, str):
        errors.append({"field": "prompt", "message": "must be a string"})

    # outline endpoints must stay within a box twice the image size,
    # centered on the image; the VP itself may be anywhere
    if width and height and pairs:
        x_lo, x_hi = -width / 2.0, 1.5 * width
        y_lo, y_hi = -height / 2.0, 1.5 * height
        for i, p in enumerate(pairs):
            for seg_name, seg in (("original", p.original), ("desired", p.desired)):
                for pt in (seg.p0, seg.p1):
                    if not (x_lo <= pt.x <= x_hi and y_lo <= pt.y <= y_hi):
                        errors.append(
                            {
                                "field": f"pairs[{i}].{seg_name}",
                                "message": "endpoint outside the 2x image bounding box",
                            }
                        )
                        break

    if errors:
        raise ValidationFailed(errors)

    return AnnotationRecord(
        image_id=image_id,
        image_size=(width, height),
        target_vp=target_vp,
        pairs=tuple(pairs),
        dilation_px=dilation,
        prompt=prompt,
        created_at=d.get("created_at"),
        updated_at=d.get("updated_at"),
    )


def is_complete(record: AnnotationRecord) -> bool:
    return len(record.pairs) >= 1 and record.target_vp is not None
