/** Shared shapes mirroring the annotation service's JSON schema. */

export interface Point {
  x: number;
  y: number;
}

export interface SegmentJson {
  p0: [number, number];
  p1: [number, number];
}

export interface PairJson {
  original: SegmentJson;
  desired: SegmentJson;
}

/** One image's correction instructions; schema_version is pinned to 1. */
export interface AnnotationRecord {
  schema_version: 1;
  image_id: string;
  image_size: [number, number];
  target_vp: [number, number, number];
  pairs: PairJson[];
  dilation_px: number;
  prompt: string;
  created_at?: string | null;
  updated_at?: string | null;
}

export interface ImageEntry {
  image_id: string;
  size: [number, number];
  annotated: boolean;
}

export interface VpCandidate {
  vp: [number, number, number];
  score: number;
  inliers: number[];
}

export interface ExportManifest {
  name: string;
  images: Array<{
    image_id: string;
    file: string;
    annotation_file: string;
    mask_file: string;
    cond_file: string;
    depth_file: null;
  }>;
  created_at: string;
}

export interface ApiErrorBody {
  error: { code: string; message: string; details: unknown[] };
}
