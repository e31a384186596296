"""Command-line interface.

Subcommands cover scoring, gradient checking, outline extraction, mask
generation, VP detection, angle-accuracy evaluation, inpainting
simulation with mock predictors, and the annotation service. Every
randomized subcommand takes --seed (default 42) and prints it; --json
switches stdout to machine-readable output; --config supplies defaults
from a JSON file (explicit flags win).

Exit codes: 0 success, 2 I/O failure, 3 validation failure, 4 internal.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import shlex
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
from PIL import Image

from . import __version__
from .annotations import parse_annotation
from .contours import (
    extract_outlines,
    load_segmentation_png,
    load_vps_json,
    render_condition,
    sample_training_condition,
    save_condition_png,
    save_outlines_json,
)
from .detect import RansacConfig, candidates_to_json_dict, detect_vps_in_image
from .edges import (
    DOT_PRODUCT,
    SIGMOID_THRESHOLD,
    VpLossConfig,
    gradient_check,
    to_grayscale,
    vp_loss,
)
from .errors import ImageTooSmall, NoDetections, ValidationFailed, VpkitError
from .geometry import CameraIntrinsics, HomogeneousPoint
from .guidance import DiffusionSchedule, GuidanceWeights, run_inpainting
from .latentio import read_latent, write_latent
from .maskgen import Mask, build_mask
from .metrics import build_aa_report, image_angle_error
from .synthetic import gradient_check_case

EXIT_OK = 0
EXIT_IO = 2
EXIT_VALIDATION = 3
EXIT_INTERNAL = 4


def load_image_gray(path) -> np.ndarray:
    """Image file as float64 luma in [0, 1]."""
    with Image.open(path) as img:
        if img.mode in ("L", "I", "I;16"):
            arr = np.asarray(img.convert("L"), dtype=float) / 255.0
        else:
            rgb = np.asarray(img.convert("RGB"), dtype=float) / 255.0
            arr = to_grayscale(rgb)
    return arr


def emit(args, payload: dict, text: str | None = None):
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text if text is not None else json.dumps(payload, indent=2, sort_keys=True))


def make_predictor(spec: str, z_shape):
    """Predictor factory for the mock/pipe spec language."""
    from .guidance import ConstPredictor, FixedEpsPredictor, ZeroPredictor

    if spec == "mock:zero":
        return ZeroPredictor()
    if spec.startswith("mock:const:"):
        return ConstPredictor(float(spec[len("mock:const:"):]))
    if spec.startswith("mock:true-eps:"):
        path = spec[len("mock:true-eps:"):]
        eps = read_latent(path).astype(float)
        if eps.shape != tuple(z_shape):
            raise ValidationFailed(
                [{"field": "predictor", "message": f"eps shape {eps.shape} != latent {tuple(z_shape)}"}]
            )
        return FixedEpsPredictor(eps)
    if spec.startswith("pipe:"):
        return PipePredictor(spec[len("pipe:"):])
    raise ValidationFailed([{"field": "predictor", "message": f"unknown predictor spec {spec!r}"}])


class PipePredictor:
    """Shell out per call, exchanging latent files.

    Invocation: <cmd> <in.lat> <out.lat> <t> <text_on> <cond_on>
    """

    def __init__(self, cmd: str):
        self.cmd = cmd

    def __call__(self, z_t, t, text_on, cond_on):
        with tempfile.TemporaryDirectory() as d:
            zin = Path(d) / "in.lat"
            zout = Path(d) / "out.lat"
            write_latent(zin, np.asarray(z_t))
            argv = shlex.split(self.cmd) + [
                str(zin), str(zout), str(int(t)), str(int(text_on)), str(int(cond_on))
            ]
            proc = subprocess.run(argv, capture_output=True)
            if proc.returncode != 0:
                raise RuntimeError(
                    f"pipe predictor failed ({proc.returncode}): {proc.stderr.decode()[:500]}"
                )
            return read_latent(zout).astype(float)


def parse_vps_arg(path) -> list:
    return load_vps_json(path)


# ---------------------------------------------------------------------------
# subcommands


def cmd_score(args) -> int:
    pred = load_image_gray(args.pred)
    gt = load_image_gray(args.gt)
    vps = parse_vps_arg(args.vps)
    mode = SIGMOID_THRESHOLD if args.mode == "sigmoid" else DOT_PRODUCT
    cfg = VpLossConfig(
        theta_thresh=math.radians(args.theta_deg),
        sigmoid_steepness=args.k,
        magnitude_epsilon=args.mag_eps,
        weighting_mode=mode,
    )
    report = vp_loss(pred, gt, vps, cfg)
    emit(args, report.to_json_dict())
    return EXIT_OK


def cmd_grad_check(args) -> int:
    if args.size < 8:
        raise ImageTooSmall("gradient check probes 50 pixels and needs size >= 8")
    t0 = time.time()
    trials = []
    worst = 0.0
    for trial in range(args.trials):
        pred, gt, vps, cfg = gradient_check_case(args.seed * 1000 + trial, size=args.size)
        res = gradient_check(pred, gt, vps, cfg, top_k=50)
        trials.append(
            {"trial": trial, "max_rel_err": res["max_rel_err"], "mean_rel_err": res["mean_rel_err"]}
        )
        worst = max(worst, res["max_rel_err"])
    passed = worst < args.tolerance
    payload = {
        "seed": args.seed,
        "size": args.size,
        "trials": trials,
        "max_rel_err": worst,
        "tolerance": args.tolerance,
        "pass": passed,
        "elapsed_s": round(time.time() - t0, 3),
    }
    emit(args, payload, text=(
        f"seed: {args.seed}\nmax relative error over {args.trials} trials: {worst:.3e} "
        f"(tolerance {args.tolerance:g})\n{'PASS' if passed else 'FAIL'}"
    ))
    return EXIT_OK if passed else EXIT_VALIDATION


def cmd_extract_outlines(args) -> int:
    labels = load_segmentation_png(args.seg)
    vps = parse_vps_arg(args.vps)
    edges = extract_outlines(
        labels, vps, dp_epsilon=args.dp_eps, theta=math.radians(args.theta_deg)
    )
    if args.keep_prob < 1.0:
        edges = sample_training_condition(edges, args.keep_prob, args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.seg).stem
    outlines_path = out_dir / f"{stem}.outlines.json"
    cond_path = out_dir / f"{stem}.cond.png"
    save_outlines_json(outlines_path, edges)
    h, w = labels.shape
    save_condition_png(cond_path, render_condition(edges, w, h, line_width=args.line_width))
    emit(
        args,
        {
            "seed": args.seed,
            "outlines": str(outlines_path),
            "condition": str(cond_path),
            "edge_count": len(edges),
        },
        text=f"seed: {args.seed}\nwrote {outlines_path} ({len(edges)} edges) and {cond_path}",
    )
    return EXIT_OK


def cmd_make_mask(args) -> int:
    with open(args.annotation) as f:
        record = parse_annotation(json.load(f))
    w, h = record.image_size
    dilation = record.dilation_px if args.dilate is None else args.dilate
    mask = build_mask(record.pairs, w, h, dilation=dilation)
    mask.save(args.out)
    emit(
        args,
        {
            "out": str(args.out),
            "dilation_px": dilation,
            "coverage": mask.coverage,
            "set_pixels": mask.set_pixels,
        },
        text=f"wrote {args.out} (coverage {mask.coverage:.4f}, {mask.set_pixels} px)",
    )
    return EXIT_OK


def _ransac_config(args) -> RansacConfig:
    return RansacConfig(
        iterations=args.iterations,
        consensus_angle=math.radians(args.consensus_deg),
        max_vps=args.max_vps,
        min_inliers=args.min_inliers,
        min_segment_length=args.min_segment_length,
        magnitude_quantile=args.magnitude_quantile,
        rng_seed=args.seed,
    )


def _image_files(directory) -> list:
    d = Path(directory)
    if not d.is_dir():
        raise FileNotFoundError(f"{directory} is not a directory")
    return sorted(
        p for p in d.iterdir() if p.suffix.lower() in (".png", ".jpg", ".jpeg")
    )


def cmd_detect_vps(args) -> int:
    files = _image_files(args.images)
    if not files:
        raise ValidationFailed([{"field": "images", "message": "directory holds no images"}])
    cfg = _ransac_config(args)
    results = {}
    for p in files:
        cands = detect_vps_in_image(load_image_gray(p), cfg)
        results[p.stem] = candidates_to_json_dict(cands)
    payload = {"seed": args.seed, "config": cfg.to_json_dict(), "images": results}
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        emit(args, payload, text=f"seed: {args.seed}\nwrote {args.out}")
    else:
        emit(args, payload)
    return EXIT_OK


def cmd_eval_aa(args) -> int:
    files = _image_files(args.images)
    if not files:
        raise ValidationFailed([{"field": "images", "message": "directory holds no images"}])
    ann_dir = Path(args.annotations)
    cfg = _ransac_config(args)
    thresholds = [float(t) for t in args.thresholds.split(",")]
    per_image = []
    intrinsics = None
    for p in files:
        ann_path = ann_dir / f"{p.stem}.annotation.json"
        if not ann_path.is_file():
            raise FileNotFoundError(f"missing annotation {ann_path}")
        with open(ann_path) as f:
            ann = json.load(f)
        x, y, w = ann["target_vp"]
        target = HomogeneousPoint(float(x), float(y), float(w))
        img = load_image_gray(p)
        hh, ww = img.shape
        if args.fx is not None:
            k = CameraIntrinsics(
                args.fx,
                args.fy if args.fy is not None else args.fx,
                args.cx if args.cx is not None else ww / 2.0,
                args.cy if args.cy is not None else hh / 2.0,
            )
        else:
            k = CameraIntrinsics.default_for(ww, hh)
        intrinsics = k
        cands = detect_vps_in_image(img, cfg)
        try:
            err = image_angle_error([c.vp for c in cands], target, k)
        except NoDetections:
            err = None
        per_image.append((p.stem, err))
    report = build_aa_report(per_image, thresholds=thresholds, intrinsics=intrinsics)
    d = report.to_json_dict()
    d["seed"] = args.seed
    out = Path(args.out)
    out.write_text(json.dumps(d, indent=2, sort_keys=True) + "\n")
    if args.csv:
        Path(args.csv).write_text(report.to_csv())
    mean_err = float(np.mean([e for _, e, _ in report.per_image]))
    emit(
        args,
        d,
        text="seed: {}\n{}\nmean error: {:.3f} deg\nwrote {}".format(
            args.seed,
            " ".join(f"AA@{t:g}={report.aa_at[t]:.3f}" for t in report.thresholds),
            mean_err,
            out,
        ),
    )
    return EXIT_OK


def cmd_simulate_inpaint(args) -> int:
    z0 = read_latent(args.z0).astype(float)
    with open(args.schedule) as f:
        sched = DiffusionSchedule.from_json_dict(json.load(f))
    mask_img = Mask.from_png(args.mask)
    mask = _mask_to_latent(mask_img, z0.shape)
    predictor = make_predictor(args.predictor, z0.shape)
    steps = _build_steps(sched.timesteps, args.steps)
    out = run_inpainting(
        predictor,
        z0,
        mask,
        sched,
        GuidanceWeights(args.omega1, args.omega2),
        steps=steps,
        rng_seed=args.seed,
    )
    write_latent(args.out, out)
    emit(
        args,
        {
            "seed": args.seed,
            "out": str(args.out),
            "steps": steps,
            "omega1": args.omega1,
            "omega2": args.omega2,
            "mask_fraction": float(mask.mean()),
        },
        text=f"seed: {args.seed}\nwrote {args.out} (steps {steps})",
    )
    return EXIT_OK


def _build_steps(timesteps: int, n: int) -> list:
    """n strictly decreasing timesteps from T to 1."""
    if n < 1:
        raise ValidationFailed([{"field": "steps", "message": "must be >= 1"}])
    raw = np.linspace(timesteps, 1, n)
    steps = sorted({max(1, int(round(v))) for v in raw}, reverse=True)
    if steps[-1] != 1:
        steps.append(1)
    return steps


def _mask_to_latent(mask: Mask, z_shape) -> np.ndarray:
    """Nearest-neighbor resize of the pixel mask to the latent's last two dims."""
    if len(z_shape) < 2:
        raise ValidationFailed(
            [{"field": "z0", "message": "latent must have at least 2 dimensions"}]
        )
    lh, lw = int(z_shape[-2]), int(z_shape[-1])
    rows = (np.arange(lh) * mask.height / lh).astype(int)
    cols = (np.arange(lw) * mask.width / lw).astype(int)
    small = mask.bits[np.ix_(rows, cols)].astype(float)
    return np.broadcast_to(small, z_shape).copy()


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    ransac = RansacConfig(rng_seed=args.seed)
    if args.ransac_config:
        with open(args.ransac_config) as f:
            raw = json.load(f)
        ransac = RansacConfig(
            iterations=raw.get("iterations", 2000),
            consensus_angle=math.radians(raw.get("consensus_angle_deg", 2.0)),
            max_vps=raw.get("max_vps", 3),
            min_inliers=raw.get("min_inliers", 4),
            min_segment_length=raw.get("min_segment_length", 20),
            magnitude_quantile=raw.get("magnitude_quantile", 0.9),
            rng_seed=raw.get("rng_seed", args.seed),
        )
    app = create_app(
        args.images, args.store, ransac, export_root=args.export_dir, ui_dir=args.ui_dir
    )
    host, _, port = args.listen.rpartition(":")
    print(f"seed: {args.seed}")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser plumbing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vpkit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"vpkit {__version__}")
    parser.add_argument("--config", help="JSON file with default flag values")
    parser.add_argument("--json", action="store_true", help="machine-readable stdout")
    parser.add_argument("--seed", type=int, default=42, help="RNG seed (default 42)")
    # the same globals are accepted after the subcommand; SUPPRESS keeps the
    # subparser from clobbering values given before it
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="VP alignment loss between two images", parents=[common])
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--vps", required=True, help='JSON file {"vps": [[x,y,w], ...]}')
    p.add_argument("--theta-deg", type=float, default=5.0)
    p.add_argument("--k", type=float, default=50.0)
    p.add_argument("--mag-eps", type=float, default=1e-4)
    p.add_argument("--mode", choices=["sigmoid", "dot"], default="sigmoid")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("grad-check", help="verify the analytic gradient against finite differences", parents=[common])
    p.add_argument("--size", type=int, default=16)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--tolerance", type=float, default=1e-3)
    p.set_defaults(func=cmd_grad_check)

    p = sub.add_parser("extract-outlines", help="segmentation map to VP-aligned outline data", parents=[common])
    p.add_argument("--seg", required=True, help="single-channel label PNG")
    p.add_argument("--vps", required=True)
    p.add_argument("--dp-eps", type=float, default=2.0)
    p.add_argument("--theta-deg", type=float, default=5.0)
    p.add_argument("--keep-prob", type=float, default=1.0)
    p.add_argument("--line-width", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract_outlines)

    p = sub.add_parser("make-mask", help="between-outline inpainting mask from an annotation", parents=[common])
    p.add_argument("--annotation", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dilate", type=int, default=None)
    p.set_defaults(func=cmd_make_mask)

    for name, helptext in (
        ("detect-vps", "RANSAC VP candidates per image"),
        ("eval-aa", "angle-accuracy report over an annotated image set"),
    ):
        p = sub.add_parser(name, help=helptext, parents=[common])
        p.add_argument("--images", required=True)
        p.add_argument("--iterations", type=int, default=2000)
        p.add_argument("--consensus-deg", type=float, default=2.0)
        p.add_argument("--max-vps", type=int, default=3)
        p.add_argument("--min-inliers", type=int, default=4)
        p.add_argument("--min-segment-length", type=float, default=20.0)
        p.add_argument("--magnitude-quantile", type=float, default=0.9)
        if name == "detect-vps":
            p.add_argument("--out")
            p.set_defaults(func=cmd_detect_vps)
        else:
            p.add_argument("--annotations", required=True)
            p.add_argument("--fx", type=float)
            p.add_argument("--fy", type=float)
            p.add_argument("--cx", type=float)
            p.add_argument("--cy", type=float)
            p.add_argument("--thresholds", default="3,5,10")
            p.add_argument("--out", default="aa_report.json")
            p.add_argument("--csv")
            p.set_defaults(func=cmd_eval_aa)

    p = sub.add_parser("simulate-inpaint", help="masked denoising loop with a mock predictor", parents=[common])
    p.add_argument("--z0", required=True, help="input latent file")
    p.add_argument("--mask", required=True, help="mask PNG (255 = editable)")
    p.add_argument("--schedule", required=True, help='JSON {"T": n, "alpha_bar": [...]}')
    p.add_argument("--omega1", type=float, default=1.0)
    p.add_argument("--omega2", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--predictor", default="mock:zero",
                   help="mock:zero | mock:const:<v> | mock:true-eps:<file> | pipe:<cmd>")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate_inpaint)

    # flags win over VPKIT_* environment variables
    env = os.environ.get
    p = sub.add_parser("serve", help="run the annotation HTTP service", parents=[common])
    p.add_argument("--listen", default=env("VPKIT_LISTEN", "127.0.0.1:8008"))
    p.add_argument("--images", default=env("VPKIT_IMAGES"), required=env("VPKIT_IMAGES") is None)
    p.add_argument("--store", default=env("VPKIT_STORE"), required=env("VPKIT_STORE") is None)
    p.add_argument("--ransac-config", default=env("VPKIT_RANSAC_CONFIG"),
                   help="JSON file mirroring RansacConfig")
    p.add_argument("--export-dir", default=env("VPKIT_EXPORT_DIR"))
    p.add_argument("--ui-dir", default=env("VPKIT_UI_DIR"),
                   help="directory with the built browser UI (frontend/site)")
    p.set_defaults(func=cmd_serve)

    return parser


def apply_config_file(parser, args, argv):
    """Fill unset flags from the --config JSON; explicit flags win."""
    if not args.config:
        return args
    with open(args.config) as f:
        config = json.load(f)
    if not isinstance(config, dict):
        raise ValidationFailed([{"field": "config", "message": "must be a JSON object"}])
    given = set()
    for tok in argv:
        if tok.startswith("--"):
            given.add(tok.lstrip("-").split("=")[0].replace("-", "_"))
    for key, value in config.items():
        dest = key.replace("-", "_")
        if dest in given:
            continue
        if hasattr(args, dest):
            setattr(args, dest, value)
    return args


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = apply_config_file(parser, args, argv)
        return args.func(args)
    except OSError as e:
        _emit_error(args, "io_error", str(e))
        return EXIT_IO
    except (VpkitError, ValueError) as e:
        details = e.details if isinstance(e, ValidationFailed) else []
        _emit_error(args, "validation_failed", str(e), details)
        return EXIT_VALIDATION
    except Exception as e:  # pragma: no cover - internal failure path
        _emit_error(args, "internal_error", f"{type(e).__name__}: {e}")
        return EXIT_INTERNAL


def _emit_error(args, code, message, details=None):
    if getattr(args, "json", False):
        print(json.dumps({"error": {"code": code, "message": message, "details": details or []}}))
    else:
        print(f"error: {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
