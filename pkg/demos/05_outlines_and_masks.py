"""From a segmentation map to outline conditions and correction masks.

Traces building-blob contours, simplifies them with Douglas-Peucker,
keeps the edges that point at a VP, renders the binary condition image,
and builds a between-outline inpainting mask from a correction pair.
"""

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from vpkit import (
    HomogeneousPoint,
    LineSegment,
    OutlinePair,
    Point2,
    build_mask,
    douglas_peucker,
    render_condition,
    sample_training_condition,
    select_vp_aligned_edges,
    trace_contours,
)

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

# A toy "street": two building-like quads in a label map.
labels = np.zeros((128, 192), dtype=int)
labels[30:100, 20:80] = 1
labels[45:95, 110:175] = 2

polys = [douglas_peucker(p, 2.0) for p in trace_contours(labels)]
print(f"{len(polys)} contours, vertex counts {[len(p.points) for p in polys]}")

vps = [HomogeneousPoint(96, -300, 1), HomogeneousPoint(1, 0, 0)]
edges = select_vp_aligned_edges(polys, vps, theta=math.radians(10))
print(f"{len(edges)} VP-aligned edges selected")

cond = render_condition(edges, 192, 128, line_width=2)
subset = sample_training_condition(edges, keep_prob=0.6, rng_seed=7)
cond_sub = render_condition(subset, 192, 128, line_width=2)
print(f"training subsample keeps {len(subset)}/{len(edges)} edges")

# A correction: the user marks one misaligned outline and its fix.
pair = OutlinePair(
    original=LineSegment(Point2(20, 30), Point2(80, 36)),
    desired=LineSegment(Point2(20, 30), Point2(80, 28)),
)
mask = build_mask([pair], 192, 128, dilation=4)
print(f"mask covers {mask.coverage:.2%} of the frame")

fig, axes = plt.subplots(2, 2, figsize=(9, 6))
axes[0, 0].imshow(labels, cmap="tab10")
axes[0, 0].set_title("segmentation map")
axes[0, 1].imshow(cond, cmap="gray")
axes[0, 1].set_title("condition image (all aligned edges)")
axes[1, 0].imshow(cond_sub, cmap="gray")
axes[1, 0].set_title("random training subsample")
axes[1, 1].imshow(mask.bits, cmap="gray")
axes[1, 1].set_title("between-outline mask (dilated)")
for ax in axes.ravel():
    ax.set_xticks([])
    ax.set_yticks([])
fig.tight_layout()
fig.savefig(OUT / "outlines_and_masks.png", dpi=120)
print(f"wrote {OUT / 'outlines_and_masks.png'}")
