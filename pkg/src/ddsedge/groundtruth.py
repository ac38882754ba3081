"""Supervision targets and evaluation references from segmentation maps.

All edges derive from per-pixel integer label maps: a pixel labeled k > 0
is a boundary pixel of class k when any of its 8 neighbors carries a
different label. Background (label 0) never produces its own boundary but
does trigger boundaries of adjacent classes. Thick maps feed the semantic
losses; the thinned class-agnostic union feeds the binary side losses and
the "Thin" benchmark protocol.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ddsedge.backend import kernels

THICK = "thick"
THIN = "thin"

_SHIFTS = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


class LabelError(ValueError):
    """Raised for label maps outside the declared class range."""


@dataclass
class SegmentationMap:
    """(H, W) integer labels in [0, K]; 0 is background."""

    labels: np.ndarray
    num_classes: int
    ignore: np.ndarray | None = None

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.ndim != 2:
            raise LabelError(f"labels must be 2-D, got ndim={lab.ndim}")
        if lab.min() < 0 or lab.max() > self.num_classes:
            raise LabelError(
                f"labels must lie in [0, {self.num_classes}], "
                f"found range [{lab.min()}, {lab.max()}]"
            )
        self.labels = lab.astype(np.int64)
        if self.ignore is not None and self.ignore.shape != lab.shape:
            raise LabelError("ignore mask shape differs from labels")


@dataclass
class EdgeGroundTruth:
    """Per-class binary boundary maps plus their class-agnostic union."""

    per_class: np.ndarray  # (K, H, W) uint8
    union: np.ndarray  # (H, W) uint8
    thickness: str = THICK


def _differs_any(labels: np.ndarray) -> np.ndarray:
    """True where any 8-neighbor (edge-replicated at borders) differs."""
    padded = np.pad(labels, 1, mode="edge")
    h, w = labels.shape
    differs = np.zeros((h, w), dtype=bool)
    for dy, dx in _SHIFTS:
        differs |= padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w] != labels
    return differs


def semantic_boundaries(seg: SegmentationMap, num_classes: int | None = None) -> EdgeGroundTruth:
    """Thick per-class boundaries under the 8-neighborhood rule."""
    k = seg.num_classes if num_classes is None else num_classes
    if seg.labels.max() > k:
        raise LabelError(f"labels exceed class count {k}")
    differs = _differs_any(seg.labels)
    per_class = np.zeros((k, *seg.labels.shape), dtype=np.uint8)
    for c in range(1, k + 1):
        per_class[c - 1] = (seg.labels == c) & differs
    union = ((seg.labels > 0) & differs).astype(np.uint8)
    return EdgeGroundTruth(per_class=per_class, union=union, thickness=THICK)


def binary_union(gt: EdgeGroundTruth) -> np.ndarray:
    """Logical OR across the per-class maps."""
    return (gt.per_class.any(axis=0)).astype(np.uint8)


def thin(edges: np.ndarray) -> np.ndarray:
    """Morphological thinning (Guo-Hall) to unit width; idempotent.

    Alternates the two subiteration conditions until a full odd+even cycle
    deletes nothing. Deletions within a subiteration are parallel.
    """
    img = np.ascontiguousarray((np.asarray(edges) != 0).astype(np.uint8))
    while True:
        img, d_odd = kernels.guo_hall_pass(img, True)
        img = np.ascontiguousarray(img)
        img, d_even = kernels.guo_hall_pass(img, False)
        img = np.ascontiguousarray(img)
        if d_odd + d_even == 0:
            return img


def thin_ground_truth(gt: EdgeGroundTruth) -> EdgeGroundTruth:
    """Thin every class map; the union field is re-derived as their OR."""
    thinned = np.stack([thin(m) for m in gt.per_class])
    return EdgeGroundTruth(
        per_class=thinned, union=thinned.any(axis=0).astype(np.uint8), thickness=THIN
    )


def unit_width_violations(mask: np.ndarray) -> int:
    """Count 2x2 all-ones blocks, the thickness predicate for thin maps."""
    m = np.asarray(mask) != 0
    blocks = m[:-1, :-1] & m[:-1, 1:] & m[1:, :-1] & m[1:, 1:]
    return int(blocks.sum())


def downsample_protocol(seg: SegmentationMap, factor: int) -> SegmentationMap:
    """Nearest-neighbor label downsampling; boundaries must be re-derived.

    Downsampling edge maps directly breaks connectivity, so the protocol
    downsamples labels and regenerates boundaries from them.
    """
    if factor < 1:
        raise LabelError(f"factor must be >= 1, got {factor}")
    h, w = seg.labels.shape
    if h % factor or w % factor:
        raise LabelError(f"factor {factor} does not divide {h}x{w}")
    labels = seg.labels[::factor, ::factor]
    ignore = seg.ignore[::factor, ::factor] if seg.ignore is not None else None
    return SegmentationMap(labels=labels, num_classes=seg.num_classes, ignore=ignore)


def training_targets(seg: SegmentationMap) -> tuple[np.ndarray, np.ndarray]:
    """(binary thin union (1,H,W), thick per-class (K,H,W)) supervision pair.

    Low sides learn the single-pixel class-agnostic edges; the top side and
    the fusion learn the thick semantic boundaries.
    """
    gt = semantic_boundaries(seg)
    y = thin(gt.union)[None].astype(np.uint8)
    return y, gt.per_class.copy()


def softmax_labels(seg: SegmentationMap) -> np.ndarray:
    """Single-label edge target: class index on its boundary, 0 elsewhere.

    Under the 8-neighborhood rule a pixel belongs to at most the boundary
    of its own class, so the per-class maps are disjoint and the label is
    well defined.
    """
    gt = semantic_boundaries(seg)
    out = np.zeros_like(seg.labels)
    for c in range(gt.per_class.shape[0]):
        out[gt.per_class[c] != 0] = c + 1
    return out
