"""Text-layer extraction: bbox masks, 2-means cluster filtering, masked cut.

The refinement step clusters RGB values inside each detected region into
two groups and keeps the larger one, discarding the smaller as edge
noise. Each region is clustered independently so one region's palette
cannot pollute another's; overlapping regions merge by union.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .core import BBox, BinaryMask, RasterImage, TextRegion, require_same_dims
from .errors import (
    AllBoxesOutOfBoundsError,
    EmptyDetectionsError,
    TooFewPixelsError,
    ValidationError,
)


@dataclass(frozen=True)
class DetectionSet:
    """Ordered text detections for one image (document order is preserved)."""

    regions: tuple
    image_dims: tuple

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        object.__setattr__(self, "image_dims", (int(self.image_dims[0]), int(self.image_dims[1])))

    @classmethod
    def from_json(cls, source, image_dims):
        """Parse a JSON array of {"bbox": [x,y,w,h], "text": ..., ...} objects."""
        if isinstance(source, (str, bytes)):
            with open(source, "r", encoding="utf-8") as fh:
                items = json.load(fh)
        else:
            items = source
        if not isinstance(items, list):
            raise ValidationError("detections must be a JSON array")
        regions = []
        for i, item in enumerate(items):
            try:
                x, y, w, h = item["bbox"]
                regions.append(
                    TextRegion(
                        bbox=BBox(int(x), int(y), int(w), int(h)),
                        text=item["text"],
                        tampered_text=item.get("tampered_text"),
                        prompt=item.get("prompt"),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ValidationError(f"detection #{i} is malformed: {exc}") from exc
        return cls(tuple(regions), tuple(image_dims))


@dataclass(frozen=True)
class ForegroundLayer:
    """A text layer: image samples under the mask, exact zeros elsewhere."""

    image: RasterImage
    mask: BinaryMask
    regions: tuple = field(default_factory=tuple)

    def __post_init__(self):
        require_same_dims(self.image, self.mask, "layer image and mask")
        if np.any(self.image.data[~self.mask.bits]):
            raise ValidationError("layer image must be zero outside its mask")
        object.__setattr__(self, "regions", tuple(self.regions))


def generate_mask(dets):
    """Union of all detection bboxes, clipped to the image bounds."""
    if not dets.regions:
        raise EmptyDetectionsError("detection set is empty")
    width, height = dets.image_dims
    bits = np.zeros((height, width), dtype=bool)
    any_inside = False
    for region in dets.regions:
        clip = region.bbox.clipped(width, height)
        if clip is None:
            continue
        x0, y0, x1, y1 = clip
        bits[y0:y1, x0:x1] = True
        any_inside = True
    if not any_inside:
        raise AllBoxesOutOfBoundsError("no detection bbox intersects the image")
    return BinaryMask(bits)


def _two_means(points, rng, max_iter):
    """2-means over (N, 3) float points with k-means++ seeding.

    Returns (labels, centers). Stops when assignments stop changing.
    """
    n = points.shape[0]
    c0 = points[int(rng.integers(n))]
    d2 = ((points - c0) ** 2).sum(axis=1)
    total = d2.sum()
    # farthest-biased second seed guarantees the clusters split two
    # exact colors on the first assignment
    probs = d2 / total
    c1 = points[int(rng.choice(n, p=probs))]
    centers = np.stack([c0, c1]).astype(np.float64)
    labels = None
    for _ in range(max_iter):
        d = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = d.argmin(axis=1)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in (0, 1):
            sel = labels == j
            if sel.any():
                centers[j] = points[sel].mean(axis=0)
    return labels, centers


def _luminance(rgb):
    return 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]


def _refine_one(img_data, sub_bits, rng, max_iter, out_bits):
    ys, xs = np.nonzero(sub_bits)
    if ys.size == 0:
        return
    colors = img_data[ys, xs].astype(np.float64)
    if ys.size < 2 or np.unique(colors, axis=0).shape[0] < 2:
        # nothing to split: keep the region as-is
        out_bits[ys, xs] = True
        return
    labels, centers = _two_means(colors, rng, max_iter)
    n0 = int((labels == 0).sum())
    n1 = labels.size - n0
    if n0 != n1:
        keep = 0 if n0 > n1 else 1
    else:
        # exact tie: keep the brighter centroid (glyph bodies over fringe)
        keep = 0 if _luminance(centers[0]) >= _luminance(centers[1]) else 1
    sel = labels == keep
    out_bits[ys[sel], xs[sel]] = True


def kmeans_refine(img, mask, k=2, seed=0, max_iter=50, regions=None):
    """Drop the minority color cluster from the mask, per region.

    `regions` is an optional list of BBox; when given, each box's masked
    pixels are clustered independently and the kept pixels merge by
    union. Without it the whole mask is one region. The result is always
    a subset of the input mask, and deterministic for a given seed.
    """
    if k != 2:
        raise ValidationError(f"only k=2 clustering is supported, got k={k}")
    require_same_dims(img, mask, "image and mask")
    if mask.count < k:
        raise TooFewPixelsError(f"mask has {mask.count} pixels, need at least {k}")
    out_bits = np.zeros_like(mask.bits)
    if regions is None:
        sub_list = [mask.bits]
    else:
        sub_list = []
        for box in regions:
            clip = box.clipped(img.width, img.height)
            sub = np.zeros_like(mask.bits)
            if clip is not None:
                x0, y0, x1, y1 = clip
                sub[y0:y1, x0:x1] = mask.bits[y0:y1, x0:x1]
            sub_list.append(sub)
    for idx, sub in enumerate(sub_list):
        rng = np.random.default_rng([int(seed), idx])
        _refine_one(img.data, sub, rng, max_iter, out_bits)
    return BinaryMask(out_bits)


def extract_foreground(img, mask, regions=()):
    """Cut the layer: pixel values where the mask is set, zeros elsewhere."""
    require_same_dims(img, mask, "image and mask")
    data = np.where(mask.bits[:, :, None], img.data, np.uint8(0))
    return ForegroundLayer(RasterImage(data), mask, tuple(regions))
