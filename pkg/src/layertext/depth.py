"""Depth-aware photometric adjustment of the transformed text layer.

The foreground inherits the background depth of its original footprint,
transported through the geometric transform. The per-pixel difference
between the background depth at the new location and that transported
depth measures how much the relocation changed the scene depth, and
drives an affine brightness/contrast correction:

    out = clamp((1 + lambda1 * dd) * in + lambda2 * dd, 0, 1)

computed in normalized float intensities, per channel, only under the
layer mask. With lambda1 = lambda2 = 0, or a zero depth difference, the
adjustment is a bit-exact identity.
"""

from dataclasses import dataclass

import numpy as np

from .core import DepthMap, RasterImage, from_float, require_same_dims
from .errors import ValidationError
from .foreground import ForegroundLayer
from .transform import warp_field, warp_mask
from . import providers

LAMBDA1_RANGE = (0.1, 2.0)
LAMBDA2_RANGE = (0.05, 1.0)

# scene presets: (lambda1, lambda2)
PRESETS = {
    "uniform": (0.3, 0.2),
    "high_variation": (1.0, 0.5),
    "hdr": (1.5, 0.8),
}


@dataclass(frozen=True)
class DepthParams:
    """Contrast (lambda1) and brightness (lambda2) sensitivity to depth change.

    (0, 0) is explicitly allowed and disables the adjustment entirely;
    any other pair must fall inside the documented tuning ranges.
    """

    lambda1: float = 0.5
    lambda2: float = 0.3

    def __post_init__(self):
        l1, l2 = float(self.lambda1), float(self.lambda2)
        if l1 == 0.0 and l2 == 0.0:
            return
        if not (LAMBDA1_RANGE[0] <= l1 <= LAMBDA1_RANGE[1]):
            raise ValidationError(f"lambda1={l1} outside {LAMBDA1_RANGE} (and not the (0,0) identity)")
        if not (LAMBDA2_RANGE[0] <= l2 <= LAMBDA2_RANGE[1]):
            raise ValidationError(f"lambda2={l2} outside {LAMBDA2_RANGE} (and not the (0,0) identity)")

    @classmethod
    def from_preset(cls, name):
        try:
            l1, l2 = PRESETS[name]
        except KeyError:
            raise ValidationError(f"unknown depth preset {name!r} (choose from {sorted(PRESETS)})") from None
        return cls(l1, l2)


class DepthDelta:
    """Per-pixel depth difference (background minus foreground), zero off-mask."""

    __slots__ = ("values", "mask")

    def __init__(self, values, mask):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != mask.bits.shape:
            raise ValidationError("delta values and mask differ in shape")
        if values.size and np.abs(values).max() > 1.0 + 1e-9:
            raise ValidationError("depth differences must lie in [-1, 1]")
        values = values.copy()
        values[~mask.bits] = 0.0
        values.setflags(write=False)
        self.values = values
        self.mask = mask


def estimate_depth_external(img, provider):
    """Run the external depth provider: `<cmd> --image in.png --out depth.pfm`."""
    return providers.depth_via_provider(img, provider)


def foreground_depth(bg_depth, src_mask, t, out_dims):
    """Transport the background depth of the text's original footprint.

    For each destination pixel covered by the transformed mask, sample
    the background depth at the inverse-mapped source position. The
    result is the depth the text "brought along" from where it used to
    sit; subtracting it from the local background depth isolates the
    mismatch induced by the relocation (zero for the identity).
    """
    require_same_dims(bg_depth, src_mask, "background depth and source mask")
    moved = warp_mask(src_mask, t, out_dims)
    sampled, _ = warp_field(bg_depth.values, t, out_dims, bg_depth.dims)
    values = np.where(moved.bits, sampled, 0.0)
    return DepthMap(values, raw_min=0.0, raw_max=1.0)


def depth_delta(bg_depth, fg_depth, mask):
    """Pixel-wise background-minus-foreground depth under the mask."""
    require_same_dims(bg_depth, fg_depth, "background and foreground depth")
    require_same_dims(bg_depth, mask, "depth and mask")
    values = np.where(mask.bits, bg_depth.values - fg_depth.values, 0.0)
    return DepthDelta(values, mask)


def adjust_intensity(values, delta, lambda1, lambda2):
    """The float-space kernel: clamp((1 + l1*d) * v + l2*d, 0, 1)."""
    values = np.asarray(values, dtype=np.float64)
    delta = np.asarray(delta, dtype=np.float64)
    return np.clip((1.0 + lambda1 * delta) * values + lambda2 * delta, 0.0, 1.0)


def depth_aware_adjust(layer, delta, p=DepthParams()):
    """Modulate layer brightness/contrast by the per-pixel depth change.

    Unmasked pixels keep their exact bytes; masked pixels are adjusted
    in float space and quantized once.
    """
    require_same_dims(layer.image, delta.mask, "layer and depth delta")
    adjusted = adjust_intensity(layer.image.to_float(), delta.values[:, :, None], p.lambda1, p.lambda2)
    out = layer.image.data.copy()
    m = layer.mask.bits
    out[m] = from_float(adjusted)[m]
    return ForegroundLayer(RasterImage(out), layer.mask, layer.regions)
