"""Final composition and the three classic adjustment baselines.

Composition is a hard per-pixel case split on the mask: foreground
where set, background elsewhere, no feathering. The baselines (fixed
linear scaling, gamma correction, global/local histogram matching)
exist for comparison against the depth-aware adjustment.
"""

from dataclasses import dataclass

import numpy as np

from .core import RasterImage, from_float, require_same_dims
from .errors import (
    EmptyMaskError,
    EmptyReferenceError,
    NonPositiveGammaError,
    ValidationError,
)
from .foreground import ForegroundLayer

COMPOSE_METHODS = ("depth_aware", "linear", "gamma", "histogram", "none")


@dataclass(frozen=True)
class CompositionJob:
    """Per-region composition choice and its parameters.

    `gamma` is the linear gain or the gamma exponent depending on the
    method; `delta` is the linear offset in normalized units.
    `histogram_global` switches the histogram reference from the local
    annulus around the mask to the whole background.
    """

    method: str = "depth_aware"
    gamma: float = 1.1
    delta: float = 0.05
    histogram_global: bool = False

    def __post_init__(self):
        if self.method not in COMPOSE_METHODS:
            raise ValidationError(f"unknown compose method {self.method!r}")
        if self.method in ("linear", "gamma") and self.gamma <= 0:
            raise NonPositiveGammaError(f"gamma must be > 0, got {self.gamma}")


def compose_hard(bg, fg):
    """out(p) = fg(p) where the layer mask is set, else bg(p). Bit-exact."""
    require_same_dims(bg, fg.image, "background and foreground")
    data = np.where(fg.mask.bits[:, :, None], fg.image.data, bg.data)
    return RasterImage(data)


def _apply_masked(layer, values):
    """Quantize float values into the layer's masked pixels only."""
    out = layer.image.data.copy()
    m = layer.mask.bits
    out[m] = from_float(values)[m]
    return ForegroundLayer(RasterImage(out), layer.mask, layer.regions)


def adjust_linear(fg, gamma, delta):
    """Fixed affine adjustment: clamp(gamma * v + delta, 0, 1) per masked pixel."""
    if gamma <= 0:
        raise NonPositiveGammaError(f"gamma must be > 0, got {gamma}")
    return _apply_masked(fg, gamma * fg.image.to_float() + delta)


def adjust_gamma(fg, gamma):
    """Power-law adjustment: v ** gamma per masked pixel, in normalized space."""
    if gamma <= 0:
        raise NonPositiveGammaError(f"gamma must be > 0, got {gamma}")
    return _apply_masked(fg, np.power(fg.image.to_float(), gamma))


def mask_annulus(mask, radius=15):
    """Background ring around a mask: within `radius` px of it but outside it."""
    return mask.dilate(radius) & mask.complement()


def histogram_match(fg, bg, bg_region=None):
    """Remap masked foreground values so each channel's CDF matches the reference.

    The reference is the background restricted to bg_region (or all of
    it). Classic specification: value v maps to the smallest reference
    value r with CDF_ref(r) >= CDF_fg(v).
    """
    require_same_dims(fg.image, bg, "foreground and background")
    m = fg.mask.bits
    if not m.any():
        raise EmptyMaskError("foreground mask is empty")
    if bg_region is not None:
        require_same_dims(bg, bg_region, "background and reference region")
        ref_sel = bg_region.bits
        if not ref_sel.any():
            raise EmptyReferenceError("histogram reference region is empty")
        ref_pixels = bg.data[ref_sel]
    else:
        ref_pixels = bg.data.reshape(-1, 3)

    out = fg.image.data.copy()
    fg_pixels = fg.image.data[m]
    n_fg = fg_pixels.shape[0]
    n_ref = ref_pixels.shape[0]
    for c in range(3):
        cdf_fg = np.cumsum(np.bincount(fg_pixels[:, c], minlength=256)) / n_fg
        cdf_ref = np.cumsum(np.bincount(ref_pixels[:, c], minlength=256)) / n_ref
        lut = np.searchsorted(cdf_ref, cdf_fg, side="left").clip(0, 255).astype(np.uint8)
        out[m, c] = lut[fg_pixels[:, c]]
    return ForegroundLayer(RasterImage(out), fg.mask, fg.regions)
