"""Background restoration under the text mask.

The built-in baseline is a harmonic fill: Jacobi iteration of the
discrete Laplace equation over the masked pixels, with the surrounding
known pixels as Dirichlet boundary. Pixels outside the (dilated) mask
are never touched. Heavier synthesis is delegated to an external
provider executable.
"""

from dataclasses import dataclass

import numpy as np

from .core import RasterImage, from_float, require_same_dims
from .errors import MaskCoversImageError, ValidationError
from . import providers


@dataclass(frozen=True)
class InpaintConfig:
    method: str = "baseline"
    max_iter: int = 2000
    tolerance: float = 1e-4
    dilation_radius: int = 2

    def __post_init__(self):
        if self.method not in ("baseline", "external"):
            raise ValidationError(f"unknown inpaint method {self.method!r}")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be >= 1")
        if self.tolerance <= 0:
            raise ValidationError("tolerance must be > 0")
        if self.dilation_radius < 0:
            raise ValidationError("dilation_radius must be >= 0")


def inpaint_baseline(img, mask, cfg=InpaintConfig()):
    """Fill the masked region by repeated 4-neighbor averaging.

    The mask is dilated by cfg.dilation_radius first (to swallow
    anti-aliased fringes); iteration stops once the largest per-channel
    change drops to cfg.tolerance or after cfg.max_iter sweeps. The fill
    runs in float space and is quantized once at the end; every pixel
    outside the dilated mask keeps its exact input bytes.
    """
    require_same_dims(img, mask, "image and mask")
    hole = mask.dilate(cfg.dilation_radius).bits
    if hole.all():
        raise MaskCoversImageError("mask (after dilation) covers the whole image")
    if not hole.any():
        return RasterImage(img.data)

    field = img.to_float()
    known = ~hole
    # seeding holes at the boundary mean makes constant regions converge
    # in a single sweep and keeps the fill inside the known value range
    field[hole] = field[known].mean(axis=0)

    h, w = hole.shape
    cnt = np.zeros((h, w))
    cnt[1:, :] += 1
    cnt[:-1, :] += 1
    cnt[:, 1:] += 1
    cnt[:, :-1] += 1
    cnt_hole = cnt[hole][:, None]

    for _ in range(cfg.max_iter):
        s = np.zeros_like(field)
        s[1:, :, :] += field[:-1, :, :]
        s[:-1, :, :] += field[1:, :, :]
        s[:, 1:, :] += field[:, :-1, :]
        s[:, :-1, :] += field[:, 1:, :]
        new_vals = s[hole] / cnt_hole
        delta = float(np.abs(new_vals - field[hole]).max())
        field[hole] = new_vals
        if delta <= cfg.tolerance:
            break

    out = img.data.copy()
    out[hole] = from_float(field)[hole]
    return RasterImage(out)


def inpaint_external(img, mask, provider):
    """Restore the background through the external inpainting provider.

    File exchange: `<cmd> --image in.png --mask mask.png --out out.png`
    where the mask is 8-bit gray with 255 marking the hole. The output
    must be an 8-bit RGB PNG of identical dimensions.
    """
    require_same_dims(img, mask, "image and mask")
    return providers.inpaint_via_provider(img, mask, provider)
