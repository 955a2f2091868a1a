"""Deterministic synthetic scenes for tests and the ablation demo.

The ramp scene models a wall lit from the left: pixel value =
illumination(x) * albedo, with textured albedo for both background and
glyph pixels, and a depth map whose gradient tracks the illumination
falloff. Moving text to the right therefore lands it in a darker,
deeper part of the scene, which is exactly the situation the
depth-aware adjustment is built for.
"""

from dataclasses import dataclass

import numpy as np

from .core import BBox, BinaryMask, DepthMap, RasterImage, TextRegion, from_float
from .foreground import DetectionSet

# mild per-channel tints so the three channels are exercised distinctly
_BG_TINT = np.array([1.0, 0.97, 0.92])
_GLYPH_TINT = np.array([0.95, 0.99, 1.0])


def bar_glyph_bits(w, h, bar=4, gap=2):
    """A vertical-bar block glyph pattern covering bar/(bar+gap) of the box."""
    bits = np.zeros((h, w), dtype=bool)
    period = bar + gap
    for x in range(w):
        if x % period < bar:
            bits[:, x] = True
    return bits


@dataclass(frozen=True)
class RampScene:
    image: RasterImage          # scene with text
    background: RasterImage     # same scene without text
    depth: DepthMap             # left-to-right depth ramp
    detections: DetectionSet
    glyph: BinaryMask           # exact glyph pixels of the original text
    bbox: BBox


def ramp_scene(width=220, height=120, bbox=BBox(30, 45, 50, 30), seed=7,
               light_falloff=0.78, bg_albedo=(0.55, 0.75), glyph_albedo=(0.62, 0.82)):
    """Build the ramp-lit scene with one textured text block.

    Albedo ranges overlap on purpose: the interesting comparisons are
    photometric, not segmentation, and overlapping palettes keep the
    value histograms broad enough for bin-wise metrics to discriminate.
    """
    rng = np.random.default_rng(seed)
    xs = np.arange(width, dtype=np.float64)
    light = 1.0 - light_falloff * xs / (width - 1)

    albedo = rng.uniform(bg_albedo[0], bg_albedo[1], size=(height, width))
    bg = light[None, :, None] * albedo[:, :, None] * _BG_TINT[None, None, :]

    glyph_bits = np.zeros((height, width), dtype=bool)
    block = bar_glyph_bits(bbox.w, bbox.h)
    glyph_bits[bbox.y : bbox.y + bbox.h, bbox.x : bbox.x + bbox.w] = block

    scene = bg.copy()
    g_albedo = rng.uniform(glyph_albedo[0], glyph_albedo[1], size=int(glyph_bits.sum()))
    light_2d = np.tile(light, (height, 1))
    scene[glyph_bits] = light_2d[glyph_bits][:, None] * g_albedo[:, None] * _GLYPH_TINT[None, :]

    depth_vals = 1.0 - xs / (width - 1)
    depth = DepthMap(np.tile(depth_vals, (height, 1)), raw_min=0.0, raw_max=1.0)

    dets = DetectionSet(
        (TextRegion(bbox=bbox, text="RAMP"),),
        (width, height),
    )
    return RampScene(
        image=RasterImage(from_float(scene)),
        background=RasterImage(from_float(bg)),
        depth=depth,
        detections=dets,
        glyph=BinaryMask(glyph_bits),
        bbox=bbox,
    )


@dataclass(frozen=True)
class FlatScene:
    image: RasterImage
    background: RasterImage
    detections: DetectionSet
    glyph: BinaryMask
    bbox: BBox
    bg_color: tuple
    glyph_color: tuple


def flat_scene(width=160, height=90, bbox=BBox(20, 30, 42, 24),
               bg_color=(80, 90, 100), glyph_color=(220, 210, 200)):
    """Two exact colors on a flat background: fully predictable by hand."""
    bg = np.empty((height, width, 3), dtype=np.uint8)
    bg[:, :] = bg_color
    glyph_bits = np.zeros((height, width), dtype=bool)
    glyph_bits[bbox.y : bbox.y + bbox.h, bbox.x : bbox.x + bbox.w] = bar_glyph_bits(bbox.w, bbox.h)
    scene = bg.copy()
    scene[glyph_bits] = glyph_color
    dets = DetectionSet((TextRegion(bbox=bbox, text="FLAT"),), (width, height))
    return FlatScene(
        image=RasterImage(scene),
        background=RasterImage(bg),
        detections=dets,
        glyph=BinaryMask(glyph_bits),
        bbox=bbox,
        bg_color=tuple(bg_color),
        glyph_color=tuple(glyph_color),
    )
