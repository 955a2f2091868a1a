"""Shared raster types and numeric conventions.

Coordinate convention used everywhere: x grows rightward, y grows
downward, and integer coordinates address pixel centers with the origin
at the top-left pixel. 8-bit samples convert to floats as v/255 and back
with round-half-up, so that the round trip is the identity.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ValidationError


def to_float(samples):
    """8-bit samples -> float64 in [0, 1]."""
    return np.asarray(samples).astype(np.float64) / 255.0


def from_float(values):
    """Float values in [0, 1] -> 8-bit samples, round-half-up, out-of-range clamped."""
    v = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    return np.floor(v * 255.0 + 0.5).astype(np.uint8)


def _locked(arr):
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


class RasterImage:
    """Immutable H x W x 3 image of 8-bit RGB samples."""

    __slots__ = ("data",)

    def __init__(self, data):
        data = np.asarray(data)
        if data.ndim != 3 or data.shape[2] != 3:
            raise ValidationError(f"expected an HxWx3 array, got shape {data.shape}")
        if data.dtype != np.uint8:
            raise ValidationError(f"expected uint8 samples, got {data.dtype}")
        self.data = _locked(data.copy())

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def dims(self):
        """(width, height)."""
        return (self.data.shape[1], self.data.shape[0])

    def to_float(self):
        return to_float(self.data)

    @classmethod
    def from_float(cls, values):
        return cls(from_float(values))

    def __repr__(self):
        return f"RasterImage({self.width}x{self.height})"


class BinaryMask:
    """Immutable H x W boolean field; True marks foreground/text."""

    __slots__ = ("bits",)

    def __init__(self, bits):
        bits = np.asarray(bits)
        if bits.ndim != 2:
            raise ValidationError(f"expected an HxW array, got shape {bits.shape}")
        self.bits = _locked(bits.astype(bool))

    @property
    def width(self):
        return self.bits.shape[1]

    @property
    def height(self):
        return self.bits.shape[0]

    @property
    def dims(self):
        return (self.bits.shape[1], self.bits.shape[0])

    @property
    def count(self):
        """Number of True pixels."""
        return int(self.bits.sum())

    def complement(self):
        return BinaryMask(~self.bits)

    def dilate(self, radius):
        """Chebyshev (square window) dilation by `radius` pixels."""
        return BinaryMask(_dilate_bits(self.bits, radius))

    def erode(self, radius):
        """Chebyshev erosion; pixels beyond the border count as background."""
        if radius <= 0:
            return BinaryMask(self.bits)
        return BinaryMask(~_dilate_bits(~self.bits, radius))

    def __and__(self, other):
        return BinaryMask(self.bits & other.bits)

    def __or__(self, other):
        return BinaryMask(self.bits | other.bits)

    def __invert__(self):
        return self.complement()

    def __repr__(self):
        return f"BinaryMask({self.width}x{self.height}, {self.count} set)"


def _shifted(bits, s, axis):
    out = np.zeros_like(bits)
    src = [slice(None), slice(None)]
    dst = [slice(None), slice(None)]
    if s > 0:
        dst[axis] = slice(s, None)
        src[axis] = slice(None, -s)
    else:
        dst[axis] = slice(None, s)
        src[axis] = slice(-s, None)
    out[tuple(dst)] = bits[tuple(src)]
    return out


def _dilate_bits(bits, radius):
    # separable: a square window is a 1-D window per axis
    out = bits.copy()
    if radius <= 0:
        return out
    for axis in (0, 1):
        acc = out.copy()
        for s in range(1, radius + 1):
            acc |= _shifted(out, s, axis)
            acc |= _shifted(out, -s, axis)
        out = acc
    return out


class DepthMap:
    """Immutable H x W depth field, normalized to [0, 1].

    raw_min/raw_max record the value range seen at load/build time;
    `degenerate` is set when that range was empty (constant input), in
    which case every value is 0.5.
    """

    __slots__ = ("values", "raw_min", "raw_max", "degenerate")

    def __init__(self, values, raw_min=0.0, raw_max=1.0, degenerate=False):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2:
            raise ValidationError(f"expected an HxW array, got shape {values.shape}")
        if values.size and (values.min() < -1e-9 or values.max() > 1.0 + 1e-9):
            raise ValidationError("depth values must lie in [0, 1]")
        self.values = _locked(np.clip(values, 0.0, 1.0))
        self.raw_min = float(raw_min)
        self.raw_max = float(raw_max)
        self.degenerate = bool(degenerate)

    @classmethod
    def from_raw(cls, raw):
        """Normalize raw depth samples with (v - min) / (max - min)."""
        raw = np.asarray(raw, dtype=np.float64)
        if not np.all(np.isfinite(raw)):
            raise ValidationError("raw depth contains non-finite values")
        lo, hi = float(raw.min()), float(raw.max())
        if hi > lo:
            return cls((raw - lo) / (hi - lo), raw_min=lo, raw_max=hi)
        return cls(np.full(raw.shape, 0.5), raw_min=lo, raw_max=hi, degenerate=True)

    @property
    def width(self):
        return self.values.shape[1]

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def dims(self):
        return (self.values.shape[1], self.values.shape[0])

    def __repr__(self):
        tag = ", degenerate" if self.degenerate else ""
        return f"DepthMap({self.width}x{self.height}{tag})"


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box: top-left (x, y), extent (w, h) in pixels."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValidationError(f"bbox extent must be >= 1, got {self.w}x{self.h}")

    def clipped(self, width, height):
        """Intersection with a width x height canvas as (x0, y0, x1, y1), or None."""
        x0 = max(self.x, 0)
        y0 = max(self.y, 0)
        x1 = min(self.x + self.w, width)
        y1 = min(self.y + self.h, height)
        if x0 >= x1 or y0 >= y1:
            return None
        return (x0, y0, x1, y1)

    @property
    def center(self):
        return (self.x + (self.w - 1) / 2.0, self.y + (self.h - 1) / 2.0)


@dataclass(frozen=True)
class TextRegion:
    """One detected text region: box, recognized content, optional edits."""

    bbox: BBox
    text: str
    tampered_text: str | None = None
    prompt: str | None = None

    def __post_init__(self):
        if not self.text:
            raise ValidationError("region text must be non-empty")


def require_same_dims(a, b, what="operands"):
    """Raise DimensionMismatchError unless a and b share (width, height)."""
    if a.dims != b.dims:
        raise DimensionMismatchError(f"{what} differ in size: {a.dims} vs {b.dims}")
