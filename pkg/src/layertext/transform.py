"""Planar homographies and foreground-layer resampling.

Every geometric operation (rotation, translation, scaling, 4-point quad
warp) is a 3x3 homography in pixel coordinates, so arbitrary sequences
compose into a single matrix and the layer is resampled exactly once.

Rotation sign: positive angles rotate counter-clockwise in the usual
mathematical sense applied to y-down raster coordinates, which reads as
clockwise on screen.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import BinaryMask, RasterImage, from_float
from .errors import (
    DegenerateQuadError,
    NonPositiveScaleError,
    SingularTransformError,
    ValidationError,
)
from .foreground import ForegroundLayer


class Transform2D:
    """3x3 homography mapping source pixel coords to destination coords.

    Stored scale-normalized (h[2][2] == 1 whenever that entry is nonzero).
    """

    __slots__ = ("h",)

    def __init__(self, h):
        h = np.array(h, dtype=np.float64)
        if h.shape != (3, 3):
            raise ValidationError(f"homography must be 3x3, got {h.shape}")
        if h[2, 2] != 0.0:
            h = h / h[2, 2]
        if abs(np.linalg.det(h)) < 1e-12:
            raise SingularTransformError("homography is singular")
        h.setflags(write=False)
        self.h = h

    def inverse(self):
        """Inverse homography via the adjugate (exact for integer matrices)."""
        m = self.h
        adj = np.array(
            [
                [m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1],
                 m[0, 2] * m[2, 1] - m[0, 1] * m[2, 2],
                 m[0, 1] * m[1, 2] - m[0, 2] * m[1, 1]],
                [m[1, 2] * m[2, 0] - m[1, 0] * m[2, 2],
                 m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0],
                 m[0, 2] * m[1, 0] - m[0, 0] * m[1, 2]],
                [m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0],
                 m[0, 1] * m[2, 0] - m[0, 0] * m[2, 1],
                 m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]],
            ]
        )
        det = m[0, 0] * adj[0, 0] + m[0, 1] * adj[1, 0] + m[0, 2] * adj[2, 0]
        return Transform2D(adj / det)

    def map_points(self, pts):
        """Apply to an (N, 2) array of (x, y) points."""
        pts = np.asarray(pts, dtype=np.float64)
        ones = np.ones((pts.shape[0], 1))
        hom = np.hstack([pts, ones]) @ self.h.T
        return hom[:, :2] / hom[:, 2:3]

    def __repr__(self):
        return f"Transform2D({self.h.tolist()})"


def identity():
    return Transform2D(np.eye(3))


def make_translation(dx, dy):
    return Transform2D([[1.0, 0.0, dx], [0.0, 1.0, dy], [0.0, 0.0, 1.0]])


def make_rotation(theta, center=(0.0, 0.0)):
    """Rotation by `theta` radians about `center`: T(c) . R(theta) . T(-c)."""
    if not math.isfinite(theta):
        raise ValidationError("rotation angle must be finite")
    c, s = math.cos(theta), math.sin(theta)
    cx, cy = center
    r = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return compose(make_translation(cx, cy), compose(Transform2D(r), make_translation(-cx, -cy)))


def make_scaling(sx, sy, center=(0.0, 0.0)):
    if sx <= 0 or sy <= 0:
        raise NonPositiveScaleError(f"scale factors must be > 0, got ({sx}, {sy})")
    cx, cy = center
    s = np.array([[sx, 0.0, 0.0], [0.0, sy, 0.0], [0.0, 0.0, 1.0]])
    return compose(make_translation(cx, cy), compose(Transform2D(s), make_translation(-cx, -cy)))


def _signed_area(quad):
    a = 0.0
    for i in range(4):
        x0, y0 = quad[i]
        x1, y1 = quad[(i + 1) % 4]
        a += x0 * y1 - x1 * y0
    return 0.5 * a


def _has_collinear_triple(quad, tol):
    for i in range(4):
        for j in range(i + 1, 4):
            for k in range(j + 1, 4):
                ax, ay = quad[j][0] - quad[i][0], quad[j][1] - quad[i][1]
                bx, by = quad[k][0] - quad[i][0], quad[k][1] - quad[i][1]
                if abs(ax * by - ay * bx) <= tol:
                    return True
    return False


@dataclass(frozen=True)
class QuadWarp:
    """Four ordered source corners mapped to four destination corners."""

    src_quad: tuple
    dst_quad: tuple

    def __post_init__(self):
        src = tuple((float(x), float(y)) for x, y in self.src_quad)
        dst = tuple((float(x), float(y)) for x, y in self.dst_quad)
        if len(src) != 4 or len(dst) != 4:
            raise ValidationError("quads need exactly 4 corners")
        object.__setattr__(self, "src_quad", src)
        object.__setattr__(self, "dst_quad", dst)
        span = max(1.0, max(abs(v) for pt in src + dst for v in pt))
        tol = 1e-9 * span * span
        for name, quad in (("src", src), ("dst", dst)):
            if _has_collinear_triple(quad, tol):
                raise DegenerateQuadError(f"{name} quad has three collinear corners")
        if _signed_area(src) * _signed_area(dst) <= 0:
            raise DegenerateQuadError("quads must share winding direction")


def make_quad_warp(q):
    """Unique homography sending the 4 src corners onto the 4 dst corners.

    Solved from the standard 8x8 linear system with h[2][2] fixed at 1.
    """
    a = np.zeros((8, 8))
    b = np.zeros(8)
    for i, ((x, y), (u, v)) in enumerate(zip(q.src_quad, q.dst_quad)):
        a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]
        b[2 * i] = u
        a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]
        b[2 * i + 1] = v
    try:
        p = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularTransformError(f"quad warp system is singular: {exc}") from exc
    h = np.array([[p[0], p[1], p[2]], [p[3], p[4], p[5]], [p[6], p[7], 1.0]])
    return Transform2D(h)


def compose(a, b):
    """Transform applying b first, then a."""
    return Transform2D(a.h @ b.h)


def _bilinear(values, sx, sy, valid):
    """Sample (H, W) or (H, W, C) float values at fractional coords.

    Coordinates must already be confined to [0, W-1] x [0, H-1] wherever
    `valid` is set; invalid positions sample garbage and must be masked
    out by the caller.
    """
    h, w = values.shape[:2]
    sx = np.where(valid, sx, 0.0)
    sy = np.where(valid, sy, 0.0)
    x0 = np.floor(sx)
    y0 = np.floor(sy)
    fx = sx - x0
    fy = sy - y0
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    w00 = (1.0 - fx) * (1.0 - fy)
    w10 = fx * (1.0 - fy)
    w01 = (1.0 - fx) * fy
    w11 = fx * fy
    if values.ndim == 3:
        w00, w10, w01, w11 = (w[..., None] for w in (w00, w10, w01, w11))
    return (
        values[y0, x0] * w00
        + values[y0, x1] * w10
        + values[y1, x0] * w01
        + values[y1, x1] * w11
    )


def source_coords(t, out_dims, src_dims):
    """Inverse-map destination pixel centers: (sx, sy, valid) arrays."""
    out_w, out_h = out_dims
    src_w, src_h = src_dims
    tinv = t.inverse().h
    xs, ys = np.meshgrid(np.arange(out_w, dtype=np.float64), np.arange(out_h, dtype=np.float64))
    denom = tinv[2, 0] * xs + tinv[2, 1] * ys + tinv[2, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        sx = (tinv[0, 0] * xs + tinv[0, 1] * ys + tinv[0, 2]) / denom
        sy = (tinv[1, 0] * xs + tinv[1, 1] * ys + tinv[1, 2]) / denom
    valid = (
        np.isfinite(sx)
        & np.isfinite(sy)
        & (denom != 0.0)
        & (sx >= 0.0)
        & (sx <= src_w - 1.0)
        & (sy >= 0.0)
        & (sy <= src_h - 1.0)
    )
    return sx, sy, valid


def warp_mask(mask, t, out_dims):
    """Resample a mask: bilinear on 0/1 values, thresholded at 0.5."""
    sx, sy, valid = source_coords(t, out_dims, mask.dims)
    sampled = _bilinear(mask.bits.astype(np.float64), sx, sy, valid)
    return BinaryMask(valid & (sampled >= 0.5))


def warp_field(values, t, out_dims, src_dims):
    """Resample a scalar float field; out-of-bounds destinations get 0."""
    sx, sy, valid = source_coords(t, out_dims, src_dims)
    sampled = _bilinear(np.asarray(values, dtype=np.float64), sx, sy, valid)
    return np.where(valid, sampled, 0.0), valid


def apply_transform(layer, t, out_dims):
    """Warp a foreground layer onto an out_dims canvas by inverse mapping.

    The image is sampled bilinearly in float space, the mask bilinearly
    then thresholded at 0.5; destinations mapping outside the source are
    black/False. Integer translations and identity are bit-exact.
    """
    sx, sy, valid = source_coords(t, out_dims, layer.image.dims)
    img_f = _bilinear(layer.image.to_float(), sx, sy, valid)
    mask_f = _bilinear(layer.mask.bits.astype(np.float64), sx, sy, valid)
    bits = valid & (mask_f >= 0.5)
    data = from_float(img_f)
    data[~bits] = 0
    return ForegroundLayer(RasterImage(data), BinaryMask(bits), layer.regions)
