"""Bit-exact file I/O: 8-bit PNG/PPM images, mask PNGs, 16-bit PNG / PFM depth.

Formats are sniffed from magic bytes, never from the file extension.
No color management is applied anywhere; samples pass through untouched.
"""

import io
import struct
import warnings

import numpy as np
from PIL import Image

from .core import BinaryMask, DepthMap, RasterImage
from .errors import CorruptDataError, UnsupportedFormatError

_PNG_SIG = b"\x89PNG\r\n\x1a\n"


def _read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


def _png_header(data):
    """(width, height, bit_depth, color_type) from the IHDR chunk."""
    if len(data) < 33 or data[12:16] != b"IHDR":
        raise CorruptDataError("PNG missing IHDR chunk")
    w, h = struct.unpack(">II", data[16:24])
    bit_depth, color_type = data[24], data[25]
    return w, h, bit_depth, color_type


def _open_png(data):
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
        return img
    except Exception as exc:
        raise CorruptDataError(f"PNG failed to decode: {exc}") from exc


def load_image(path):
    """Decode an 8-bit RGB (or gray, promoted to RGB) PNG or binary PPM.

    Alpha channels are dropped with a warning. 16-bit samples and
    palettes with transparency are rejected.
    """
    data = _read_bytes(path)
    if data.startswith(_PNG_SIG):
        return _load_png_image(data, path)
    if data.startswith(b"P6"):
        return _load_ppm(data, path)
    raise UnsupportedFormatError(f"{path}: not a PNG or binary PPM")


def _load_png_image(data, path):
    _, _, bit_depth, color_type = _png_header(data)
    if bit_depth == 16:
        raise UnsupportedFormatError(f"{path}: 16-bit PNG is not an image input (use load_depth)")
    if bit_depth > 8:
        raise UnsupportedFormatError(f"{path}: unsupported bit depth {bit_depth}")
    img = _open_png(data)
    if color_type == 3 and "transparency" in img.info:
        raise UnsupportedFormatError(f"{path}: palette PNG with alpha is unsupported")
    if img.mode in ("RGBA", "LA") or color_type in (4, 6):
        warnings.warn(f"{path}: alpha channel dropped", stacklevel=2)
    if img.mode != "RGB":
        img = img.convert("RGB")
    arr = np.asarray(img, dtype=np.uint8)
    return RasterImage(arr)


def _ppm_tokens(data, count):
    """First `count` whitespace-separated header tokens (with # comments); returns (tokens, offset)."""
    tokens = []
    pos = 0
    while len(tokens) < count:
        if pos >= len(data):
            raise CorruptDataError("PPM header truncated")
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            start = pos
            while pos < len(data) and not data[pos : pos + 1].isspace():
                pos += 1
            tokens.append(data[start:pos])
    # exactly one whitespace byte separates the header from the raster
    return tokens, pos + 1


def _load_ppm(data, path):
    try:
        (magic, w, h, maxval), offset = _ppm_tokens(data, 4)
        width, height, maxv = int(w), int(h), int(maxval)
    except (ValueError, CorruptDataError) as exc:
        raise CorruptDataError(f"{path}: bad PPM header: {exc}") from exc
    if magic != b"P6":
        raise UnsupportedFormatError(f"{path}: only binary P6 PPM is supported")
    if maxv != 255:
        raise UnsupportedFormatError(f"{path}: PPM maxval {maxv} unsupported (must be 255)")
    need = width * height * 3
    raster = data[offset : offset + need]
    if len(raster) < need:
        raise CorruptDataError(f"{path}: PPM raster truncated ({len(raster)} of {need} bytes)")
    arr = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)
    return RasterImage(arr)


def save_image(img, path):
    """Write an 8-bit RGB PNG; reload yields identical samples."""
    Image.fromarray(np.asarray(img.data), mode="RGB").save(path, format="PNG")


def load_mask(path):
    """8-bit gray PNG -> BinaryMask; samples >= 128 are True."""
    data = _read_bytes(path)
    if not data.startswith(_PNG_SIG):
        raise UnsupportedFormatError(f"{path}: mask must be a PNG")
    _, _, bit_depth, _ = _png_header(data)
    if bit_depth > 8:
        raise UnsupportedFormatError(f"{path}: mask must be 8-bit")
    img = _open_png(data)
    arr = np.asarray(img.convert("L"), dtype=np.uint8)
    return BinaryMask(arr >= 128)


def save_mask(mask, path):
    """Write a mask as an 8-bit gray PNG (255 = True)."""
    arr = np.where(np.asarray(mask.bits), 255, 0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path, format="PNG")


def load_layer(path):
    """Load a replacement layer PNG: (RasterImage, BinaryMask | None).

    Unlike load_image this keeps an alpha channel, returning it as a
    mask (alpha >= 128). Without alpha the mask is None and the caller
    must supply a sidecar.
    """
    data = _read_bytes(path)
    if not data.startswith(_PNG_SIG):
        raise UnsupportedFormatError(f"{path}: layer must be a PNG")
    _, _, bit_depth, color_type = _png_header(data)
    if bit_depth > 8:
        raise UnsupportedFormatError(f"{path}: layer must be 8-bit")
    img = _open_png(data)
    if color_type in (4, 6) or img.mode in ("RGBA", "LA"):
        rgba = np.asarray(img.convert("RGBA"), dtype=np.uint8)
        return RasterImage(rgba[:, :, :3]), BinaryMask(rgba[:, :, 3] >= 128)
    if img.mode != "RGB":
        img = img.convert("RGB")
    return RasterImage(np.asarray(img, dtype=np.uint8)), None


def load_depth(path):
    """Decode a 16-bit gray PNG or little-endian PFM into a normalized DepthMap."""
    data = _read_bytes(path)
    if data.startswith(_PNG_SIG):
        return _load_depth_png(data, path)
    if data.startswith(b"Pf") or data.startswith(b"PF"):
        return _load_pfm(data, path)
    raise UnsupportedFormatError(f"{path}: depth must be a 16-bit gray PNG or PFM")


def _load_depth_png(data, path):
    _, _, bit_depth, color_type = _png_header(data)
    if bit_depth != 16 or color_type != 0:
        raise UnsupportedFormatError(f"{path}: depth PNG must be 16-bit single-channel")
    img = _open_png(data)
    raw = np.asarray(img, dtype=np.float64)
    return _normalized(raw, path)


def _load_pfm(data, path):
    try:
        (magic, w, h, scale), offset = _ppm_tokens(data, 4)
        width, height, scalef = int(w), int(h), float(scale)
    except (ValueError, CorruptDataError) as exc:
        raise CorruptDataError(f"{path}: bad PFM header: {exc}") from exc
    if magic == b"PF":
        raise UnsupportedFormatError(f"{path}: color PFM unsupported, need grayscale 'Pf'")
    if magic != b"Pf":
        raise CorruptDataError(f"{path}: not a PFM file")
    if scalef >= 0:
        raise UnsupportedFormatError(f"{path}: big-endian PFM unsupported")
    need = width * height * 4
    raster = data[offset : offset + need]
    if len(raster) < need:
        raise CorruptDataError(f"{path}: PFM raster truncated")
    raw = np.frombuffer(raster, dtype="<f4").reshape(height, width).astype(np.float64)
    if not np.all(np.isfinite(raw)):
        raise CorruptDataError(f"{path}: PFM contains non-finite values")
    # PFM stores rows bottom-to-top
    return _normalized(raw[::-1], path)


def _normalized(raw, path):
    depth = DepthMap.from_raw(raw)
    if depth.degenerate:
        warnings.warn(f"{path}: constant depth data, normalized to all-0.5", stacklevel=3)
    return depth


def save_depth(depth, path):
    """Write depth values as a grayscale little-endian PFM."""
    values = np.asarray(depth.values, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(b"Pf\n")
        fh.write(f"{depth.width} {depth.height}\n".encode("ascii"))
        fh.write(b"-1.0\n")
        fh.write(values[::-1].tobytes())
