"""Hand-built file assets for I/O tests.

These writers construct PNG/PPM/PFM bytes directly from the format
specs (zlib + struct only), so decode tests do not depend on the same
codec the package uses internally.
"""

import struct
import zlib

import numpy as np


def _png_chunk(tag, payload):
    return (struct.pack(">I", len(payload)) + tag + payload
            + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF))


def _png(width, height, bit_depth, color_type, raw_rows, extra_chunks=()):
    ihdr = struct.pack(">IIBBBBB", width, height, bit_depth, color_type, 0, 0, 0)
    data = b"\x89PNG\r\n\x1a\n" + _png_chunk(b"IHDR", ihdr)
    for tag, payload in extra_chunks:
        data += _png_chunk(tag, payload)
    data += _png_chunk(b"IDAT", zlib.compress(raw_rows))
    data += _png_chunk(b"IEND", b"")
    return data


def png_rgb8(pixels):
    """pixels: (H, W, 3) uint8 array -> PNG bytes (filter 0 rows)."""
    pixels = np.asarray(pixels, dtype=np.uint8)
    h, w, _ = pixels.shape
    raw = b"".join(b"\x00" + pixels[y].tobytes() for y in range(h))
    return _png(w, h, 8, 2, raw)


def png_gray8(values):
    """values: (H, W) uint8 array -> grayscale PNG bytes."""
    values = np.asarray(values, dtype=np.uint8)
    h, w = values.shape
    raw = b"".join(b"\x00" + values[y].tobytes() for y in range(h))
    return _png(w, h, 8, 0, raw)


def png_gray16(values):
    """values: (H, W) uint16 array -> 16-bit grayscale PNG bytes."""
    values = np.asarray(values, dtype=np.uint16)
    h, w = values.shape
    raw = b"".join(
        b"\x00" + b"".join(struct.pack(">H", int(v)) for v in values[y]) for y in range(h)
    )
    return _png(w, h, 16, 0, raw)


def png_rgba8(pixels, alpha):
    """RGB + alpha plane -> RGBA PNG bytes."""
    pixels = np.asarray(pixels, dtype=np.uint8)
    alpha = np.asarray(alpha, dtype=np.uint8)
    h, w, _ = pixels.shape
    rgba = np.dstack([pixels, alpha])
    raw = b"".join(b"\x00" + rgba[y].tobytes() for y in range(h))
    return _png(w, h, 8, 6, raw)


def png_rgb16(pixels):
    """16-bit truecolor PNG bytes (an unsupported input)."""
    pixels = np.asarray(pixels, dtype=np.uint16)
    h, w, _ = pixels.shape
    raw = b"".join(
        b"\x00" + b"".join(struct.pack(">H", int(v)) for v in pixels[y].ravel())
        for y in range(h)
    )
    return _png(w, h, 16, 2, raw)


def png_palette_alpha(width, height):
    """Tiny palette PNG with a tRNS chunk (an unsupported input)."""
    raw = b"".join(b"\x00" + bytes([0] * width) for _ in range(height))
    plte = bytes([10, 20, 30]) + bytes([0] * 765)
    ihdr = struct.pack(">IIBBBBB", width, height, 8, 3, 0, 0, 0)
    data = b"\x89PNG\r\n\x1a\n" + _png_chunk(b"IHDR", ihdr)
    data += _png_chunk(b"PLTE", plte)
    data += _png_chunk(b"tRNS", b"\x00")
    data += _png_chunk(b"IDAT", zlib.compress(raw))
    data += _png_chunk(b"IEND", b"")
    return data


def ppm_p6(pixels, comment=None):
    """pixels: (H, W, 3) uint8 -> binary PPM bytes."""
    pixels = np.asarray(pixels, dtype=np.uint8)
    h, w, _ = pixels.shape
    header = b"P6\n"
    if comment:
        header += b"# " + comment.encode("ascii") + b"\n"
    header += f"{w} {h}\n255\n".encode("ascii")
    return header + pixels.tobytes()


def pfm_gray(values):
    """values: (H, W) float array -> little-endian grayscale PFM bytes."""
    values = np.asarray(values, dtype="<f4")
    h, w = values.shape
    header = f"Pf\n{w} {h}\n-1.0\n".encode("ascii")
    return header + values[::-1].tobytes()


def write(path, data):
    with open(path, "wb") as fh:
        fh.write(data)
    return str(path)
