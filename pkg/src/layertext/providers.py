"""File-exchange protocol for external provider executables.

Heavy models (segmentation, inpainting, depth estimation, text
rendering) run out of process: inputs are written to a fresh temp
directory, the provider command is invoked with path flags, and its
output files are validated and reloaded. Set LAYERTEXT_TMPDIR to place
those temp directories somewhere specific.
"""

import os
import shlex
import shutil
import subprocess
import tempfile

from .core import require_same_dims
from .errors import (
    LayerTextError,
    ProviderBadOutput,
    ProviderLaunchFailure,
    ProviderNonZeroExit,
)
from . import fileio


def as_argv(command):
    """Accept a command as an argv list or a single shell-ish string."""
    if isinstance(command, str):
        return shlex.split(command)
    return [str(tok) for tok in command]


def _workdir():
    base = os.environ.get("LAYERTEXT_TMPDIR") or None
    if base:
        os.makedirs(base, exist_ok=True)
    return tempfile.mkdtemp(prefix="layertext-", dir=base)


def _run(argv):
    try:
        proc = subprocess.run(argv, capture_output=True, text=True)
    except (FileNotFoundError, PermissionError, OSError) as exc:
        raise ProviderLaunchFailure(f"cannot launch provider {argv[0]!r}: {exc}") from exc
    if proc.returncode != 0:
        raise ProviderNonZeroExit(
            f"provider {argv[0]!r} exited {proc.returncode}: {proc.stderr.strip()}",
            stderr=proc.stderr,
        )


def _reload(path, loader, what):
    if not os.path.exists(path):
        raise ProviderBadOutput(f"provider wrote no {what} at {path}")
    try:
        return loader(path)
    except LayerTextError as exc:
        raise ProviderBadOutput(f"provider {what} is invalid: {exc}") from exc


def _check_dims(produced, reference, what):
    try:
        require_same_dims(produced, reference, what)
    except LayerTextError as exc:
        raise ProviderBadOutput(str(exc)) from exc


def inpaint_via_provider(img, mask, command):
    work = _workdir()
    try:
        img_path = os.path.join(work, "in.png")
        mask_path = os.path.join(work, "mask.png")
        out_path = os.path.join(work, "out.png")
        fileio.save_image(img, img_path)
        fileio.save_mask(mask, mask_path)
        _run(as_argv(command) + ["--image", img_path, "--mask", mask_path, "--out", out_path])
        result = _reload(out_path, fileio.load_image, "image")
        _check_dims(result, img, "provider output and input image")
        return result
    finally:
        shutil.rmtree(work, ignore_errors=True)


def depth_via_provider(img, command):
    work = _workdir()
    try:
        img_path = os.path.join(work, "in.png")
        out_path = os.path.join(work, "depth.pfm")
        fileio.save_image(img, img_path)
        _run(as_argv(command) + ["--image", img_path, "--out", out_path])
        result = _reload(out_path, fileio.load_depth, "depth map")
        _check_dims(result, img, "provider depth and input image")
        return result
    finally:
        shutil.rmtree(work, ignore_errors=True)


def segment_via_provider(img, mask, command):
    """Glyph-level mask refinement. Same flag shape as inpainting; the
    output is an 8-bit gray mask PNG (>=128 means text)."""
    work = _workdir()
    try:
        img_path = os.path.join(work, "in.png")
        mask_path = os.path.join(work, "mask.png")
        out_path = os.path.join(work, "out.png")
        fileio.save_image(img, img_path)
        fileio.save_mask(mask, mask_path)
        _run(as_argv(command) + ["--image", img_path, "--mask", mask_path, "--out", out_path])
        result = _reload(out_path, fileio.load_mask, "mask")
        _check_dims(result, img, "provider mask and input image")
        return result
    finally:
        shutil.rmtree(work, ignore_errors=True)


def tamper_via_provider(img, region, command):
    """Render replacement text for one region.

    Invocation: `<cmd> --image in.png --bbox x,y,w,h --text T [--prompt S]
    --out-layer layer.png --out-mask mask.png [--out-text text.txt]`.
    Returns (layer image, layer mask, rendered text or None). The layer
    may be bbox-sized or canvas-sized; the caller registers it.
    """
    work = _workdir()
    try:
        img_path = os.path.join(work, "in.png")
        layer_path = os.path.join(work, "layer.png")
        mask_path = os.path.join(work, "layer_mask.png")
        text_path = os.path.join(work, "text.txt")
        fileio.save_image(img, img_path)
        bbox = region.bbox
        argv = as_argv(command) + [
            "--image", img_path,
            "--bbox", f"{bbox.x},{bbox.y},{bbox.w},{bbox.h}",
            "--text", region.text,
        ]
        if region.prompt:
            argv += ["--prompt", region.prompt]
        argv += ["--out-layer", layer_path, "--out-mask", mask_path, "--out-text", text_path]
        _run(argv)
        layer = _reload(layer_path, fileio.load_image, "layer")
        mask = _reload(mask_path, fileio.load_mask, "layer mask")
        _check_dims(mask, layer, "provider layer and its mask")
        text = None
        if os.path.exists(text_path):
            with open(text_path, "r", encoding="utf-8") as fh:
                text = fh.read().strip()
        return layer, mask, text
    finally:
        shutil.rmtree(work, ignore_errors=True)
