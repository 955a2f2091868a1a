"""Command-line interface.

Exit codes: 0 success, 2 validation error (bad inputs, files, or
script), 3 provider error (external executable failed).
"""

import argparse
import json
import sys

from .core import BinaryMask
from .errors import ProviderError, ValidationError
from .composite import adjust_gamma, adjust_linear, compose_hard, histogram_match, mask_annulus
from .depth import DepthParams, depth_aware_adjust, depth_delta
from .foreground import ForegroundLayer, extract_foreground
from .inpaint import InpaintConfig, inpaint_baseline, inpaint_external
from .pipeline import EditScript, evaluate, parse_transform_ops, run_pipeline, _combined
from .transform import apply_transform
from .metrics import histogram_to_csv, intensity_histogram
from . import fileio

import numpy as np


def _build_parser():
    parser = argparse.ArgumentParser(prog="layertext",
                                     description="Layered scene-text editing toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an edit script")
    p_run.add_argument("script", help="path to the edit script JSON")

    p_eval = sub.add_parser("evaluate", help="histogram similarity of an edit")
    p_eval.add_argument("--edited", required=True)
    p_eval.add_argument("--reference", required=True)
    p_eval.add_argument("--mask", help="restrict both histograms to this mask")
    p_eval.add_argument("--pred", help="recognized text")
    p_eval.add_argument("--target", help="target text")
    p_eval.add_argument("--out", help="write the JSON report here")
    p_eval.add_argument("--histogram-csv", metavar="PREFIX",
                        help="dump PREFIX_reference.csv / PREFIX_edited.csv")

    p_inp = sub.add_parser("inpaint", help="restore the background under a mask")
    p_inp.add_argument("--image", required=True)
    p_inp.add_argument("--mask", required=True)
    p_inp.add_argument("--out", required=True)
    p_inp.add_argument("--method", choices=["baseline", "external"], default="baseline")
    p_inp.add_argument("--provider", help="provider command (shell string)")
    p_inp.add_argument("--max-iter", type=int, default=2000)
    p_inp.add_argument("--tolerance", type=float, default=1e-4)
    p_inp.add_argument("--dilation", type=int, default=2)

    p_tr = sub.add_parser("transform", help="geometrically transform a layer")
    p_tr.add_argument("--image", required=True)
    p_tr.add_argument("--mask", help="layer mask PNG (default: all pixels)")
    p_tr.add_argument("--ops", required=True,
                      help='JSON list, e.g. \'[{"translate": [40, 0]}]\'')
    p_tr.add_argument("--out", required=True)
    p_tr.add_argument("--out-mask")
    p_tr.add_argument("--width", type=int, help="output canvas width (default: input)")
    p_tr.add_argument("--height", type=int)

    p_cmp = sub.add_parser("compose", help="adjust a layer and composite it")
    p_cmp.add_argument("--background", required=True)
    p_cmp.add_argument("--foreground", required=True)
    p_cmp.add_argument("--mask", required=True)
    p_cmp.add_argument("--out", required=True)
    p_cmp.add_argument("--method", default="none",
                       choices=["none", "linear", "gamma", "histogram", "depth_aware"])
    p_cmp.add_argument("--gamma", type=float)
    p_cmp.add_argument("--delta", type=float, default=0.05)
    p_cmp.add_argument("--histogram-global", action="store_true")
    p_cmp.add_argument("--bg-depth", help="background depth (needed for depth_aware)")
    p_cmp.add_argument("--fg-depth", help="foreground depth (needed for depth_aware)")
    p_cmp.add_argument("--lambda1", type=float, default=0.5)
    p_cmp.add_argument("--lambda2", type=float, default=0.3)
    return parser


def _cmd_run(args):
    arts = run_pipeline(EditScript.load(args.script))
    print(json.dumps({"final": arts.final, "manifest": arts.manifest}, indent=2))
    return 0


def _cmd_evaluate(args):
    if (args.pred is None) != (args.target is None):
        raise ValidationError("--pred and --target must be given together")
    if args.histogram_csv:
        ref = fileio.load_image(args.reference)
        edited = fileio.load_image(args.edited)
        m = fileio.load_mask(args.mask) if args.mask else None
        histogram_to_csv(intensity_histogram(ref, m, normalize=True),
                         f"{args.histogram_csv}_reference.csv")
        histogram_to_csv(intensity_histogram(edited, m, normalize=True),
                         f"{args.histogram_csv}_edited.csv")
    report = evaluate(args.edited, args.reference, mask=args.mask,
                      pred_text=args.pred, target_text=args.target, out_json=args.out)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0


def _cmd_inpaint(args):
    img = fileio.load_image(args.image)
    mask = fileio.load_mask(args.mask)
    if args.method == "external":
        if not args.provider:
            raise ValidationError("--method external requires --provider")
        out = inpaint_external(img, mask, args.provider)
    else:
        cfg = InpaintConfig(max_iter=args.max_iter, tolerance=args.tolerance,
                            dilation_radius=args.dilation)
        out = inpaint_baseline(img, mask, cfg)
    fileio.save_image(out, args.out)
    return 0


def _load_cli_layer(image_path, mask_path):
    img = fileio.load_image(image_path)
    if mask_path:
        mask = fileio.load_mask(mask_path)
    else:
        mask = BinaryMask(np.ones((img.height, img.width), dtype=bool))
    return extract_foreground(img, mask)


def _cmd_transform(args):
    layer = _load_cli_layer(args.image, args.mask)
    try:
        ops_spec = json.loads(args.ops)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"--ops is not valid JSON: {exc}") from exc
    cx = (layer.image.width - 1) / 2.0
    cy = (layer.image.height - 1) / 2.0
    ops = parse_transform_ops(ops_spec, default_center=(cx, cy))
    dims = (args.width or layer.image.width, args.height or layer.image.height)
    moved = apply_transform(layer, _combined(ops), dims)
    fileio.save_image(moved.image, args.out)
    if args.out_mask:
        fileio.save_mask(moved.mask, args.out_mask)
    return 0


def _cmd_compose(args):
    bg = fileio.load_image(args.background)
    fg_img = fileio.load_image(args.foreground)
    mask = fileio.load_mask(args.mask)
    layer = extract_foreground(fg_img, mask)
    if args.method == "linear":
        layer = adjust_linear(layer, args.gamma if args.gamma is not None else 1.1, args.delta)
    elif args.method == "gamma":
        layer = adjust_gamma(layer, args.gamma if args.gamma is not None else 0.8)
    elif args.method == "histogram":
        region = None if args.histogram_global else mask_annulus(layer.mask)
        layer = histogram_match(layer, bg, region)
    elif args.method == "depth_aware":
        if not (args.bg_depth and args.fg_depth):
            raise ValidationError("--method depth_aware requires --bg-depth and --fg-depth")
        bg_d = fileio.load_depth(args.bg_depth)
        fg_d = fileio.load_depth(args.fg_depth)
        dd = depth_delta(bg_d, fg_d, layer.mask)
        layer = depth_aware_adjust(layer, dd, DepthParams(args.lambda1, args.lambda2))
    fileio.save_image(compose_hard(bg, layer), args.out)
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "evaluate": _cmd_evaluate,
    "inpaint": _cmd_inpaint,
    "transform": _cmd_transform,
    "compose": _cmd_compose,
}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ProviderError as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry():
    sys.exit(main())
