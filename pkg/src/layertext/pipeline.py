"""End-to-end orchestration of an edit script.

A run walks the four stages in order: build and refine the text mask,
cut the foreground layer; restore the background; substitute and
geometrically transform each region's layer; photometrically adjust it
and hard-composite everything back. Stage artifacts are written eagerly
with fixed names so a failing run leaves its completed stages behind,
and every bit of randomness flows from the single script seed, so a
rerun of the same script reproduces identical bytes.
"""

import json
import os
import warnings
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .core import BinaryMask, DepthMap, RasterImage, TextRegion, require_same_dims
from .errors import (
    LayerTextError,
    MissingMaskError,
    OversizedLayerError,
    ScriptError,
    ValidationError,
)
from .foreground import DetectionSet, ForegroundLayer, extract_foreground, generate_mask, kmeans_refine
from .inpaint import InpaintConfig, inpaint_baseline, inpaint_external
from .transform import QuadWarp, apply_transform, compose, identity, make_quad_warp, make_rotation, make_scaling, make_translation
from .depth import DepthParams, depth_aware_adjust, depth_delta, estimate_depth_external, foreground_depth
from .composite import CompositionJob, adjust_gamma, adjust_linear, compose_hard, histogram_match, mask_annulus
from .metrics import MetricReport, compare_histograms, intensity_histogram, ned, sentence_accuracy
from . import fileio, providers


@contextmanager
def _stage(name):
    """Tag errors escaping a stage so failures are attributable."""
    try:
        yield
    except LayerTextError as exc:
        if not getattr(exc, "stage", None):
            exc.stage = name
            exc.args = (f"[stage {name}] {exc.args[0]}",) + exc.args[1:] if exc.args else (f"[stage {name}]",)
        raise


@dataclass
class RegionPlan:
    """Resolved per-region choices: tamper source, transforms, adjustment."""

    region: TextRegion
    tamper: dict | None = None                 # {"layer":..., "mask":...} | {"provider": True}
    transform_ops: list = field(default_factory=list)   # [(name, Transform2D)]
    depth_params: DepthParams = field(default_factory=DepthParams)
    fg_depth_mode: str = "transport"           # or "provider"
    job: CompositionJob = field(default_factory=CompositionJob)


@dataclass
class EditScript:
    """Parsed, path-resolved description of one editing job."""

    input_image: str
    detections: object                 # path or inline list
    output_dir: str
    dump_stages: bool = False
    seed: int = 0
    background_image: str | None = None
    depth_map: str | None = None
    inpaint_method: str = "baseline"   # baseline | external | none
    inpaint_config: InpaintConfig = field(default_factory=InpaintConfig)
    provider_commands: dict = field(default_factory=dict)
    region_configs: list = field(default_factory=list)

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ScriptError(f"{path}: invalid JSON: {exc}") from exc
        return cls.from_dict(obj, base_dir=os.path.dirname(os.path.abspath(path)))

    @classmethod
    def from_dict(cls, obj, base_dir="."):
        def resolve(p):
            return p if os.path.isabs(p) else os.path.join(base_dir, p)

        try:
            input_image = resolve(obj["input_image"])
            detections = obj["detections"]
            output_dir = resolve(obj["output_dir"])
        except KeyError as exc:
            raise ScriptError(f"script missing required field {exc}") from exc
        if isinstance(detections, str):
            detections = resolve(detections)

        inpaint_obj = dict(obj.get("inpaint", {}))
        method = inpaint_obj.pop("method", "baseline")
        if method not in ("baseline", "external", "none"):
            raise ScriptError(f"unknown inpaint method {method!r}")
        try:
            cfg = InpaintConfig(
                method=method if method != "none" else "baseline",
                max_iter=int(inpaint_obj.pop("max_iter", 2000)),
                tolerance=float(inpaint_obj.pop("tolerance", 1e-4)),
                dilation_radius=int(inpaint_obj.pop("dilation_radius", 2)),
            )
        except ValidationError as exc:
            raise ScriptError(f"bad inpaint config: {exc}") from exc
        if inpaint_obj:
            raise ScriptError(f"unknown inpaint keys: {sorted(inpaint_obj)}")

        script = cls(
            input_image=input_image,
            detections=detections,
            output_dir=output_dir,
            dump_stages=bool(obj.get("dump_stages", False)),
            seed=int(obj.get("seed", 0)),
            background_image=resolve(obj["background_image"]) if obj.get("background_image") else None,
            depth_map=resolve(obj["depth_map"]) if obj.get("depth_map") else None,
            inpaint_method=method,
            inpaint_config=cfg,
            provider_commands={k: v for k, v in dict(obj.get("providers", {})).items()},
            region_configs=list(obj.get("regions", [])),
        )
        for rc in script.region_configs:
            tamper = rc.get("tamper")
            if isinstance(tamper, dict) and "layer" in tamper:
                tamper["layer"] = resolve(tamper["layer"])
                if tamper.get("mask"):
                    tamper["mask"] = resolve(tamper["mask"])
        return script


def parse_transform_ops(specs, default_center):
    """Turn the JSON transform list into [(name, Transform2D)], application order."""
    ops = []
    for spec in specs:
        if not isinstance(spec, dict) or len(spec) != 1:
            raise ScriptError(f"each transform entry must have exactly one key, got {spec!r}")
        (name, params), = spec.items()
        if name == "rotate":
            theta = np.deg2rad(float(params["theta_deg"]))
            center = tuple(params.get("center", default_center))
            ops.append(("rotation", make_rotation(theta, center)))
        elif name == "translate":
            dx, dy = params
            ops.append(("translation", make_translation(float(dx), float(dy))))
        elif name == "scale":
            center = tuple(params.get("center", default_center))
            ops.append(("scaling", make_scaling(float(params["sx"]), float(params["sy"]), center)))
        elif name == "warp":
            q = QuadWarp(tuple(map(tuple, params["src"])), tuple(map(tuple, params["dst"])))
            ops.append(("warp", make_quad_warp(q)))
        else:
            raise ScriptError(f"unknown transform op {name!r}")
    return ops


def _combined(ops):
    total = identity()
    for _, t in ops:
        total = compose(t, total)
    return total


def _parse_region_plan(region, rc):
    tamper = rc.get("tamper")
    if tamper in (None, "skip"):
        tamper = None
    elif isinstance(tamper, dict):
        if "layer" not in tamper and not tamper.get("provider"):
            raise ScriptError("tamper must give a layer path or set provider: true")
    else:
        raise ScriptError(f"bad tamper spec {tamper!r}")

    ops = parse_transform_ops(rc.get("transforms", []), default_center=region.bbox.center)

    depth_obj = rc.get("depth", {})
    if "preset" in depth_obj:
        params = DepthParams.from_preset(depth_obj["preset"])
    else:
        params = DepthParams(
            lambda1=float(depth_obj.get("lambda1", 0.5)),
            lambda2=float(depth_obj.get("lambda2", 0.3)),
        )
    fg_depth_mode = rc.get("fg_depth", "transport")
    if fg_depth_mode not in ("transport", "provider"):
        raise ScriptError(f"fg_depth must be 'transport' or 'provider', got {fg_depth_mode!r}")

    compose_obj = dict(rc.get("compose", {}))
    method = compose_obj.get("method", "depth_aware")
    defaults = {"gamma": 0.8 if method == "gamma" else 1.1, "delta": 0.05}
    job = CompositionJob(
        method=method,
        gamma=float(compose_obj.get("gamma", defaults["gamma"])),
        delta=float(compose_obj.get("delta", defaults["delta"])),
        histogram_global=bool(compose_obj.get("global_reference", False)),
    )
    return RegionPlan(region=region, tamper=tamper, transform_ops=ops,
                      depth_params=params, fg_depth_mode=fg_depth_mode, job=job)


@dataclass
class StageArtifacts:
    """Paths of everything a run wrote, plus per-stage statistics."""

    output_dir: str
    final: str
    final_mask: str
    manifest: str
    original: str | None = None
    background: str | None = None
    foreground: str | None = None
    tamper: str | None = None
    depth_word: str | None = None
    depth_image: str | None = None
    transforms: list = field(default_factory=list)    # [(region_idx, op name, path)]
    stats: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "final": self.final,
            "final_mask": self.final_mask,
            "original": self.original,
            "background": self.background,
            "foreground": self.foreground,
            "tamper": self.tamper,
            "depth_word": self.depth_word,
            "depth_image": self.depth_image,
            "transforms": [list(t) for t in self.transforms],
            "stats": self.stats,
        }


def tamper_region(region, source, canvas_dims, image=None, provider_command=None):
    """Build the replacement layer for a region, registered at its bbox origin.

    `source` is either {"layer": path, "mask": optional path, "text": optional}
    (alpha channel doubles as the mask) or {"provider": True}, in which
    case the tamper provider renders the layer. Returns (layer, region
    with tampered_text recorded).
    """
    canvas_w, canvas_h = canvas_dims
    if source.get("provider"):
        if provider_command is None:
            raise ScriptError("tamper provider requested but no tamper provider configured")
        img_layer, layer_mask, text = providers.tamper_via_provider(image, region, provider_command)
    else:
        img_layer, alpha_mask = fileio.load_layer(source["layer"])
        if source.get("mask"):
            layer_mask = fileio.load_mask(source["mask"])
            require_same_dims(img_layer, layer_mask, "replacement layer and its mask")
        elif alpha_mask is not None:
            layer_mask = alpha_mask
        else:
            raise MissingMaskError(f"{source['layer']}: no alpha channel and no sidecar mask")
        text = source.get("text")

    if img_layer.width > canvas_w or img_layer.height > canvas_h:
        raise OversizedLayerError(
            f"replacement layer {img_layer.dims} exceeds canvas {canvas_dims}"
        )

    data = np.zeros((canvas_h, canvas_w, 3), dtype=np.uint8)
    bits = np.zeros((canvas_h, canvas_w), dtype=bool)
    if img_layer.dims == canvas_dims:
        x0, y0 = 0, 0
    else:
        x0, y0 = region.bbox.x, region.bbox.y
    x1 = min(x0 + img_layer.width, canvas_w)
    y1 = min(y0 + img_layer.height, canvas_h)
    sx0, sy0 = max(0, -x0), max(0, -y0)
    x0, y0 = max(x0, 0), max(y0, 0)
    sub_mask = layer_mask.bits[sy0 : sy0 + (y1 - y0), sx0 : sx0 + (x1 - x0)]
    sub_img = img_layer.data[sy0 : sy0 + (y1 - y0), sx0 : sx0 + (x1 - x0)]
    bits[y0:y1, x0:x1] = sub_mask
    data[y0:y1, x0:x1][sub_mask] = sub_img[sub_mask]

    tampered = TextRegion(bbox=region.bbox, text=region.text,
                          tampered_text=text if text is not None else region.tampered_text,
                          prompt=region.prompt)
    return ForegroundLayer(RasterImage(data), BinaryMask(bits), (tampered,)), tampered


class _ArtifactWriter:
    def __init__(self, output_dir, enabled):
        self.output_dir = output_dir
        self.enabled = enabled
        self.counter = 7  # transform artifacts continue the figure numbering

    def path(self, name):
        return os.path.join(self.output_dir, name)

    def image(self, name, img):
        if not self.enabled:
            return None
        p = self.path(name)
        fileio.save_image(img, p)
        return p

    def depth(self, name, depth):
        if not self.enabled:
            return None
        p = self.path(name)
        fileio.save_depth(depth, p)
        return p

    def transform_step(self, region_idx, op_name, layer):
        if not self.enabled:
            return None
        p = self.path(f"{self.counter:02d}_r{region_idx}_{op_name}.png")
        self.counter += 1
        fileio.save_image(layer.image, p)
        return p


def run_pipeline(script):
    """Execute the full edit described by `script`; returns the artifact manifest."""
    os.makedirs(script.output_dir, exist_ok=True)
    writer = _ArtifactWriter(script.output_dir, script.dump_stages)
    arts = StageArtifacts(
        output_dir=script.output_dir,
        final=os.path.join(script.output_dir, "final.png"),
        final_mask=os.path.join(script.output_dir, "final_mask.png"),
        manifest=os.path.join(script.output_dir, "manifest.json"),
    )
    stats = arts.stats

    # ---- stage 1: foreground extraction -------------------------------
    with _stage("foreground"):
        img = fileio.load_image(script.input_image)
        dets = (DetectionSet.from_json(script.detections, img.dims)
                if not isinstance(script.detections, DetectionSet) else script.detections)
        arts.original = writer.image("01_original.png", img)
        box_mask = generate_mask(dets)
        refined = box_mask
        seg_cmd = script.provider_commands.get("segment")
        if seg_cmd:
            refined = providers.segment_via_provider(img, box_mask, seg_cmd)
            # confine the provider to the detected regions
            refined = refined & box_mask
        refined = kmeans_refine(img, refined, seed=script.seed,
                                regions=[r.bbox for r in dets.regions])
        layer_all = extract_foreground(img, refined, dets.regions)
        arts.foreground = writer.image("03_foreground.png", layer_all.image)
        stats["mask_pixels"] = box_mask.count
        stats["refined_pixels"] = refined.count

    # ---- stage 2: background restoration -------------------------------
    with _stage("background"):
        if script.background_image:
            background = fileio.load_image(script.background_image)
            require_same_dims(background, img, "background image and input")
            stats["background"] = "file"
        elif script.inpaint_method == "none":
            background = RasterImage(img.data)
            stats["background"] = "none"
        elif script.inpaint_method == "external":
            cmd = script.provider_commands.get("inpaint")
            if not cmd:
                raise ScriptError("inpaint method 'external' needs providers.inpaint")
            background = inpaint_external(img, box_mask, cmd)
            stats["background"] = "external"
        else:
            background = inpaint_baseline(img, box_mask, script.inpaint_config)
            stats["background"] = "baseline"
        arts.background = writer.image("02_background.png", background)

    # ---- per-region plans ----------------------------------------------
    plans = []
    for i, region in enumerate(dets.regions):
        rc = script.region_configs[i] if i < len(script.region_configs) else {}
        with _stage("script"):
            plans.append(_parse_region_plan(region, rc))

    needs_depth = any(p.job.method == "depth_aware" for p in plans)
    bg_depth = None
    if needs_depth:
        with _stage("depth"):
            if script.depth_map:
                bg_depth = fileio.load_depth(script.depth_map)
                require_same_dims(bg_depth, img, "depth map and image")
            elif script.provider_commands.get("depth"):
                bg_depth = estimate_depth_external(background, script.provider_commands["depth"])
            else:
                warnings.warn("no depth source configured; using a flat depth map "
                              "(depth-aware adjustment becomes the identity)", stacklevel=2)
                bg_depth = DepthMap(np.full((img.height, img.width), 0.5),
                                    raw_min=0.5, raw_max=0.5, degenerate=True)
                stats["depth"] = "flat-fallback"
            arts.depth_image = writer.depth("06_depth_image.pfm", bg_depth)

    # ---- stages 3 and 4 per region --------------------------------------
    canvas = background
    final_bits = np.zeros((img.height, img.width), dtype=bool)
    tamper_art_written = False
    fg_depth_merged = np.zeros((img.height, img.width)) if needs_depth else None
    region_stats = []

    for idx, plan in enumerate(plans):
        region = plan.region
        with _stage("tamper"):
            if plan.tamper is not None:
                layer, region = tamper_region(region, plan.tamper, img.dims, image=img,
                                              provider_command=script.provider_commands.get("tamper"))
                if not tamper_art_written:
                    arts.tamper = writer.image("04_tamper.png", layer.image)
                    tamper_art_written = True
            else:
                clip = region.bbox.clipped(img.width, img.height)
                bits = np.zeros_like(refined.bits)
                if clip is not None:
                    x0, y0, x1, y1 = clip
                    bits[y0:y1, x0:x1] = refined.bits[y0:y1, x0:x1]
                sub_mask = BinaryMask(bits)
                data = np.where(bits[:, :, None], layer_all.image.data, np.uint8(0))
                layer = ForegroundLayer(RasterImage(data), sub_mask, (region,))

        with _stage("transform"):
            total = _combined(plan.transform_ops)
            if script.dump_stages and plan.transform_ops:
                cumulative = identity()
                for op_name, t in plan.transform_ops:
                    cumulative = compose(t, cumulative)
                    step = apply_transform(layer, cumulative, img.dims)
                    arts.transforms.append((idx, op_name, writer.transform_step(idx, op_name, step)))
            moved = apply_transform(layer, total, img.dims)
            ys, xs = np.nonzero(layer.mask.bits)
            clipped = 0
            if xs.size:
                dest = total.map_points(np.stack([xs, ys], axis=1).astype(np.float64))
                outside = ((dest[:, 0] < 0) | (dest[:, 0] > img.width - 1)
                           | (dest[:, 1] < 0) | (dest[:, 1] > img.height - 1))
                clipped = int(outside.sum())
            region_stats.append({"region": idx, "source_pixels": layer.mask.count,
                                 "moved_pixels": moved.mask.count, "clipped_pixels": clipped})

        with _stage("compose"):
            job = plan.job
            if job.method == "depth_aware":
                if plan.fg_depth_mode == "provider":
                    cmd = script.provider_commands.get("depth")
                    if not cmd:
                        raise ScriptError("fg_depth 'provider' needs providers.depth")
                    fg_d = estimate_depth_external(moved.image, cmd)
                else:
                    fg_d = foreground_depth(bg_depth, layer.mask, total, img.dims)
                dd = depth_delta(bg_depth, fg_d, moved.mask)
                adjusted = depth_aware_adjust(moved, dd, plan.depth_params)
                if fg_depth_merged is not None:
                    fg_depth_merged[moved.mask.bits] = fg_d.values[moved.mask.bits]
            elif job.method == "linear":
                adjusted = adjust_linear(moved, job.gamma, job.delta)
            elif job.method == "gamma":
                adjusted = adjust_gamma(moved, job.gamma)
            elif job.method == "histogram":
                region_ref = None if job.histogram_global else mask_annulus(moved.mask)
                adjusted = histogram_match(moved, background, region_ref)
            else:  # "none"
                adjusted = moved
            canvas = compose_hard(canvas, adjusted)
            final_bits |= moved.mask.bits

    if needs_depth:
        arts.depth_word = writer.depth("05_depth_word.pfm", DepthMap(fg_depth_merged))
    stats["regions"] = region_stats

    fileio.save_image(canvas, arts.final)
    fileio.save_mask(BinaryMask(final_bits), arts.final_mask)
    with open(arts.manifest, "w", encoding="utf-8") as fh:
        json.dump(arts.to_dict(), fh, indent=2, sort_keys=True)
    return arts


def evaluate(edited, reference_bg, mask=None, pred_text=None, target_text=None,
             chi_symmetric=False, out_json=None):
    """Histogram similarity of an edited image against a reference background.

    Histograms are global unless a mask is given, in which case both are
    restricted to the masked pixels (local consistency at the edit
    site). The reference is the chi-square base. SA/NED are added when
    both text arguments are present. Paths and in-memory objects both
    work for the three rasters.
    """
    e = fileio.load_image(edited) if isinstance(edited, (str, os.PathLike)) else edited
    r = fileio.load_image(reference_bg) if isinstance(reference_bg, (str, os.PathLike)) else reference_bg
    require_same_dims(e, r, "edited and reference images")
    m = None
    if mask is not None:
        m = fileio.load_mask(mask) if isinstance(mask, (str, os.PathLike)) else mask
        require_same_dims(e, m, "image and mask")
    h_ref = intensity_histogram(r, m, normalize=True)
    h_edit = intensity_histogram(e, m, normalize=True)
    report = compare_histograms(h_ref, h_edit, chi_symmetric=chi_symmetric)
    if pred_text is not None and target_text is not None:
        report = MetricReport(
            bc=report.bc, cs=report.cs, corr=report.corr, inter=report.inter,
            sa=sentence_accuracy(pred_text, target_text),
            ned=ned(pred_text, target_text),
        )
    if out_json:
        with open(out_json, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
    return report
