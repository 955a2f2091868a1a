import numpy as np
import pytest

from layertext import (
    BinaryMask,
    DepthMap,
    DepthParams,
    RasterImage,
    adjust_intensity,
    depth_aware_adjust,
    depth_delta,
    estimate_depth_external,
    foreground_depth,
    from_float,
    identity,
    make_translation,
)
from layertext.depth import PRESETS, DepthDelta
from layertext.errors import ProviderLaunchFailure, ValidationError
from layertext.foreground import ForegroundLayer


def block_mask(h, w, y0, y1, x0, x1):
    bits = np.zeros((h, w), dtype=bool)
    bits[y0:y1, x0:x1] = True
    return BinaryMask(bits)


def textured_layer(mask, rng, lo=60, hi=200):
    data = rng.integers(lo, hi, size=mask.bits.shape + (3,)).astype(np.uint8)
    data[~mask.bits] = 0
    return ForegroundLayer(RasterImage(data), mask)


class TestDepthParams:
    def test_defaults(self):
        p = DepthParams()
        assert (p.lambda1, p.lambda2) == (0.5, 0.3)

    def test_zero_pair_allowed(self):
        DepthParams(0.0, 0.0)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValidationError):
            DepthParams(2.5, 0.3)
        with pytest.raises(ValidationError):
            DepthParams(0.5, 0.01)
        with pytest.raises(ValidationError):
            DepthParams(0.5, 0.0)  # only the exact (0, 0) pair bypasses

    def test_presets(self):
        assert PRESETS == {"uniform": (0.3, 0.2), "high_variation": (1.0, 0.5), "hdr": (1.5, 0.8)}
        p = DepthParams.from_preset("uniform")
        assert (p.lambda1, p.lambda2) == (0.3, 0.2)
        with pytest.raises(ValidationError):
            DepthParams.from_preset("nope")


class TestForegroundDepth:
    def test_identity_transport_gives_zero_delta(self, rng):
        depth = DepthMap(rng.random((12, 16)))
        mask = block_mask(12, 16, 3, 8, 4, 9)
        fg_d = foreground_depth(depth, mask, identity(), (16, 12))
        assert np.allclose(fg_d.values[mask.bits], depth.values[mask.bits])
        dd = depth_delta(depth, fg_d, mask)
        assert np.all(dd.values == 0.0)

    def test_constant_regions_delta(self):
        vals = np.full((10, 20), 0.2)
        vals[:, 10:] = 0.7
        depth = DepthMap(vals)
        mask = block_mask(10, 20, 2, 6, 2, 6)
        t = make_translation(10, 0)
        fg_d = foreground_depth(depth, mask, t, (20, 10))
        moved = block_mask(10, 20, 2, 6, 12, 16)
        dd = depth_delta(depth, fg_d, moved)
        assert np.allclose(dd.values[moved.bits], 0.5)
        assert np.all(dd.values[~moved.bits] == 0.0)

    def test_linear_ramp_closed_form(self):
        # bilinear sampling reproduces a linear ramp exactly, so a shift
        # by dx must give a constant delta of dx / (w - 1) under the mask
        w, h, dx = 24, 8, 3.5
        ramp = np.tile(np.arange(w) / (w - 1), (h, 1))
        depth = DepthMap(ramp)
        mask = block_mask(h, w, 1, 6, 2, 8)
        fg_d = foreground_depth(depth, mask, make_translation(dx, 0), (w, h))
        moved = BinaryMask(fg_d.values > 0)
        assert moved.count > 0
        dd = depth_delta(depth, fg_d, moved)
        assert np.abs(dd.values[moved.bits] - dx / (w - 1)).max() < 1e-6

    def test_dims_validated(self):
        depth = DepthMap(np.zeros((4, 4)))
        mask = block_mask(5, 5, 0, 2, 0, 2)
        with pytest.raises(ValidationError):
            foreground_depth(depth, mask, identity(), (4, 4))


class TestAdjustKernel:
    def test_paper_defaults_unit_value(self):
        out = adjust_intensity(0.5, 0.4, 0.5, 0.3)
        assert abs(out - 0.72) < 1e-12
        assert from_float(out) == 184

    def test_zero_lambdas_identity(self, rng):
        v = rng.random(100)
        d = rng.uniform(-1, 1, 100)
        assert np.array_equal(adjust_intensity(v, d, 0.0, 0.0), v)

    def test_monotone_in_delta(self, rng):
        deltas = np.linspace(-1.0, 1.0, 101)
        for v in rng.random(20):
            outs = adjust_intensity(np.full(101, v), deltas, 0.5, 0.3)
            assert np.all(np.diff(outs) >= -1e-15)

    def test_range_safety(self, rng):
        v = rng.random(500)
        d = rng.uniform(-1, 1, 500)
        out = adjust_intensity(v, d, 2.0, 1.0)
        assert out.min() >= 0.0 and out.max() <= 1.0


class TestDepthAwareAdjust:
    def _setup(self, rng, h=10, w=14):
        mask = block_mask(h, w, 2, 8, 3, 11)
        layer = textured_layer(mask, rng)
        return layer, mask

    def test_zero_lambdas_bit_exact(self, rng):
        layer, mask = self._setup(rng)
        dd = DepthDelta(np.where(mask.bits, 0.37, 0.0), mask)
        out = depth_aware_adjust(layer, dd, DepthParams(0.0, 0.0))
        assert np.array_equal(out.image.data, layer.image.data)

    def test_zero_delta_bit_exact(self, rng):
        layer, mask = self._setup(rng)
        dd = DepthDelta(np.zeros(mask.bits.shape), mask)
        out = depth_aware_adjust(layer, dd, DepthParams(0.5, 0.3))
        assert np.array_equal(out.image.data, layer.image.data)

    def test_unmasked_pixels_untouched(self, rng):
        layer, mask = self._setup(rng)
        dd = DepthDelta(np.where(mask.bits, -0.6, 0.0), mask)
        out = depth_aware_adjust(layer, dd, DepthParams(1.5, 0.8))
        assert np.array_equal(out.image.data[~mask.bits], layer.image.data[~mask.bits])

    def test_matches_kernel(self, rng):
        layer, mask = self._setup(rng)
        delta_field = np.where(mask.bits, rng.uniform(-1, 1, mask.bits.shape), 0.0)
        dd = DepthDelta(delta_field, mask)
        out = depth_aware_adjust(layer, dd, DepthParams(0.5, 0.3))
        expected = from_float(
            adjust_intensity(layer.image.to_float(), delta_field[:, :, None], 0.5, 0.3)
        )
        assert np.array_equal(out.image.data[mask.bits], expected[mask.bits])


class TestExternalDepth:
    def test_constant_provider_degenerate(self, rng, constant_depth_provider):
        img = RasterImage(rng.integers(0, 256, size=(5, 7, 3), dtype=np.uint8))
        with pytest.warns(UserWarning, match="constant"):
            depth = estimate_depth_external(img, constant_depth_provider)
        assert depth.degenerate
        assert np.all(depth.values == 0.5)

    def test_ramp_provider(self, rng, ramp_depth_provider):
        img = RasterImage(rng.integers(0, 256, size=(4, 9, 3), dtype=np.uint8))
        depth = estimate_depth_external(img, ramp_depth_provider)
        assert depth.values[0, 0] == 0.0
        assert depth.values[0, -1] == 1.0
        assert np.allclose(depth.values, np.tile(np.arange(9) / 8.0, (4, 1)), atol=1e-7)

    def test_missing_binary(self, rng):
        img = RasterImage(rng.integers(0, 256, size=(4, 4, 3), dtype=np.uint8))
        with pytest.raises(ProviderLaunchFailure):
            estimate_depth_external(img, ["/no/such/exe"])
