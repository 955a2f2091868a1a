import math

import numpy as np
import pytest

from layertext import (
    BinaryMask,
    ChannelHistogram,
    RasterImage,
    bhattacharyya_distance,
    chi_square_distance,
    histogram_correlation,
    histogram_intersection,
    intensity_histogram,
    ned,
    sentence_accuracy,
)
from layertext.metrics import histogram_to_csv
from layertext.errors import (
    EmptyMaskError,
    NotNormalizedError,
    ZeroVarianceError,
)


def hist_from_channel(channel_bins):
    """Same 256-bin weights replicated over the three channels, normalized."""
    bins = np.zeros((3, 256))
    for idx, mass in channel_bins.items():
        bins[:, idx] = mass
    return ChannelHistogram(bins).normalize()


def random_hist(rng, spiky=False):
    if spiky:
        bins = np.zeros((3, 256))
        for c in range(3):
            idx = rng.choice(256, size=rng.integers(1, 12), replace=False)
            bins[c, idx] = rng.random(idx.size) + 0.05
    else:
        bins = rng.random((3, 256))
    return ChannelHistogram(bins).normalize()


# -- brute-force oracles (plain python loops, no shared code paths) -------

def oracle_bc(h1, h2):
    total = 0.0
    for c in range(3):
        s = 0.0
        for i in range(256):
            s += math.sqrt(h1.bins[c, i] * h2.bins[c, i])
        total += math.sqrt(max(0.0, 1.0 - s))
    return total / 3.0


def oracle_cs(h1, h2):
    total = 0.0
    for c in range(3):
        for i in range(256):
            p, q = h1.bins[c, i], h2.bins[c, i]
            if p > 0:
                total += (p - q) ** 2 / p
    return total


def oracle_corr(h1, h2):
    a = [h1.bins[c, i] for c in range(3) for i in range(256)]
    b = [h2.bins[c, i] for c in range(3) for i in range(256)]
    ma, mb = sum(a) / len(a), sum(b) / len(b)
    num = sum((x - ma) * (y - mb) for x, y in zip(a, b))
    da = math.sqrt(sum((x - ma) ** 2 for x in a))
    db = math.sqrt(sum((y - mb) ** 2 for y in b))
    return num / (da * db)


def oracle_inter(h1, h2):
    return sum(min(h1.bins[c, i], h2.bins[c, i]) for c in range(3) for i in range(256))


def oracle_levenshtein(a, b):
    memo = {}

    def go(i, j):
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        if (i, j) not in memo:
            memo[(i, j)] = min(
                go(i + 1, j) + 1,
                go(i, j + 1) + 1,
                go(i + 1, j + 1) + (a[i] != b[j]),
            )
        return memo[(i, j)]

    return go(0, 0)


class TestIntensityHistogram:
    def test_single_pixel(self):
        img = RasterImage(np.full((1, 1, 3), 7, dtype=np.uint8))
        h = intensity_histogram(img)
        for c in range(3):
            assert h.bins[c, 7] == 1
            assert h.bins[c].sum() == 1

    def test_two_pixel_normalized(self):
        data = np.zeros((1, 2, 3), dtype=np.uint8)
        data[0, 1] = 255
        h = intensity_histogram(RasterImage(data), normalize=True)
        assert h.bins[0, 0] == 0.5 and h.bins[0, 255] == 0.5

    def test_masked_count(self):
        img = RasterImage(np.full((4, 4, 3), 42, dtype=np.uint8))
        bits = np.zeros((4, 4), dtype=bool)
        bits.flat[[0, 3, 7, 9, 15]] = True
        h = intensity_histogram(img, BinaryMask(bits))
        for c in range(3):
            assert h.bins[c, 42] == 5
            assert h.bins[c].sum() == 5

    def test_empty_mask(self):
        img = RasterImage(np.zeros((2, 2, 3), dtype=np.uint8))
        with pytest.raises(EmptyMaskError):
            intensity_histogram(img, BinaryMask(np.zeros((2, 2), dtype=bool)))


class TestBhattacharyya:
    def test_self_zero(self, rng):
        h = random_hist(rng)
        assert bhattacharyya_distance(h, h) == 0.0

    def test_disjoint_one(self):
        assert bhattacharyya_distance(hist_from_channel({0: 1.0}), hist_from_channel({255: 1.0})) == 1.0

    def test_hand_value(self):
        p = hist_from_channel({0: 0.5, 1: 0.5})
        q = hist_from_channel({0: 1.0})
        expected = math.sqrt(1.0 - math.sqrt(0.5))  # = 0.541196...
        assert abs(bhattacharyya_distance(p, q) - expected) < 1e-12
        assert abs(expected - 0.5411961) < 1e-7

    def test_symmetry(self, rng):
        for _ in range(20):
            a, b = random_hist(rng), random_hist(rng, spiky=True)
            assert abs(bhattacharyya_distance(a, b) - bhattacharyya_distance(b, a)) < 1e-12

    def test_requires_normalized(self):
        raw = ChannelHistogram(np.ones((3, 256)))
        with pytest.raises(NotNormalizedError):
            bhattacharyya_distance(raw, raw)


class TestChiSquare:
    def test_self_zero(self, rng):
        h = random_hist(rng)
        assert chi_square_distance(h, h) == 0.0

    def test_hand_values(self):
        p = hist_from_channel({0: 1.0})
        q = hist_from_channel({0: 0.5, 1: 0.5})
        assert abs(chi_square_distance(p, q) - 0.75) < 1e-12
        p2 = hist_from_channel({0: 0.5, 1: 0.5})
        q2 = hist_from_channel({0: 0.25, 1: 0.75})
        assert abs(chi_square_distance(p2, q2) - 0.75) < 1e-12

    def test_asymmetric_reference_first(self):
        p = hist_from_channel({0: 1.0})
        q = hist_from_channel({0: 0.5, 1: 0.5})
        # mass where the reference is empty is invisible to the one-sided form
        assert chi_square_distance(p, q) != chi_square_distance(q, p)
        # swapped: ((0.5-1)^2 + (0.5-0)^2) / 0.5 = 1.0 per channel
        assert abs(chi_square_distance(q, p) - 3.0) < 1e-12

    def test_symmetric_variant(self):
        p = hist_from_channel({0: 1.0})
        q = hist_from_channel({255: 1.0})
        assert chi_square_distance(p, q, symmetric=True) == pytest.approx(6.0)
        assert chi_square_distance(p, q, symmetric=True) == chi_square_distance(q, p, symmetric=True)


class TestCorrelation:
    def test_self_one(self, rng):
        h = random_hist(rng)
        assert abs(histogram_correlation(h, h) - 1.0) < 1e-12

    def test_mirror_of_symmetric(self):
        bins = np.zeros((3, 256))
        bins[:, 100] = 0.25
        bins[:, 155] = 0.25
        bins[:, 50] = 0.25
        bins[:, 205] = 0.25
        h = ChannelHistogram(bins).normalize()
        mirrored = ChannelHistogram(bins[:, ::-1].copy()).normalize()
        assert abs(histogram_correlation(h, mirrored) - 1.0) < 1e-12

    def test_toy_vs_oracle(self):
        p = hist_from_channel({0: 0.4, 1: 0.3, 2: 0.2, 3: 0.1})
        q = hist_from_channel({0: 0.1, 1: 0.2, 2: 0.3, 3: 0.4})
        assert abs(histogram_correlation(p, q) - oracle_corr(p, q)) < 1e-12

    def test_zero_variance(self):
        flat = ChannelHistogram(np.full((3, 256), 1.0 / 256)).normalize()
        other = hist_from_channel({0: 1.0})
        with pytest.raises(ZeroVarianceError):
            histogram_correlation(flat, other)


class TestIntersection:
    def test_self_three(self, rng):
        h = random_hist(rng)
        assert abs(histogram_intersection(h, h) - 3.0) < 1e-12

    def test_disjoint_zero(self):
        assert histogram_intersection(hist_from_channel({0: 1.0}), hist_from_channel({9: 1.0})) == 0.0

    def test_hand_value(self):
        p = hist_from_channel({0: 0.5, 1: 0.5})
        q = hist_from_channel({0: 0.25, 1: 0.75})
        assert abs(histogram_intersection(p, q) - 2.25) < 1e-12

    def test_total_variation_identity(self, rng):
        for _ in range(50):
            a = random_hist(rng, spiky=bool(rng.integers(2)))
            b = random_hist(rng, spiky=bool(rng.integers(2)))
            inter = histogram_intersection(a, b)
            tv = 0.0
            for c in range(3):
                tv += 1.0 - 0.5 * np.abs(a.bins[c] - b.bins[c]).sum()
            assert abs(inter - tv) < 1e-12


class TestAgainstOracles:
    def test_random_pairs(self, rng):
        for _ in range(50):
            a = random_hist(rng, spiky=bool(rng.integers(2)))
            b = random_hist(rng, spiky=bool(rng.integers(2)))
            assert abs(bhattacharyya_distance(a, b) - oracle_bc(a, b)) < 1e-9
            assert abs(chi_square_distance(a, b) - oracle_cs(a, b)) < 1e-9
            assert abs(histogram_correlation(a, b) - oracle_corr(a, b)) < 1e-9
            assert abs(histogram_intersection(a, b) - oracle_inter(a, b)) < 1e-9


class TestStrings:
    def test_sentence_accuracy(self):
        assert sentence_accuracy("Hello", "Hello") == 1.0
        assert sentence_accuracy("Hello", "hello") == 0.0
        assert sentence_accuracy(" Hello ", "Hello") == 1.0
        assert sentence_accuracy("über", "über") == 1.0

    def test_ned_examples(self):
        assert ned("abc", "abc") == 1.0
        assert abs(ned("kitten", "sitting") - (1.0 - 3.0 / 7.0)) < 1e-12
        assert ned("", "abc") == 0.0
        assert ned("", "") == 1.0

    def test_ned_unicode_codepoints(self):
        assert abs(ned("café", "cafe") - 0.75) < 1e-12

    def test_ned_symmetry_and_range(self, rng):
        alphabet = list("abcdeé中 ")
        for _ in range(200):
            a = "".join(rng.choice(alphabet, size=rng.integers(0, 9)))
            b = "".join(rng.choice(alphabet, size=rng.integers(0, 9)))
            v = ned(a, b)
            assert 0.0 <= v <= 1.0
            assert v == ned(b, a)

    def test_ned_against_dp_oracle(self, rng):
        alphabet = list("abcxyz")
        for _ in range(100):
            a = "".join(rng.choice(alphabet, size=rng.integers(0, 8)))
            b = "".join(rng.choice(alphabet, size=rng.integers(0, 8)))
            longest = max(len(a), len(b))
            expected = 1.0 if longest == 0 else 1.0 - oracle_levenshtein(a, b) / longest
            assert ned(a, b) == expected


class TestCsvDump:
    def test_rows(self, tmp_path, rng):
        h = random_hist(rng)
        path = tmp_path / "h.csv"
        histogram_to_csv(h, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "bin,R,G,B"
        assert len(lines) == 257
        first = lines[1].split(",")
        assert first[0] == "0"
        assert float(first[1]) == h.bins[0, 0]
