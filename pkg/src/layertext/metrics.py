"""Histogram similarity and string metrics for composition quality.

Histogram metrics operate on per-channel 256-bin intensity histograms:
Bhattacharyya distance (0 = identical), one-sided chi-square distance
with the first argument as reference, Pearson correlation of the
concatenated bin vectors, and histogram intersection summed over the
three channels (3 = identical). String metrics cover exact-match
accuracy and normalized edit-distance similarity.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import EmptyMaskError, NotNormalizedError, ZeroVarianceError, ValidationError


@dataclass
class ChannelHistogram:
    """3 x 256 bin weights; when normalized, each channel sums to 1."""

    bins: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        bins = np.asarray(self.bins, dtype=np.float64)
        if bins.shape != (3, 256):
            raise ValidationError(f"expected 3x256 bins, got {bins.shape}")
        if (bins < 0).any():
            raise ValidationError("histogram bins must be non-negative")
        if self.normalized and np.abs(bins.sum(axis=1) - 1.0).max() > 1e-9:
            raise ValidationError("normalized histogram channels must sum to 1")
        self.bins = bins

    def normalize(self):
        totals = self.bins.sum(axis=1, keepdims=True)
        if (totals == 0).any():
            raise ValidationError("cannot normalize a channel with zero mass")
        return ChannelHistogram(self.bins / totals, normalized=True)


def intensity_histogram(img, mask=None, normalize=False):
    """Per-channel 256-bin counts over the image (or its masked pixels)."""
    if mask is None:
        pixels = img.data.reshape(-1, 3)
    else:
        if not mask.bits.any():
            raise EmptyMaskError("histogram mask selects no pixels")
        pixels = img.data[mask.bits]
    bins = np.stack([np.bincount(pixels[:, c], minlength=256).astype(np.float64) for c in range(3)])
    hist = ChannelHistogram(bins)
    return hist.normalize() if normalize else hist


def _require_normalized(*hists):
    for h in hists:
        if not h.normalized:
            raise NotNormalizedError("metric requires normalized histograms")


def bhattacharyya_distance(h1, h2):
    """Mean over channels of sqrt(1 - sum(sqrt(p*q))); 0 iff identical.

    Computed in the equivalent Hellinger form 0.5 * sum((sqrt p - sqrt q)^2)
    so identical histograms give exactly 0 instead of sqrt(rounding noise).
    """
    _require_normalized(h1, h2)
    diff = np.sqrt(h1.bins) - np.sqrt(h2.bins)
    per_channel = np.sqrt(0.5 * (diff * diff).sum(axis=1))
    return float(per_channel.mean())


def chi_square_distance(h1, h2, symmetric=False):
    """Sum over channels of sum_{p>0} (p-q)^2 / p, with h1 as reference.

    Bins where the reference is zero are skipped (the classic one-sided
    form), so the measure is asymmetric; `symmetric` switches to
    (p-q)^2 / (p+q) summed over p+q > 0 for sensitivity checks.
    """
    _require_normalized(h1, h2)
    p, q = h1.bins, h2.bins
    if symmetric:
        denom = p + q
        sel = denom > 0
        return float((((p - q) ** 2)[sel] / denom[sel]).sum())
    sel = p > 0
    return float((((p - q) ** 2)[sel] / p[sel]).sum())


def histogram_correlation(h1, h2):
    """Pearson correlation of the two concatenated 768-long bin vectors."""
    _require_normalized(h1, h2)
    a = h1.bins.ravel()
    b = h2.bins.ravel()
    da = a - a.mean()
    db = b - b.mean()
    na = np.sqrt((da * da).sum())
    nb = np.sqrt((db * db).sum())
    if na == 0.0 or nb == 0.0:
        raise ZeroVarianceError("correlation is undefined for a constant histogram")
    return float((da * db).sum() / (na * nb))


def histogram_intersection(h1, h2):
    """Sum over channels of sum(min(p, q)); 3 iff identical per channel."""
    _require_normalized(h1, h2)
    return float(np.minimum(h1.bins, h2.bins).sum())


def sentence_accuracy(pred, target):
    """1.0 when the strings match exactly after trimming surrounding whitespace."""
    return 1.0 if pred.strip() == target.strip() else 0.0


def _levenshtein(a, b):
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        cur = [i] + [0] * lb
        ca = a[i - 1]
        for j in range(1, lb + 1):
            cost = 0 if ca == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return prev[lb]


def ned(pred, target):
    """Normalized edit-distance similarity: 1 - lev/max(len); 1.0 for two empties."""
    longest = max(len(pred), len(target))
    if longest == 0:
        return 1.0
    return 1.0 - _levenshtein(pred, target) / longest


@dataclass
class MetricReport:
    """Histogram similarity (bc/cs/corr/inter) plus optional text scores."""

    bc: float
    cs: float
    corr: float
    inter: float
    sa: float | None = None
    ned: float | None = None

    def to_dict(self):
        out = {"bc": self.bc, "cs": self.cs, "corr": self.corr, "inter": self.inter}
        if self.sa is not None:
            out["sa"] = self.sa
        if self.ned is not None:
            out["ned"] = self.ned
        return out


def compare_histograms(reference, candidate, chi_symmetric=False):
    """All four histogram metrics with `reference` as the chi-square base."""
    return MetricReport(
        bc=bhattacharyya_distance(reference, candidate),
        cs=chi_square_distance(reference, candidate, symmetric=chi_symmetric),
        corr=histogram_correlation(reference, candidate),
        inter=histogram_intersection(reference, candidate),
    )


def histogram_to_csv(hist, path):
    """Dump a histogram as CSV rows of (bin, R, G, B)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin", "R", "G", "B"])
        for i in range(256):
            writer.writerow([i, hist.bins[0, i], hist.bins[1, i], hist.bins[2, i]])
