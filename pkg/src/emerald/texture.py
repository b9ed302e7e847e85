"""Gray-level co-occurrence matrices with homogeneity and entropy."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_gray, check_mask
from .exceptions import EmptyMatrix, EmptyRoi, InvalidOffset, NotNormalized

NORM_TOL = 1e-9


@dataclass(frozen=True)
class GlcmOffset:
    """Pixel displacement; ``dx`` moves along columns, ``dy`` along rows."""

    dx: int
    dy: int

    def __post_init__(self):
        if self.dx == 0 and self.dy == 0:
            raise InvalidOffset("offset (0, 0) pairs each pixel with itself")


HORIZONTAL = GlcmOffset(1, 0)
VERTICAL = GlcmOffset(0, 1)


@dataclass(frozen=True, eq=False)
class Glcm:
    """Directed co-occurrence matrix; ``counts[a, b]`` pairs source level a with target level b."""

    counts: np.ndarray
    offset: GlcmOffset
    normalized: bool = False

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] < 2:
            raise ValueError(f"GLCM must be a square matrix of side >= 2, got {c.shape}")
        if np.any(c < 0):
            raise ValueError("GLCM entries must be non-negative")
        if self.normalized and abs(c.sum() - 1.0) > NORM_TOL:
            raise NotNormalized(f"entries sum to {c.sum()!r}, not 1")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def levels(self):
        return self.counts.shape[0]

    @property
    def total(self):
        return float(self.counts.sum())


def quantize(gray, levels):
    """Map 8-bit values to ``levels`` bins via ``floor(v * levels / 256)``."""
    return (gray.astype(np.int64) * levels) // 256


def _pair_slices(n, d):
    # source indices [lo, hi) and their targets shifted by d, clipped to [0, n)
    if d >= 0:
        return slice(0, n - d), slice(d, n)
    return slice(-d, n), slice(0, n + d)


def compute_glcm(gray, mask, offset, levels=64):
    """Raw directed co-occurrence counts over masked pixel pairs.

    The pair ``(i, j) -> (i + dy, j + dx)`` contributes only when both ends
    lie inside the image and inside the mask.
    """
    if not isinstance(offset, GlcmOffset):
        offset = GlcmOffset(*offset)
    if not 2 <= levels <= 256:
        raise ValueError("levels must lie in 2..256")
    g = check_gray(gray)
    m = check_mask(mask, shape=g.shape)
    if not m.any():
        raise EmptyRoi("mask selects no pixels")

    q = quantize(g, levels)
    h, w = g.shape
    counts = np.zeros((levels, levels), dtype=np.float64)
    if abs(offset.dy) < h and abs(offset.dx) < w:
        rs, rt = _pair_slices(h, offset.dy)
        cs, ct = _pair_slices(w, offset.dx)
        valid = m[rs, cs] & m[rt, ct]
        a = q[rs, cs][valid]
        b = q[rt, ct][valid]
        counts = np.bincount(a * levels + b, minlength=levels * levels)
        counts = counts.reshape(levels, levels).astype(np.float64)
    return Glcm(counts, offset)


def normalize_glcm(g):
    total = g.total
    if total <= 0:
        raise EmptyMatrix("GLCM holds no co-occurrences")
    return Glcm(g.counts / total, g.offset, normalized=True)


def _require_normalized(g):
    if not g.normalized:
        raise NotNormalized("statistic is defined on the normalized GLCM")


def glcm_homogeneity(g):
    """``sum C(h, k) / (1 + (h - k)^2)`` over the normalized matrix."""
    _require_normalized(g)
    idx = np.arange(g.levels)
    weight = 1.0 / (1.0 + (idx[:, None] - idx[None, :]) ** 2)
    return float(np.sum(g.counts * weight))


def glcm_entropy(g):
    """``sum C ln C`` with ``0 ln 0 = 0``.

    Note the sign: this is the negation of Shannon entropy, so it is <= 0.
    """
    _require_normalized(g)
    c = g.counts[g.counts > 0]
    return float(np.sum(c * np.log(c)))
