"""HSV conversion, masked channel statistics, histograms and Bhattacharyya distance."""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_mask, check_rgb
from .exceptions import BinCountMismatch, EmptyRoi, NotNormalized

#: Lower clamp on the Bhattacharyya coefficient; caps the distance at ~23.026.
BC_EPSILON = 1e-10
NORM_TOL = 1e-9

_CHANNELS = {"H": 0, "S": 1, "V": 2}


@dataclass(frozen=True)
class ChannelStats:
    mean: float
    std_dev: float


@dataclass(frozen=True, eq=False)
class Histogram:
    """A 1-D histogram; ``normalized`` means the counts sum to one."""

    counts: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.float64)
        if c.ndim != 1 or c.size < 2:
            raise ValueError("a histogram needs at least 2 bins")
        if np.any(c < 0) or not np.all(np.isfinite(c)):
            raise ValueError("histogram counts must be finite and non-negative")
        if self.normalized and abs(c.sum() - 1.0) > NORM_TOL:
            raise NotNormalized(f"counts sum to {c.sum()!r}, not 1")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def bin_count(self):
        return self.counts.size

    def normalize(self):
        total = self.counts.sum()
        if total <= 0:
            raise EmptyRoi("cannot normalize an empty histogram")
        return Histogram(self.counts / total, normalized=True)

    def __eq__(self, other):
        if not isinstance(other, Histogram):
            return NotImplemented
        return self.normalized == other.normalized and np.array_equal(self.counts, other.counts)

    __hash__ = None


def rgb_to_hsv(img):
    """Hexcone RGB -> HSV with H in degrees [0, 360) and S, V in [0, 1].

    Achromatic pixels get H = 0; black pixels get S = 0.
    """
    rgb = check_rgb(img).astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    mx = rgb.max(axis=-1)
    mn = rgb.min(axis=-1)
    delta = mx - mn

    v = mx
    s = np.zeros_like(mx)
    np.divide(delta, mx, out=s, where=mx > 0)

    h = np.zeros_like(mx)
    chroma = delta > 0
    safe = np.where(chroma, delta, 1.0)
    r_max = chroma & (mx == r)
    g_max = chroma & (mx == g) & ~r_max
    b_max = chroma & ~r_max & ~g_max
    h = np.where(r_max, 60.0 * np.mod((g - b) / safe, 6.0), h)
    h = np.where(g_max, 60.0 * ((b - r) / safe + 2.0), h)
    h = np.where(b_max, 60.0 * ((r - g) / safe + 4.0), h)
    h = np.where(h >= 360.0, h - 360.0, h)
    return np.stack([h, s, v], axis=-1)


def hsv_to_rgb(hsv):
    """Inverse of :func:`rgb_to_hsv`, rounded to 8-bit channels."""
    hsv = np.asarray(hsv, dtype=np.float64)
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    c = v * s
    hp = np.mod(h, 360.0) / 60.0
    x = c * (1.0 - np.abs(np.mod(hp, 2.0) - 1.0))
    zero = np.zeros_like(c)
    sector = np.floor(hp).astype(int) % 6
    choices = [
        (c, x, zero), (x, c, zero), (zero, c, x),
        (zero, x, c), (x, zero, c), (c, zero, x),
    ]
    rgb = np.zeros(hsv.shape, dtype=np.float64)
    for k, (r1, g1, b1) in enumerate(choices):
        sel = sector == k
        rgb[..., 0] = np.where(sel, r1, rgb[..., 0])
        rgb[..., 1] = np.where(sel, g1, rgb[..., 1])
        rgb[..., 2] = np.where(sel, b1, rgb[..., 2])
    rgb += (v - c)[..., None]
    return np.clip(np.floor(rgb * 255.0 + 0.5), 0, 255).astype(np.uint8)


def _masked_channel(hsv, channel, mask):
    hsv = np.asarray(hsv, dtype=np.float64)
    if hsv.ndim != 3 or hsv.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) HSV image, got shape {hsv.shape}")
    if channel not in ("S", "V"):
        raise ValueError(f"channel must be 'S' or 'V', got {channel!r}")
    m = check_mask(mask, shape=hsv.shape, require_nonempty=True)
    return hsv[..., _CHANNELS[channel]][m]


def channel_stats(hsv, channel, mask):
    """Mean and population standard deviation of a channel over the mask."""
    values = _masked_channel(hsv, channel, mask)
    return ChannelStats(float(values.mean()), float(values.std()))


def masked_histogram(hsv, channel, mask, bins=64):
    """Normalized histogram of S or V over the mask, uniform bins on [0, 1].

    A value of exactly 1.0 falls into the last bin.
    """
    if bins < 2:
        raise ValueError("bins must be >= 2")
    values = _masked_channel(hsv, channel, mask)
    idx = np.clip(np.floor(values * bins).astype(np.int64), 0, bins - 1)
    counts = np.bincount(idx, minlength=bins).astype(np.float64)
    return Histogram(counts / counts.sum(), normalized=True)


def bhattacharyya_distance(p, q):
    """``-ln(sum_i sqrt(p_i q_i))`` with the coefficient clamped at ``BC_EPSILON``."""
    for h in (p, q):
        if not h.normalized:
            raise NotNormalized("Bhattacharyya distance needs normalized histograms")
    if p.bin_count != q.bin_count:
        raise BinCountMismatch(f"{p.bin_count} bins vs {q.bin_count} bins")
    coef = float(np.sum(np.sqrt(p.counts * q.counts)))
    return max(0.0, -math.log(max(coef, BC_EPSILON)))


def histogram_csv_rows(hist, name=""):
    """Rows ``name,bin,value`` for dumping a histogram while debugging."""
    return [(name, i, format(float(v), ".17g")) for i, v in enumerate(hist.counts)]
