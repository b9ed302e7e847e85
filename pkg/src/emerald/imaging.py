"""Stone segmentation: threshold, morphological closing and mask multiplication.

Images are plain numpy arrays: RGB images are ``(H, W, 3)`` uint8, gray
images ``(H, W)`` uint8 and masks ``(H, W)`` bool with True on the stone.
"""

from dataclasses import dataclass
from typing import Literal, Union

import numpy as np
from scipy import ndimage

from ._validation import check_gray, check_mask, check_rgb
from .exceptions import DegenerateImage, EmptyRoi

Polarity = Literal["below_threshold", "above_threshold"]


@dataclass(frozen=True)
class RoiParams:
    """Segmentation settings.

    ``threshold`` is ``"otsu"`` or a fixed level in 0..255. Stones are darker
    than the white chamber floor, hence the ``below_threshold`` default.
    """

    threshold: Union[Literal["otsu"], int] = "otsu"
    polarity: Polarity = "below_threshold"
    closing_radius: int = 5
    keep_largest_component: bool = True

    def __post_init__(self):
        if self.threshold != "otsu":
            if isinstance(self.threshold, bool) or not isinstance(self.threshold, (int, np.integer)):
                raise ValueError(f"threshold must be 'otsu' or an integer level, got {self.threshold!r}")
            if not 0 <= self.threshold <= 255:
                raise ValueError(f"threshold level {self.threshold} outside 0..255")
        if self.polarity not in ("below_threshold", "above_threshold"):
            raise ValueError(f"unknown polarity {self.polarity!r}")
        if self.closing_radius < 0:
            raise ValueError("closing_radius must be >= 0")

    def to_dict(self):
        return {
            "threshold": self.threshold if self.threshold == "otsu" else int(self.threshold),
            "polarity": self.polarity,
            "closing_radius": int(self.closing_radius),
            "keep_largest_component": bool(self.keep_largest_component),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def to_grayscale(img):
    """BT.601 luminance, rounded half-up to the nearest integer."""
    rgb = check_rgb(img).astype(np.int32)
    # integer form of round(0.299 R + 0.587 G + 0.114 B)
    weighted = 299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2]
    return ((weighted + 500) // 1000).clip(0, 255).astype(np.uint8)


def otsu_threshold(img):
    """Level maximising the between-class variance of the gray histogram.

    A level ``t`` splits pixels into ``< t`` and ``>= t``; candidates run over
    1..255 and the lowest maximiser wins. Scores are compared exactly in
    integer arithmetic so ties are resolved deterministically.
    """
    gray = check_gray(img)
    if gray.min() == gray.max():
        raise DegenerateImage("image has a single gray level")
    hist = np.bincount(gray.ravel(), minlength=256).tolist()

    total = int(gray.size)
    total_sum = sum(h * i for i, h in enumerate(hist))
    best_t, best_num, best_den = None, -1, 1
    n0 = 0
    s0 = 0
    for t in range(1, 256):
        n0 += hist[t - 1]
        s0 += (t - 1) * hist[t - 1]
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        # sigma_b^2 * total^2 == (total*s0 - n0*total_sum)^2 / (n0*n1)
        num = (total * s0 - n0 * total_sum) ** 2
        den = n0 * n1
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def binarize(img, t, polarity="below_threshold"):
    gray = check_gray(img)
    if not 0 <= t <= 255:
        raise ValueError(f"threshold {t} outside 0..255")
    if polarity == "below_threshold":
        return gray < t
    if polarity == "above_threshold":
        return gray >= t
    raise ValueError(f"unknown polarity {polarity!r}")


def disc_offsets(radius):
    """Integer ``(dy, dx)`` offsets inside the closed Euclidean disc."""
    r = int(radius)
    dy, dx = np.mgrid[-r:r + 1, -r:r + 1]
    keep = dy * dy + dx * dx <= r * r
    return np.column_stack([dy[keep], dx[keep]])


def disc_element(radius):
    r = int(radius)
    dy, dx = np.mgrid[-r:r + 1, -r:r + 1]
    return dy * dy + dx * dx <= r * r


def morphological_close(mask, radius):
    """Dilate then erode with a disc; pixels outside the image count as background."""
    m = check_mask(mask)
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius == 0:
        return m.copy()
    se = disc_element(radius)
    dilated = ndimage.binary_dilation(m, structure=se, border_value=0)
    return ndimage.binary_erosion(dilated, structure=se, border_value=0)


_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


def largest_component(mask):
    """Keep the largest 8-connected foreground component.

    Equal sizes go to the component whose first pixel comes earliest in
    row-major order.
    """
    m = check_mask(mask)
    labels, n = ndimage.label(m, structure=_EIGHT_CONNECTED)
    if n <= 1:
        return m.copy()
    flat = labels.ravel()
    sizes = np.bincount(flat, minlength=n + 1)
    sizes[0] = 0
    first = np.full(n + 1, flat.size, dtype=np.int64)
    fg = np.flatnonzero(flat)
    np.minimum.at(first, flat[fg], fg)
    # max size, then smallest first-pixel index
    order = np.lexsort((first[1:], -sizes[1:]))
    keep = order[0] + 1
    return labels == keep


def apply_mask(img, mask):
    rgb = check_rgb(img)
    m = check_mask(mask, shape=rgb.shape)
    out = np.zeros_like(rgb)
    out[m] = rgb[m]
    return out


def extract_roi(img, params=None):
    """Segment the stone; returns ``(masked_image, mask)``.

    Raises ``DegenerateImage`` on single-level images under Otsu and
    ``EmptyRoi`` when nothing survives segmentation.
    """
    params = params or RoiParams()
    rgb = check_rgb(img)
    h, w = rgb.shape[:2]
    if params.closing_radius > min(h, w) / 2:
        raise ValueError(
            f"closing_radius {params.closing_radius} exceeds half the smaller image side ({min(h, w)})"
        )
    gray = to_grayscale(rgb)
    t = otsu_threshold(gray) if params.threshold == "otsu" else int(params.threshold)
    mask = binarize(gray, t, params.polarity)
    mask = morphological_close(mask, params.closing_radius)
    if params.keep_largest_component:
        mask = largest_component(mask)
    if not mask.any():
        raise EmptyRoi("segmentation produced an empty mask")
    return apply_mask(rgb, mask), mask


def read_image(path):
    """Load a PNG/JPEG file as an ``(H, W, 3)`` uint8 RGB array."""
    from PIL import Image

    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()


def write_image(path, img):
    from PIL import Image

    Image.fromarray(check_rgb(img), mode="RGB").save(path)


def write_mask(path, mask):
    """Save a mask as an 8-bit PNG with 0 for background and 255 for stone."""
    from PIL import Image

    m = check_mask(mask)
    Image.fromarray(np.where(m, 255, 0).astype(np.uint8), mode="L").save(path)
