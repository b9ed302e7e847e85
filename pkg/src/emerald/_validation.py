"""Input validation helpers shared by the image and feature modules."""

import numpy as np

from .exceptions import DimensionMismatch, EmptyRoi


def check_rgb(img):
    """Return ``img`` as a C-contiguous ``(H, W, 3)`` uint8 array."""
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) RGB image, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError("image must have positive width and height")
    return _as_uint8(arr)


def check_gray(img):
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError(f"expected an (H, W) gray image, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError("image must have positive width and height")
    return _as_uint8(arr)


def check_mask(mask, shape=None, require_nonempty=False):
    """Return ``mask`` as a bool array, optionally checking its 2-D shape."""
    m = np.asarray(mask)
    if m.ndim != 2:
        raise ValueError(f"expected an (H, W) mask, got shape {m.shape}")
    if m.dtype != bool:
        m = m != 0
    if shape is not None and m.shape != tuple(shape[:2]):
        raise DimensionMismatch(f"mask shape {m.shape} does not match image shape {tuple(shape[:2])}")
    if require_nonempty and not m.any():
        raise EmptyRoi("mask selects no pixels")
    return np.ascontiguousarray(m)


def _as_uint8(arr):
    if arr.dtype == np.uint8:
        return np.ascontiguousarray(arr)
    if np.issubdtype(arr.dtype, np.integer) or np.issubdtype(arr.dtype, np.floating):
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError("channel values must lie in [0, 255]")
        if np.issubdtype(arr.dtype, np.floating) and not np.all(arr == np.floor(arr)):
            raise ValueError("channel values must be integral")
        return np.ascontiguousarray(arr.astype(np.uint8))
    raise ValueError(f"unsupported pixel dtype {arr.dtype}")
