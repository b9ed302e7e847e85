"""Synthetic stand-ins for the emerald photographs.

Each category becomes a green ellipse on a near-white floor whose
saturation follows the category's colour level and whose value follows its
brightness level, with per-stone jitter and smoothed per-pixel texture.
"""

import json
from pathlib import Path

import numpy as np
from scipy import ndimage

from ..color import hsv_to_rgb
from ..features import CATEGORIES
from ..imaging import write_image
from .manifest import generate_manifest

_VALUE_BY_BRIGHTNESS = {1: 0.78, 2: 0.58, 3: 0.38}


def category_profile(category):
    """Mean ``(saturation, value)`` of a synthetic stone of this grade."""
    info = CATEGORIES[category]
    return 0.25 + 0.15 * (info.color_level - 1), _VALUE_BY_BRIGHTNESS[info.brightness_level]


def ellipse_mask(size, center, axes, angle):
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    dy, dx = yy - center[0], xx - center[1]
    ca, sa = np.cos(angle), np.sin(angle)
    u = (dx * ca + dy * sa) / axes[1]
    v = (-dx * sa + dy * ca) / axes[0]
    return u * u + v * v <= 1.0


def render_stone(category, rng, size=96):
    """Return ``(rgb, true_mask)`` for one synthetic stone."""
    sat, val = category_profile(category)
    sat += rng.normal(0.0, 0.015)
    val += rng.normal(0.0, 0.015)
    hue = 140.0 + rng.normal(0.0, 4.0)

    center = (size / 2 + rng.uniform(-4, 4), size / 2 + rng.uniform(-4, 4))
    axes = (size * rng.uniform(0.24, 0.34), size * rng.uniform(0.24, 0.34))
    mask = ellipse_mask(size, center, axes, rng.uniform(0, np.pi))

    grain = 0.6 + 0.2 * (category % 4)
    tex = ndimage.gaussian_filter(rng.normal(0.0, 1.0, (size, size)), grain)
    tex /= tex.std() or 1.0
    s_map = np.clip(sat + 0.04 * tex, 0.0, 1.0)
    v_map = np.clip(val + 0.05 * tex + rng.normal(0.0, 0.01, (size, size)), 0.0, 1.0)
    hsv = np.stack([np.full((size, size), hue), s_map, v_map], axis=-1)
    stone = hsv_to_rgb(hsv)

    floor = np.clip(252 + rng.normal(0.0, 1.5, (size, size, 1)), 240, 255).astype(np.uint8)
    background = np.repeat(floor, 3, axis=2)
    rgb = np.where(mask[..., None], stone, background)
    return rgb, mask


def render_disc(size=64, radius=18, color=(30, 140, 60), center=None):
    """Flat-coloured disc on pure white; ``(rgb, true_mask)``."""
    cy, cx = center if center is not None else ((size - 1) / 2, (size - 1) / 2)
    yy, xx = np.mgrid[0:size, 0:size]
    mask = (yy - cy) ** 2 + (xx - cx) ** 2 <= radius ** 2
    rgb = np.full((size, size, 3), 255, dtype=np.uint8)
    rgb[mask] = color
    return rgb, mask


def generate_dataset(out_dir, per_class=24, seed=0, size=96):
    """Write ``category_<c>/stone_<i>.png`` images plus ``manifest.json``; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    for c in range(len(CATEGORIES)):
        sub = out / f"category_{c}"
        sub.mkdir(exist_ok=True)
        for i in range(per_class):
            rgb, _ = render_stone(c, rng, size)
            write_image(sub / f"stone_{i:03d}.png", rgb)
    doc = generate_manifest(out)
    manifest_path = out / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest_path
