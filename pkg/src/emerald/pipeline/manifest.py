"""Dataset manifests: which images exist, their grades, references and extraction settings."""

import hashlib
import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..exceptions import ParseError, ValidationError
from ..features import CATEGORIES, N_CATEGORIES
from ..imaging import RoiParams

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


@dataclass(frozen=True)
class ImageRecord:
    id: str
    path: str
    label: int


@dataclass(frozen=True)
class ExtractionParams:
    bins: int = 64
    glcm_levels: int = 64
    roi: RoiParams = field(default_factory=RoiParams)

    def __post_init__(self):
        if self.bins < 2:
            raise ValidationError("bins must be >= 2")
        if not 2 <= self.glcm_levels <= 256:
            raise ValidationError("glcm_levels must lie in 2..256")

    def to_dict(self):
        return {"bins": self.bins, "glcm_levels": self.glcm_levels, "roi": self.roi.to_dict()}

    @classmethod
    def from_dict(cls, d):
        d = dict(d or {})
        roi = RoiParams.from_dict(d.pop("roi", {}) or {})
        return cls(roi=roi, **d)


@dataclass(frozen=True)
class DatasetManifest:
    root: Path
    images: tuple
    references: dict
    """Category -> relative image path; empty when the manifest names none."""
    params: ExtractionParams = field(default_factory=ExtractionParams)
    categories: tuple = CATEGORIES

    def resolve(self, rel):
        return self.root / rel

    def reference_paths(self):
        """``(mapping, source)``; falls back to the lexicographically first image per category."""
        if self.references:
            return dict(sorted(self.references.items())), "manifest"
        chosen = {}
        for c in range(N_CATEGORIES):
            paths = sorted(r.path for r in self.images if r.label == c)
            chosen[c] = paths[0]
        return chosen, "first image per category"

    def with_params(self, **overrides):
        """Copy with extraction settings overridden (``bins``, ``glcm_levels``, ``closing_radius``)."""
        p = self.params
        radius = overrides.pop("closing_radius", None)
        overrides = {k: v for k, v in overrides.items() if v is not None}
        if radius is not None:
            overrides["roi"] = replace(p.roi, closing_radius=radius)
        return replace(self, params=replace(p, **overrides))

    def to_dict(self):
        """Canonical, location-independent content (used for hashing)."""
        return {
            "categories": [
                {"category": c.category, "brightness": c.brightness_level, "color": c.color_level}
                for c in self.categories
            ],
            "images": [{"id": r.id, "path": r.path, "label": r.label} for r in self.images],
            "references": {str(k): v for k, v in sorted(self.references.items())},
            "params": self.params.to_dict(),
        }

    def sha256(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


def _parse_categories(raw):
    if raw is None:
        return CATEGORIES
    known = {c.category: c for c in CATEGORIES}
    seen = {}
    for entry in raw:
        try:
            c, b, col = int(entry["category"]), int(entry["brightness"]), int(entry["color"])
        except (KeyError, TypeError, ValueError):
            raise ParseError(f"malformed category entry {entry!r}") from None
        if c in seen:
            raise ValidationError(f"category {c} listed twice")
        if c not in known or (known[c].brightness_level, known[c].color_level) != (b, col):
            raise ValidationError(
                f"category {c} (brightness {b}, color {col}) is not part of the 8-grade table"
            )
        seen[c] = known[c]
    missing = sorted(set(known) - set(seen))
    if missing:
        raise ValidationError(f"manifest category list is missing category {missing[0]}")
    return tuple(seen[c] for c in sorted(seen))


def parse_manifest(doc, base_dir):
    """Validate a manifest document; relative roots resolve against ``base_dir``."""
    if not isinstance(doc, dict):
        raise ParseError("manifest must be a JSON object")
    root = Path(base_dir) / doc.get("root", ".")
    categories = _parse_categories(doc.get("categories"))

    raw_images = doc.get("images")
    if not isinstance(raw_images, list) or not raw_images:
        raise ParseError("manifest needs a non-empty 'images' list")
    images, ids = [], set()
    for entry in raw_images:
        try:
            path = str(entry["path"])
            label = int(entry["label"])
        except (KeyError, TypeError, ValueError):
            raise ParseError(f"malformed image entry {entry!r}") from None
        sid = str(entry.get("id", Path(path).stem))
        if not 0 <= label < N_CATEGORIES:
            raise ValidationError(f"image {path}: label {label} outside 0..7")
        if sid in ids:
            raise ValidationError(f"duplicate image id {sid!r}")
        if not (root / path).is_file():
            raise ValidationError(f"image file not found: {path}")
        ids.add(sid)
        images.append(ImageRecord(sid, path, label))

    present = {r.label for r in images}
    for c in range(N_CATEGORIES):
        if c not in present:
            raise ValidationError(f"manifest has no images for category {c}")

    references = {}
    raw_refs = doc.get("references") or {}
    if not isinstance(raw_refs, dict):
        raise ParseError("'references' must map category numbers to image paths")
    for key, path in raw_refs.items():
        try:
            c = int(key)
        except ValueError:
            raise ParseError(f"reference key {key!r} is not a category number") from None
        if not 0 <= c < N_CATEGORIES:
            raise ValidationError(f"reference category {c} outside 0..7")
        if not (root / path).is_file():
            raise ValidationError(f"reference image not found: {path}")
        references[c] = str(path)
    if references and len(references) != N_CATEGORIES:
        missing = sorted(set(range(N_CATEGORIES)) - set(references))
        raise ValidationError(f"references are missing category {missing[0]}")

    try:
        params = ExtractionParams.from_dict(doc.get("params"))
    except TypeError as exc:
        raise ParseError(f"bad extraction params: {exc}") from None
    except ValueError as exc:
        raise ValidationError(f"bad extraction params: {exc}") from None
    return DatasetManifest(root, tuple(images), references, params, categories)


def load_manifest(path):
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"manifest not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return parse_manifest(doc, path.parent)


_CATEGORY_DIGITS = re.compile(r"(\d+)")


def generate_manifest(root, params=None):
    """Build a manifest document from a one-directory-per-category layout.

    The category is the first integer in each sub-directory name
    (``category_3``, ``3``, ``cat3`` all map to 3).
    """
    root = Path(root)
    images = []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        m = _CATEGORY_DIGITS.search(sub.name)
        if not m:
            continue
        label = int(m.group(1))
        for f in sorted(sub.iterdir()):
            if f.suffix.lower() in IMAGE_SUFFIXES:
                rel = f.relative_to(root).as_posix()
                images.append({"id": f"{sub.name}/{f.stem}", "path": rel, "label": label})
    return {
        "root": ".",
        "categories": [
            {"category": c.category, "brightness": c.brightness_level, "color": c.color_level}
            for c in CATEGORIES
        ],
        "images": images,
        "params": (params or ExtractionParams()).to_dict(),
    }
