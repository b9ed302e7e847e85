"""The 24-value stone descriptor, reference histograms and standardization.

Feature order (1-based names ``f1`` .. ``f24``):

* f1-f4: mean and std of S, mean and std of V over the stone
* f5-f12: Bhattacharyya distance of the S histogram to references 0..7
* f13-f20: the same for the V histogram
* f21/f22: GLCM homogeneity at offsets (1, 0) and (0, 1)
* f23/f24: GLCM entropy at offsets (1, 0) and (0, 1)
"""

import csv
import io
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_mask, check_rgb
from .color import bhattacharyya_distance, channel_stats, masked_histogram, rgb_to_hsv
from .exceptions import (
    BinCountMismatch,
    DuplicateCategory,
    EmptyMatrix,
    EmptyRoi,
    InsufficientData,
    MissingCategory,
    ParseError,
)
from .imaging import extract_roi, to_grayscale
from .texture import HORIZONTAL, VERTICAL, compute_glcm, glcm_entropy, glcm_homogeneity, normalize_glcm

N_FEATURES = 24
N_CATEGORIES = 8
FEATURE_NAMES = tuple(f"f{i}" for i in range(1, N_FEATURES + 1))

FEATURE_DESCRIPTIONS = (
    "arithmetic mean (channel S)",
    "standard deviation (channel S)",
    "arithmetic mean (channel V)",
    "standard deviation (channel V)",
    *(f"histogram comparison (reference image from category {c}, channel S)" for c in range(8)),
    *(f"histogram comparison (reference image from category {c}, channel V)" for c in range(8)),
    "GLCM homogeneity (dx=1, dy=0)",
    "GLCM homogeneity (dx=0, dy=1)",
    "GLCM entropy (dx=1, dy=0)",
    "GLCM entropy (dx=0, dy=1)",
)


@dataclass(frozen=True)
class CategoryInfo:
    category: int
    brightness_level: int
    color_level: int


#: The eight grades present in the dataset, on the 3 brightness x 5 colour grid.
CATEGORIES = (
    CategoryInfo(0, 1, 2),
    CategoryInfo(1, 2, 3),
    CategoryInfo(2, 2, 5),
    CategoryInfo(3, 2, 2),
    CategoryInfo(4, 2, 4),
    CategoryInfo(5, 3, 5),
    CategoryInfo(6, 2, 1),
    CategoryInfo(7, 1, 3),
)


@dataclass(frozen=True)
class ReferenceSet:
    """Per-category S and V reference histograms, indexed by category 0..7."""

    s_hists: tuple
    v_hists: tuple

    def __post_init__(self):
        if len(self.s_hists) != N_CATEGORIES or len(self.v_hists) != N_CATEGORIES:
            raise MissingCategory("a reference set needs exactly 8 categories")
        bins = {h.bin_count for h in (*self.s_hists, *self.v_hists)}
        if len(bins) != 1:
            raise BinCountMismatch(f"reference histograms disagree on bin count: {sorted(bins)}")

    @property
    def bins(self):
        return self.s_hists[0].bin_count

    def permuted(self, order):
        """Reference set whose slot ``i`` holds category ``order[i]``."""
        return ReferenceSet(
            tuple(self.s_hists[c] for c in order), tuple(self.v_hists[c] for c in order)
        )


def build_reference_set(references, bins=64):
    """Build reference histograms from ``(category, masked_image, mask)`` triples."""
    by_cat = {}
    for category, img, mask in references:
        category = int(category)
        if not 0 <= category < N_CATEGORIES:
            raise ValueError(f"category {category} outside 0..7")
        if category in by_cat:
            raise DuplicateCategory(f"category {category} has more than one reference image")
        by_cat[category] = (img, mask)
    missing = sorted(set(range(N_CATEGORIES)) - set(by_cat))
    if missing:
        raise MissingCategory(f"no reference image for categories {missing}")

    s_hists, v_hists = [], []
    for c in range(N_CATEGORIES):
        img, mask = by_cat[c]
        rgb = check_rgb(img)
        m = check_mask(mask, shape=rgb.shape, require_nonempty=True)
        hsv = rgb_to_hsv(rgb)
        s_hists.append(masked_histogram(hsv, "S", m, bins))
        v_hists.append(masked_histogram(hsv, "V", m, bins))
    return ReferenceSet(tuple(s_hists), tuple(v_hists))


def extract_features(masked, mask, refs, glcm_levels=64, bins=64):
    """Compute the 24-feature vector of one segmented stone."""
    if refs.bins != bins:
        raise BinCountMismatch(f"reference set uses {refs.bins} bins, extraction asked for {bins}")
    rgb = check_rgb(masked)
    m = check_mask(mask, shape=rgb.shape, require_nonempty=True)
    hsv = rgb_to_hsv(rgb)

    s_stats = channel_stats(hsv, "S", m)
    v_stats = channel_stats(hsv, "V", m)
    s_hist = masked_histogram(hsv, "S", m, bins)
    v_hist = masked_histogram(hsv, "V", m, bins)

    gray = to_grayscale(rgb)
    try:
        glcms = [normalize_glcm(compute_glcm(gray, m, off, glcm_levels)) for off in (HORIZONTAL, VERTICAL)]
    except EmptyMatrix as exc:
        raise EmptyRoi("stone region has no adjacent pixel pairs for texture features") from exc
    texture = [glcm_homogeneity(g) for g in glcms] + [glcm_entropy(g) for g in glcms]

    values = [s_stats.mean, s_stats.std_dev, v_stats.mean, v_stats.std_dev]
    values += [bhattacharyya_distance(s_hist, ref) for ref in refs.s_hists]
    values += [bhattacharyya_distance(v_hist, ref) for ref in refs.v_hists]
    values += texture
    return np.asarray(values, dtype=np.float64)


class Standardizer(BaseEstimator, TransformerMixin):
    """Per-column z-scoring with population std; zero std is replaced by 1."""

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        if X.shape[0] < 2:
            raise InsufficientData("standardization needs at least 2 rows")
        self.mean_ = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
        self.scale_ = scale
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "mean_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return (X - self.mean_) / self.scale_

    def inverse_transform(self, X):
        check_is_fitted(self, "mean_")
        return np.asarray(X, dtype=np.float64) * self.scale_ + self.mean_

    def to_dict(self):
        check_is_fitted(self, "mean_")
        return {"mean": self.mean_.tolist(), "std": self.scale_.tolist()}

    @classmethod
    def from_dict(cls, d):
        self = cls()
        self.mean_ = np.asarray(d["mean"], dtype=np.float64)
        self.scale_ = np.asarray(d["std"], dtype=np.float64)
        self.n_features_in_ = self.mean_.size
        return self


def standardize_fit(train):
    return Standardizer().fit(train)


class FeatureExtractor(BaseEstimator, TransformerMixin):
    """Raw RGB photographs in, 24-feature rows out.

    ``fit`` takes the first image of each category in ``y`` as that
    category's reference stone, mirroring the manifest fallback rule.
    """

    def __init__(self, bins=64, glcm_levels=64, roi_params=None):
        self.bins = bins
        self.glcm_levels = glcm_levels
        self.roi_params = roi_params

    def fit(self, X, y):
        y = np.asarray(y)
        refs = []
        for c in range(N_CATEGORIES):
            hits = np.flatnonzero(y == c)
            if hits.size == 0:
                raise MissingCategory(f"no image with category {c}")
            masked, mask = extract_roi(X[hits[0]], self.roi_params)
            refs.append((c, masked, mask))
        self.references_ = build_reference_set(refs, self.bins)
        return self

    def transform(self, X):
        check_is_fitted(self, "references_")
        rows = []
        for img in X:
            masked, mask = extract_roi(img, self.roi_params)
            rows.append(extract_features(masked, mask, self.references_, self.glcm_levels, self.bins))
        return np.vstack(rows)


# ---------------------------------------------------------------- CSV I/O

CSV_HEADER = ("id", "label", *FEATURE_NAMES)


def format_float(v):
    return format(float(v), ".17g")


def feature_csv_text(ids, labels, X):
    """Serialize a feature table; floats keep 17 significant digits."""
    X = np.asarray(X, dtype=np.float64)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for sid, label, row in zip(ids, labels, X):
        writer.writerow([sid, "" if label is None else int(label), *(format_float(v) for v in row)])
    return buf.getvalue()


def write_feature_csv(path, ids, labels, X):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(feature_csv_text(ids, labels, X))


def read_feature_csv(path):
    """Return ``(ids, labels, X)``; missing labels come back as -1."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty feature file") from None
        if tuple(header) != CSV_HEADER:
            raise ParseError(f"{path}: header must be {','.join(CSV_HEADER)}")
        ids, labels, rows = [], [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(CSV_HEADER):
                raise ParseError(f"{path}:{lineno}: expected {len(CSV_HEADER)} fields, got {len(rec)}")
            try:
                label = int(rec[1]) if rec[1] != "" else -1
                values = [float(v) for v in rec[2:]]
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
            if label != -1 and not 0 <= label < N_CATEGORIES:
                raise ParseError(f"{path}:{lineno}: label {label} outside 0..7")
            ids.append(rec[0])
            labels.append(label)
            rows.append(values)
    if not rows:
        raise ParseError(f"{path}: no feature rows")
    return ids, np.asarray(labels, dtype=np.int64), np.asarray(rows, dtype=np.float64)
