"""Automated emerald grading: segmentation, colour/texture features and classifiers."""

from .color import Histogram, bhattacharyya_distance, channel_stats, masked_histogram, rgb_to_hsv
from .features import (
    CATEGORIES,
    FEATURE_NAMES,
    FeatureExtractor,
    ReferenceSet,
    Standardizer,
    build_reference_set,
    extract_features,
)
from .imaging import RoiParams, extract_roi, read_image
from .texture import Glcm, GlcmOffset, compute_glcm, glcm_entropy, glcm_homogeneity, normalize_glcm

__version__ = "0.1.0"

__all__ = [
    "CATEGORIES", "FEATURE_NAMES", "FeatureExtractor", "Glcm", "GlcmOffset", "Histogram",
    "ReferenceSet", "RoiParams", "Standardizer", "bhattacharyya_distance", "build_reference_set",
    "channel_stats", "compute_glcm", "extract_features", "extract_roi", "glcm_entropy",
    "glcm_homogeneity", "masked_histogram", "normalize_glcm", "read_image", "rgb_to_hsv",
]
