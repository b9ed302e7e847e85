"""Dataset ingestion, batch extraction, experiments and synthetic fixtures."""

from .batch import BatchFailed, FeatureTable, extract_batch
from .experiment import ALGORITHMS, ClusterReport, UsageError, make_classifier, run_clustering, run_experiment
from .manifest import DatasetManifest, ExtractionParams, ImageRecord, generate_manifest, load_manifest, parse_manifest
from .synth import generate_dataset, render_disc, render_stone

__all__ = [
    "ALGORITHMS", "BatchFailed", "ClusterReport", "DatasetManifest", "ExtractionParams",
    "FeatureTable", "ImageRecord", "UsageError", "extract_batch", "generate_dataset",
    "generate_manifest", "load_manifest", "make_classifier", "parse_manifest",
    "render_disc", "render_stone", "run_clustering", "run_experiment",
]
