"""Batch feature extraction over a manifest, and the feature table it produces."""

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..exceptions import EmeraldError, ValidationError
from ..features import build_reference_set, extract_features, feature_csv_text, read_feature_csv
from ..imaging import extract_roi, read_image
from ..learning._common import worker_count

log = logging.getLogger(__name__)


class BatchFailed(EmeraldError):
    """Every image in the batch failed."""


@dataclass
class FeatureTable:
    ids: list
    labels: np.ndarray
    X: np.ndarray
    provenance: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def __len__(self):
        return len(self.ids)

    @property
    def provenance_hash(self):
        return provenance_hash(self.provenance)

    def to_csv(self):
        return feature_csv_text(self.ids, self.labels, self.X)

    def write(self, path):
        """Write the CSV plus a ``<path>.provenance.json`` sidecar."""
        path = Path(path)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(self.to_csv())
        sidecar = {
            "provenance": self.provenance,
            "provenance_sha256": self.provenance_hash,
            "failures": self.failures,
        }
        with open(sidecar_path(path), "w", encoding="utf-8") as fh:
            json.dump(sidecar, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def read(cls, path):
        ids, labels, X = read_feature_csv(path)
        prov, failures = {}, []
        side = sidecar_path(path)
        if side.is_file():
            with open(side, encoding="utf-8") as fh:
                doc = json.load(fh)
            prov = doc.get("provenance", {})
            failures = doc.get("failures", [])
        return cls(ids, labels, X, prov, failures)


def sidecar_path(path):
    path = Path(path)
    return path.with_name(path.name + ".provenance.json")


def provenance_hash(provenance):
    if not provenance:
        return None
    blob = json.dumps(provenance, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _segment(manifest, rel):
    img = read_image(manifest.resolve(rel))
    return extract_roi(img, manifest.params.roi)


def build_manifest_references(manifest):
    """Reference set from the manifest's (or fallback) reference images."""
    paths, source = manifest.reference_paths()
    triples = []
    for c, rel in paths.items():
        try:
            masked, mask = _segment(manifest, rel)
        except (EmeraldError, OSError, ValueError) as exc:
            raise ValidationError(f"reference image for category {c} ({rel}) is unusable: {exc}") from exc
        triples.append((c, masked, mask))
    refs = build_reference_set(triples, manifest.params.bins)
    return refs, {str(c): p for c, p in paths.items()}, source


def extract_batch(manifest, n_jobs=None):
    """Segment and describe every manifest image.

    Per-image failures are recorded and skipped; rows keep manifest order.
    Raises :class:`BatchFailed` only when no image succeeds.
    """
    refs, ref_paths, ref_source = build_manifest_references(manifest)
    p = manifest.params

    def one(record):
        try:
            masked, mask = _segment(manifest, record.path)
            return extract_features(masked, mask, refs, p.glcm_levels, p.bins), None
        except (EmeraldError, OSError, ValueError) as exc:
            return None, f"{type(exc).__name__}: {exc}"

    workers = worker_count(n_jobs)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, manifest.images))
    else:
        results = [one(r) for r in manifest.images]

    ids, labels, rows, failures = [], [], [], []
    for record, (vec, err) in zip(manifest.images, results):
        if err is not None:
            log.warning("skipping %s: %s", record.path, err)
            failures.append({"id": record.id, "path": record.path, "error": err})
            continue
        ids.append(record.id)
        labels.append(record.label)
        rows.append(vec)
    if not rows:
        raise BatchFailed(f"all {len(manifest.images)} images failed; first error: {failures[0]['error']}")

    provenance = {
        "manifest_sha256": manifest.sha256(),
        "params": p.to_dict(),
        "references": ref_paths,
        "reference_source": ref_source,
    }
    return FeatureTable(ids, np.asarray(labels, dtype=np.int64), np.vstack(rows), provenance, failures)
