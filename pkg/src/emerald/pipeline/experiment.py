"""Dispatch of the five grading algorithms over a feature table."""

import json
from dataclasses import dataclass

import numpy as np

from ..exceptions import EmeraldError
from ..learning import (
    AffinityPropagation,
    ExtraTreesClassifier,
    KMeans,
    MLPClassifier,
    RandomForestClassifier,
    evaluate_cv,
    evaluate_holdout,
    map_clusters_to_labels,
)

SUPERVISED = ("mlp", "rf", "ert")
UNSUPERVISED = ("kmeans", "ap")
ALGORITHMS = SUPERVISED + UNSUPERVISED


class UsageError(EmeraldError, ValueError):
    pass


def make_classifier(algo, seed=None):
    if algo == "mlp":
        return MLPClassifier(random_state=seed)
    if algo == "rf":
        return RandomForestClassifier(random_state=seed)
    if algo == "ert":
        return ExtraTreesClassifier(random_state=seed)
    raise UsageError(f"unknown supervised algorithm {algo!r}; choose one of {', '.join(SUPERVISED)}")


@dataclass
class ClusterReport:
    algorithm: str
    k: int
    accuracy: float
    macro_f1: float
    mapping: dict
    assignments: list
    converged: bool = True

    def to_dict(self):
        return {
            "algorithm": self.algorithm,
            "k": self.k,
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "mapping": {str(k): v for k, v in sorted(self.mapping.items())},
            "assignments": self.assignments,
            "converged": self.converged,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self):
        lines = [
            f"algorithm: {self.algorithm}",
            f"clusters: {self.k}" + ("" if self.converged else " (did not converge)"),
            f"accuracy (majority mapping): {self.accuracy:.4f}",
            f"macro F1: {self.macro_f1:.4f}",
            "cluster -> label: " + ", ".join(f"{k}->{v}" for k, v in sorted(self.mapping.items())),
        ]
        return "\n".join(lines) + "\n"


def run_clustering(X, y, algo, seed=0, k=8):
    if algo == "kmeans":
        model = KMeans(n_clusters=k, random_state=seed).fit(X)
    elif algo == "ap":
        model = AffinityPropagation(random_state=seed).fit(X)
    else:
        raise UsageError(f"unknown clustering algorithm {algo!r}; choose one of {', '.join(UNSUPERVISED)}")
    c = model.to_clustering()
    acc, f1, mapping = map_clusters_to_labels(c.assignments, y)
    return ClusterReport(algo, int(c.k), acc, f1, mapping, [int(a) for a in c.assignments], bool(c.converged))


def run_experiment(X, y, algorithm, protocol="cv", seed=0, folds=10, holdout=0.25):
    """EvalReport for supervised algorithms, ClusterReport for clustering ones."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if algorithm in UNSUPERVISED:
        return run_clustering(X, y, algorithm, seed)
    if algorithm not in SUPERVISED:
        raise UsageError(f"unknown algorithm {algorithm!r}; choose one of {', '.join(ALGORITHMS)}")
    est = make_classifier(algorithm, seed)
    if protocol == "cv":
        return evaluate_cv(X, y, est, folds, seed)
    if protocol == "holdout":
        return evaluate_holdout(X, y, est, holdout, seed)
    raise UsageError(f"unknown protocol {protocol!r}; choose 'cv' or 'holdout'")
