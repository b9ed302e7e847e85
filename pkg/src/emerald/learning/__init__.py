"""Supervised classifiers, clustering and evaluation harness."""

import numpy as np

from .cluster import AffinityPropagation, Clustering, KMeans, affinity_propagation, kmeans, map_clusters_to_labels
from .evaluation import (
    CurvePoint,
    EvalReport,
    confusion_matrix,
    evaluate_cv,
    evaluate_holdout,
    learning_curve,
    macro_f1,
)
from .mlp import MLPClassifier
from .persistence import load_model, save_model
from .trees import DecisionTree, ExtraTreesClassifier, RandomForestClassifier

__all__ = [
    "AffinityPropagation", "Clustering", "CurvePoint", "DecisionTree", "EvalReport",
    "ExtraTreesClassifier", "KMeans", "MLPClassifier", "RandomForestClassifier",
    "affinity_propagation", "confusion_matrix", "evaluate_cv", "evaluate_holdout",
    "kmeans", "learning_curve", "load_model", "macro_f1", "map_clusters_to_labels",
    "predict", "save_model", "train_extra_trees", "train_mlp", "train_random_forest",
]


def train_mlp(X, y, seed=None, **config):
    return MLPClassifier(random_state=seed, **config).fit(X, y)


def train_random_forest(X, y, seed=None, **config):
    return RandomForestClassifier(random_state=seed, **config).fit(X, y)


def train_extra_trees(X, y, seed=None, **config):
    return ExtraTreesClassifier(random_state=seed, **config).fit(X, y)


def predict(model, features):
    """``(label, scores)`` for one feature vector; ties go to the lowest label."""
    scores = model.predict_proba(np.asarray(features, dtype=np.float64).reshape(1, -1))[0]
    return int(np.argmax(scores)), scores
