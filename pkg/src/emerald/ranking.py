"""Feature rankings: leave-one-feature-out accuracy drop, information gain,
gain ratio and absolute correlation with the class index."""

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from .exceptions import InsufficientData
from .features import FEATURE_DESCRIPTIONS
from .learning._common import worker_count
from .learning.evaluation import evaluate_cv

METHODS = ("classifier_eval", "info_gain", "gain_ratio", "correlation")


@dataclass(frozen=True)
class FeatureRanking:
    """``entries`` holds ``(feature_number, score)`` best first; numbers are 1-based."""

    method: str
    entries: tuple

    @classmethod
    def from_scores(cls, method, scores):
        scores = [float(s) for s in scores]
        order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
        return cls(method, tuple((i + 1, scores[i]) for i in order))

    @property
    def features(self):
        return [f for f, _ in self.entries]

    def top(self, k):
        """0-based column indices of the ``k`` best features."""
        return [f - 1 for f, _ in self.entries[:k]]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rank", "feature", "score", "method"])
        for rank, (f, s) in enumerate(self.entries, start=1):
            w.writerow([rank, f"f{f}", format(s, ".17g"), self.method])
        return buf.getvalue()

    def to_text(self):
        lines = [f"Feature ranking ({self.method})", f"{'Rank':<9}{'Score':>9}  Feature"]
        for rank, (f, s) in enumerate(self.entries, start=1):
            label = f"{rank} (Best)" if rank == 1 else str(rank)
            desc = FEATURE_DESCRIPTIONS[f - 1] if len(self.entries) == len(FEATURE_DESCRIPTIONS) else ""
            lines.append(f"{label:<9}{s:>9.4f}  f{f}: {desc}".rstrip())
        return "\n".join(lines) + "\n"


def _check_instances(X, y, min_classes=2):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ValueError("X must be (n_samples, n_features) with one label per row")
    if np.unique(y).size < min_classes:
        raise InsufficientData(f"ranking needs at least {min_classes} classes")
    return X, y


def classifier_attribute_eval(X, y, estimator, folds=10, seed=0, n_jobs=None):
    """Score each feature by the CV accuracy lost when it is dropped.

    All runs share the same folds and seed, so a positive score means the
    feature helped under an otherwise identical protocol.
    """
    X, y = _check_instances(X, y)
    baseline = evaluate_cv(X, y, estimator, folds, seed).accuracy

    def drop(i):
        keep = [j for j in range(X.shape[1]) if j != i]
        return evaluate_cv(X[:, keep], y, estimator, folds, seed).accuracy

    reduced = Parallel(n_jobs=worker_count(n_jobs), prefer="threads")(
        delayed(drop)(i) for i in range(X.shape[1])
    )
    return FeatureRanking.from_scores("classifier_eval", [baseline - a for a in reduced])


def equal_frequency_bins(x, bins=10):
    """Bin index per value using the empirical ``k/bins`` quantiles as cut points.

    Equal values always share a bin, so heavily tied features yield fewer
    than ``bins`` occupied bins.
    """
    x = np.asarray(x, dtype=np.float64)
    cuts = np.quantile(x, np.arange(1, bins) / bins)
    return np.searchsorted(cuts, x, side="right")


def _entropy(labels):
    counts = np.bincount(labels)
    p = counts[counts > 0] / labels.size
    return float(-np.sum(p * np.log(p)))


def _conditional_entropy(y, groups):
    h = 0.0
    for g in np.unique(groups):
        sel = groups == g
        h += sel.mean() * _entropy(y[sel])
    return h


def _info_gain_and_split(x, y, bins):
    b = equal_frequency_bins(x, bins)
    ig = _entropy(y) - _conditional_entropy(y, b)
    return max(ig, 0.0), _entropy(b)


def info_gain_rank(X, y, bins=10):
    X, y = _check_instances(X, y)
    scores = [_info_gain_and_split(X[:, j], y, bins)[0] for j in range(X.shape[1])]
    return FeatureRanking.from_scores("info_gain", scores)


def gain_ratio_rank(X, y, bins=10):
    """Information gain divided by the entropy of the binned feature (0 if that is 0)."""
    X, y = _check_instances(X, y)
    scores = []
    for j in range(X.shape[1]):
        ig, split = _info_gain_and_split(X[:, j], y, bins)
        scores.append(min(ig / split, 1.0) if split > 0 else 0.0)
    return FeatureRanking.from_scores("gain_ratio", scores)


def correlation_rank(X, y):
    """``|Pearson r|`` between each feature and the integer class index."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] < 2:
        raise InsufficientData("correlation needs at least 2 instances")
    yc = y - y.mean()
    y_norm = math.sqrt(float(yc @ yc))
    scores = []
    for j in range(X.shape[1]):
        xc = X[:, j] - X[:, j].mean()
        x_norm = math.sqrt(float(xc @ xc))
        if x_norm == 0 or y_norm == 0:
            scores.append(0.0)
        else:
            scores.append(min(abs(float(xc @ yc)) / (x_norm * y_norm), 1.0))
    return FeatureRanking.from_scores("correlation", scores)


def top_k_evaluation(X, y, ranking, k, estimator, folds=10, seed=0):
    """Cross-validate ``estimator`` on only the ``k`` best-ranked features.

    Selected columns keep their original order, so ``k`` equal to the
    feature count reproduces the full evaluation exactly.
    """
    X = np.asarray(X, dtype=np.float64)
    if not 1 <= k <= X.shape[1]:
        raise ValueError(f"k must lie in 1..{X.shape[1]}")
    return evaluate_cv(X[:, sorted(ranking.top(k))], y, estimator, folds, seed)
