"""Gini decision trees and the two tree ensembles (random forest, extra trees)."""

import math

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..exceptions import InsufficientData
from ._common import check_labels, spawn_seeds, worker_count

LEAF = -1


class DecisionTree:
    """Array-backed binary tree. Samples with ``x[feature] <= threshold`` go left.

    Leaves have ``feature == -1`` and keep the raw class counts of the
    training samples that reached them.
    """

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.float64)

    @property
    def node_count(self):
        return self.feature.size

    def apply(self, X):
        """Index of the leaf reached by every row of ``X``."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.feature[node] != LEAF)
        while active.size:
            cur = node[active]
            go_left = X[active, self.feature[cur]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = active[self.feature[node[active]] != LEAF]
        return node

    def predict_proba(self, X):
        counts = self.value[self.apply(X)]
        return counts / counts.sum(axis=1, keepdims=True)

    def to_dict(self):
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["feature"], d["threshold"], d["left"], d["right"], d["value"])


def _best_exhaustive_split(x, y_onehot, total):
    """Best Gini threshold over midpoints of consecutive distinct values.

    Returns ``(score, threshold)`` where a higher score is a purer split, or
    ``None`` when ``x`` is constant.
    """
    order = np.argsort(x, kind="stable")
    xs = x[order]
    distinct = xs[1:] > xs[:-1]
    if not distinct.any():
        return None
    n = xs.size
    left = np.cumsum(y_onehot[order], axis=0)[:-1]
    right = total - left
    n_left = np.arange(1, n, dtype=np.float64)
    n_right = n - n_left
    # maximising sum(l^2)/n_l + sum(r^2)/n_r minimises weighted Gini impurity
    score = (left ** 2).sum(axis=1) / n_left + (right ** 2).sum(axis=1) / n_right
    score = np.where(distinct, score, -np.inf)
    i = int(np.argmax(score))
    threshold = 0.5 * (xs[i] + xs[i + 1])
    if threshold >= xs[i + 1]:
        threshold = xs[i]
    return float(score[i]), float(threshold)


def _random_split(x, y_onehot, total, rng):
    """Gini score of one uniformly drawn threshold in ``[min(x), max(x))``."""
    lo, hi = x.min(), x.max()
    if not hi > lo:
        return None
    threshold = float(rng.uniform(lo, hi))
    go_left = x <= threshold
    left = y_onehot[go_left].sum(axis=0)
    right = total - left
    n_left = float(go_left.sum())
    n_right = x.size - n_left
    score = (left ** 2).sum() / n_left + (right ** 2).sum() / n_right
    return float(score), threshold


def build_tree(X, y, n_classes, max_features, splitter, rng):
    """Grow a tree until every leaf is pure or holds fewer than 2 samples.

    At each node features are visited in a random order until
    ``max_features`` non-constant ones have been scored; the best split
    wins, ties going to the lower feature index.
    """
    n_samples, n_features = X.shape
    onehot = np.zeros((n_samples, n_classes))
    onehot[np.arange(n_samples), y] = 1.0

    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(counts):
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(counts)
        return len(feature) - 1

    root_idx = np.arange(n_samples)
    stack = [(root_idx, new_node(onehot.sum(axis=0)))]
    while stack:
        idx, node = stack.pop()
        counts = value[node]
        if idx.size < 2 or np.count_nonzero(counts) <= 1:
            continue
        sub_onehot = onehot[idx]

        scored = []
        for f in rng.permutation(n_features):
            x = X[idx, f]
            if splitter == "best":
                res = _best_exhaustive_split(x, sub_onehot, counts)
            else:
                res = _random_split(x, sub_onehot, counts, rng)
            if res is not None:
                scored.append((int(f), res[0], res[1]))
                if len(scored) == max_features:
                    break
        if not scored:
            continue
        scored.sort(key=lambda t: t[0])
        best_f, best_score, best_t = scored[0]
        for f, score, t in scored[1:]:
            if score > best_score:
                best_f, best_score, best_t = f, score, t

        go_left = X[idx, best_f] <= best_t
        left_idx, right_idx = idx[go_left], idx[~go_left]
        feature[node] = best_f
        threshold[node] = best_t
        left_node = new_node(onehot[left_idx].sum(axis=0))
        right_node = new_node(onehot[right_idx].sum(axis=0))
        left[node] = left_node
        right[node] = right_node
        stack.append((right_idx, right_node))
        stack.append((left_idx, left_node))

    return DecisionTree(feature, threshold, left, right, value)


def _resolve_max_features(max_features, n_features):
    if max_features in (None, "all"):
        return n_features
    if max_features == "sqrt":
        return max(1, math.ceil(math.sqrt(n_features)))
    if isinstance(max_features, float):
        return max(1, math.ceil(max_features * n_features))
    return max(1, min(int(max_features), n_features))


def _fit_one(X, y, n_classes, max_features, splitter, bootstrap, seed):
    rng = np.random.default_rng(seed)
    if bootstrap:
        sample = rng.integers(0, X.shape[0], X.shape[0])
        X, y = X[sample], y[sample]
    return build_tree(X, y, n_classes, max_features, splitter, rng)


class _BaseForest(BaseEstimator, ClassifierMixin):
    _splitter = "best"

    def fit(self, X, y):
        X = check_array(X, dtype=np.float64, ensure_min_samples=0)
        if X.shape[0] == 0:
            raise InsufficientData("cannot grow trees on an empty training set")
        y = check_labels(y, self.n_classes, n_rows=X.shape[0])
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.arange(self.n_classes)
        k = _resolve_max_features(self.max_features, X.shape[1])
        seeds = spawn_seeds(self.random_state, self.n_estimators)
        self.estimators_ = Parallel(n_jobs=worker_count(self.n_jobs), prefer="threads")(
            delayed(_fit_one)(X, y, self.n_classes, k, self._splitter, self.bootstrap, s) for s in seeds
        )
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "estimators_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        proba = np.zeros((X.shape[0], self.n_classes))
        for tree in self.estimators_:
            proba += tree.predict_proba(X)
        return proba / len(self.estimators_)

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)


class RandomForestClassifier(_BaseForest):
    """Bagged Gini trees with exhaustive midpoint thresholds on a random feature subset."""

    _splitter = "best"

    def __init__(self, n_estimators=100, max_features="sqrt", bootstrap=True, n_classes=8,
                 random_state=None, n_jobs=None):
        self.n_estimators = n_estimators
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.n_classes = n_classes
        self.random_state = random_state
        self.n_jobs = n_jobs


class ExtraTreesClassifier(_BaseForest):
    """Extremely randomized trees: one uniform random threshold per candidate feature.

    Every tree sees the full training set unless ``bootstrap`` is set.
    """

    _splitter = "random"

    def __init__(self, n_estimators=100, max_features="sqrt", bootstrap=False, n_classes=8,
                 random_state=None, n_jobs=None):
        self.n_estimators = n_estimators
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.n_classes = n_classes
        self.random_state = random_state
        self.n_jobs = n_jobs
