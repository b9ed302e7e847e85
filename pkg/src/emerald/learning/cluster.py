"""k-means++ / Lloyd and affinity propagation, plus majority cluster-to-class mapping."""

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array

from ..exceptions import InsufficientData, NoConvergence, TooFewInstances
from ..features import Standardizer
from .evaluation import confusion_matrix, macro_f1


@dataclass
class Clustering:
    assignments: np.ndarray
    k: int
    centers: np.ndarray
    """Centroids (k-means) or exemplar row indices (affinity propagation)."""
    inertia: float = float("nan")
    converged: bool = True
    n_iter: int = 0


def _sq_dists(X, C):
    d = (X ** 2).sum(axis=1)[:, None] - 2.0 * X @ C.T + (C ** 2).sum(axis=1)[None, :]
    return np.maximum(d, 0.0)


def _kmeanspp(X, k, rng):
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    closest = _sq_dists(X, centers[:1])[:, 0]
    for j in range(1, k):
        total = closest.sum()
        if total > 0:
            pick = rng.choice(n, p=closest / total)
        else:
            pick = rng.integers(n)
        centers[j] = X[pick]
        closest = np.minimum(closest, _sq_dists(X, centers[j:j + 1])[:, 0])
    return centers


def _lloyd(X, centers, max_iter):
    """Lloyd iterations from ``centers``; returns labels, centers, inertia, iterations."""
    k = centers.shape[0]
    labels = None
    prev_inertia = np.inf
    for it in range(1, max_iter + 1):
        d = _sq_dists(X, centers)
        new_labels = np.argmin(d, axis=1)
        point_cost = d[np.arange(X.shape[0]), new_labels]
        inertia = point_cost.sum()
        assert inertia <= prev_inertia * (1 + 1e-9) + 1e-9, "WCSS increased during Lloyd iteration"
        if labels is not None and np.array_equal(new_labels, labels):
            return labels, centers, float(inertia), it
        labels = new_labels
        counts = np.bincount(labels, minlength=k)
        # an empty cluster takes over the point farthest from its centroid
        for j in np.flatnonzero(counts == 0):
            donors = counts[labels] > 1
            far = int(np.argmax(np.where(donors, point_cost, -1.0)))
            counts[labels[far]] -= 1
            labels[far] = j
            counts[j] = 1
            point_cost[far] = 0.0
        new_centers = np.zeros_like(centers)
        np.add.at(new_centers, labels, X)
        centers = new_centers / counts[:, None]
        prev_inertia = float(((X - centers[labels]) ** 2).sum())
    d = _sq_dists(X, centers)
    labels = np.argmin(d, axis=1)
    return labels, centers, float(d[np.arange(X.shape[0]), labels].sum()), max_iter


class KMeans(BaseEstimator, ClusterMixin):
    """k-means with k-means++ seeding and ``n_init`` restarts; lowest WCSS wins."""

    def __init__(self, n_clusters=8, n_init=10, max_iter=300, standardize=True, random_state=None):
        self.n_clusters = n_clusters
        self.n_init = n_init
        self.max_iter = max_iter
        self.standardize = standardize
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        k = self.n_clusters
        if k < 1:
            raise ValueError("n_clusters must be >= 1")
        if k > X.shape[0]:
            raise TooFewInstances(f"{k} clusters requested for {X.shape[0]} instances")
        if self.standardize:
            self.standardizer_ = Standardizer().fit(X) if X.shape[0] >= 2 else None
            if self.standardizer_ is not None:
                X = self.standardizer_.transform(X)
        rng = np.random.default_rng(self.random_state)
        best = None
        for _ in range(self.n_init):
            centers = _kmeanspp(X, k, rng)
            run = _lloyd(X, centers, self.max_iter)
            if best is None or run[2] < best[2]:
                best = run
        self.labels_, self.cluster_centers_, self.inertia_, self.n_iter_ = best
        return self

    def predict(self, X):
        X = check_array(X, dtype=np.float64)
        if self.standardize and getattr(self, "standardizer_", None) is not None:
            X = self.standardizer_.transform(X)
        return np.argmin(_sq_dists(X, self.cluster_centers_), axis=1)

    def to_clustering(self):
        return Clustering(self.labels_, self.n_clusters, self.cluster_centers_, self.inertia_,
                          True, self.n_iter_)


class AffinityPropagation(BaseEstimator, ClusterMixin):
    """Frey-Dueck responsibility/availability message passing.

    Similarity is negative squared Euclidean distance; ``preference=None``
    uses the median off-diagonal similarity. Tiny seeded noise is added to
    the similarities to break exact ties between identical points.
    """

    def __init__(self, damping=0.9, preference=None, max_iter=1000, convergence_iter=50,
                 standardize=True, random_state=None):
        self.damping = damping
        self.preference = preference
        self.max_iter = max_iter
        self.convergence_iter = convergence_iter
        self.standardize = standardize
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        n = X.shape[0]
        if n < 2:
            raise InsufficientData("affinity propagation needs at least 2 instances")
        if not 0.5 <= self.damping < 1:
            raise ValueError("damping must lie in [0.5, 1)")
        if self.standardize:
            X = Standardizer().fit_transform(X)

        S = -_sq_dists(X, X)
        off_diag = S[~np.eye(n, dtype=bool)]
        pref = float(np.median(off_diag)) if self.preference is None else float(self.preference)
        np.fill_diagonal(S, pref)
        rng = np.random.default_rng(self.random_state)
        tiny = np.finfo(np.float64)
        S = S + (tiny.eps * S + tiny.tiny * 100) * rng.standard_normal((n, n))

        R = np.zeros((n, n))
        A = np.zeros((n, n))
        rows = np.arange(n)
        lam = self.damping
        stable = 0
        last = None
        converged = False
        it = 0
        for it in range(1, self.max_iter + 1):
            AS = A + S
            top = np.argmax(AS, axis=1)
            first = AS[rows, top]
            AS[rows, top] = -np.inf
            second = AS.max(axis=1)
            R_new = S - first[:, None]
            R_new[rows, top] = S[rows, top] - second
            R = lam * R + (1 - lam) * R_new

            Rp = np.maximum(R, 0)
            Rp[rows, rows] = R[rows, rows]
            col = Rp.sum(axis=0)
            A_new = col[None, :] - Rp
            diag = A_new[rows, rows].copy()
            A_new = np.minimum(A_new, 0)
            A_new[rows, rows] = diag
            A = lam * A + (1 - lam) * A_new

            exemplars = (np.diag(A) + np.diag(R)) > 0
            if last is not None and np.array_equal(exemplars, last):
                stable += 1
            else:
                stable = 0
            last = exemplars
            if stable >= self.convergence_iter and exemplars.any():
                converged = True
                break

        centers = np.flatnonzero(last)
        if centers.size == 0:
            centers = np.array([int(np.argmax(np.diag(A) + np.diag(R)))])
        labels = np.argmax(S[:, centers], axis=1)
        labels[centers] = np.arange(centers.size)

        self.cluster_centers_indices_ = centers
        self.labels_ = labels
        self.n_iter_ = it
        self.converged_ = converged
        if not converged:
            warnings.warn(
                f"affinity propagation did not converge in {self.max_iter} iterations; "
                "returning the last assignment",
                NoConvergence,
                stacklevel=2,
            )
        return self

    def to_clustering(self):
        return Clustering(self.labels_, int(self.cluster_centers_indices_.size),
                          self.cluster_centers_indices_, float("nan"), self.converged_, self.n_iter_)


def kmeans(X, k=8, seed=None, **kwargs):
    return KMeans(n_clusters=k, random_state=seed, **kwargs).fit(X).to_clustering()


def affinity_propagation(X, damping=0.9, preference=None, seed=None, **kwargs):
    return AffinityPropagation(damping=damping, preference=preference, random_state=seed,
                               **kwargs).fit(X).to_clustering()


def map_clusters_to_labels(assignments, labels, n_classes=8):
    """Map each cluster to its most frequent true label (ties -> lower label).

    Returns ``(accuracy, macro_f1, mapping)`` where ``mapping`` is a dict
    from cluster index to class label.
    """
    assignments = np.asarray(assignments, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if assignments.shape != labels.shape:
        raise ValueError("assignments and labels differ in length")
    mapping = {}
    for c in np.unique(assignments):
        members = labels[assignments == c]
        mapping[int(c)] = int(np.argmax(np.bincount(members, minlength=n_classes)))
    predicted = np.array([mapping[int(c)] for c in assignments], dtype=np.int64)
    cm = confusion_matrix(labels, predicted, n_classes)
    accuracy = float(np.trace(cm) / cm.sum()) if cm.sum() else 0.0
    return accuracy, macro_f1(cm), mapping
