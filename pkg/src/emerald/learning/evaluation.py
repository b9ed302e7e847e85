"""Cross-validation, hold-out evaluation, learning curves and their metrics."""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import clone
from sklearn.model_selection import StratifiedKFold, train_test_split

from ..exceptions import InsufficientData
from ._common import child_seed, worker_count


def confusion_matrix(y_true, y_pred, n_classes=8):
    """Rows are true labels, columns predicted labels."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def per_class_f1(confusion):
    cm = np.asarray(confusion, dtype=np.float64)
    tp = np.diag(cm)
    predicted = cm.sum(axis=0)
    actual = cm.sum(axis=1)
    precision = np.divide(tp, predicted, out=np.zeros_like(tp), where=predicted > 0)
    recall = np.divide(tp, actual, out=np.zeros_like(tp), where=actual > 0)
    denom = precision + recall
    return np.divide(2 * precision * recall, denom, out=np.zeros_like(tp), where=denom > 0)


def macro_f1(confusion):
    """Unweighted mean of per-class F1; a class with P + R = 0 scores 0."""
    cm = np.asarray(confusion)
    if np.any(cm < 0):
        raise ValueError("confusion counts must be non-negative")
    return float(per_class_f1(cm).mean())


def accuracy_from_confusion(confusion):
    cm = np.asarray(confusion)
    total = cm.sum()
    return float(np.trace(cm) / total) if total else 0.0


@dataclass
class EvalReport:
    accuracy: float
    macro_f1: float
    confusion: np.ndarray
    per_fold: list = field(default_factory=list)
    protocol: str = "cv"

    @classmethod
    def from_confusion(cls, confusion, per_fold=(), protocol="cv"):
        cm = np.asarray(confusion, dtype=np.int64)
        return cls(accuracy_from_confusion(cm), macro_f1(cm), cm, list(per_fold), protocol)

    def to_dict(self):
        return {
            "protocol": self.protocol,
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "confusion": self.confusion.tolist(),
            "per_fold": [{"accuracy": a, "macro_f1": f} for a, f in self.per_fold],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d):
        per_fold = [(p["accuracy"], p["macro_f1"]) for p in d.get("per_fold", [])]
        return cls(d["accuracy"], d["macro_f1"], np.asarray(d["confusion"], dtype=np.int64),
                   per_fold, d.get("protocol", "cv"))

    def to_text(self):
        cm = self.confusion
        k = cm.shape[0]
        width = max(5, len(str(cm.max())) + 1)
        lines = [
            f"protocol: {self.protocol}",
            f"accuracy: {self.accuracy:.4f}  ({int(np.trace(cm))}/{int(cm.sum())})",
            f"macro F1: {self.macro_f1:.4f}",
            "",
            "true\\pred" + "".join(f"{j:>{width}}" for j in range(k)),
        ]
        for i in range(k):
            lines.append(f"{i:>9}" + "".join(f"{v:>{width}}" for v in cm[i]))
        return "\n".join(lines) + "\n"


def _seeded(estimator, seed):
    est = clone(estimator)
    if "random_state" in est.get_params():
        est.set_params(random_state=seed)
    return est


def _n_classes(estimator, y):
    return int(estimator.get_params().get("n_classes", max(8, int(np.max(y)) + 1)))


def stratified_folds(y, folds, seed):
    """List of ``(train_idx, test_idx)``; raises if a class has fewer rows than folds."""
    y = np.asarray(y)
    if folds < 2:
        raise InsufficientData("cross-validation needs at least 2 folds")
    counts = np.bincount(y)
    present = counts[counts > 0]
    if present.size == 0 or present.min() < folds:
        raise InsufficientData(
            f"every class needs >= {folds} instances for {folds}-fold CV (smallest has {int(present.min()) if present.size else 0})"
        )
    skf = StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed)
    return list(skf.split(np.zeros((y.size, 1)), y))


def _run_fold(estimator, X, y, train, test, seed, n_classes):
    model = _seeded(estimator, seed).fit(X[train], y[train])
    pred = model.predict(X[test])
    return confusion_matrix(y[test], pred, n_classes)


def evaluate_cv(X, y, estimator, folds=10, seed=0, n_jobs=None):
    """Stratified k-fold CV with one aggregated confusion matrix.

    Each fold trains a fresh clone of ``estimator`` seeded with a sub-seed
    of ``seed``; models that standardize do so on the training split only.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    splits = stratified_folds(y, folds, seed)
    n_classes = _n_classes(estimator, y)
    cms = Parallel(n_jobs=worker_count(n_jobs), prefer="threads")(
        delayed(_run_fold)(estimator, X, y, tr, te, child_seed(seed, i), n_classes)
        for i, (tr, te) in enumerate(splits)
    )
    per_fold = [(accuracy_from_confusion(cm), macro_f1(cm)) for cm in cms]
    return EvalReport.from_confusion(sum(cms), per_fold, protocol=f"stratified {folds}-fold CV")


def evaluate_holdout(X, y, estimator, test_size=0.25, seed=0):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    try:
        tr, te = train_test_split(np.arange(y.size), test_size=test_size, random_state=seed, stratify=y)
    except ValueError as exc:
        raise InsufficientData(str(exc)) from None
    cm = _run_fold(estimator, X, y, tr, te, child_seed(seed, 0), _n_classes(estimator, y))
    return EvalReport.from_confusion(cm, [(accuracy_from_confusion(cm), macro_f1(cm))],
                                     protocol=f"stratified hold-out {test_size:g}")


@dataclass(frozen=True)
class CurvePoint:
    fraction: float
    train_accuracy: float
    validation_accuracy: float
    """NaN when the fraction leaves no validation rows."""


def stratified_subsample(y, fraction, rng):
    """Indices of a per-class ``round(fraction * n_c)`` subsample (at least 1 per class)."""
    picked = []
    for c in np.unique(y):
        members = np.flatnonzero(y == c)
        take = max(1, int(math.floor(fraction * members.size + 0.5)))
        picked.append(rng.permutation(members)[:take])
    return np.sort(np.concatenate(picked))


def learning_curve(X, y, estimator, fractions, repeats=5, seed=0):
    """Mean train / held-out accuracy at each training fraction."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if np.unique(y).size < 2:
        raise InsufficientData("learning curves need at least two classes")
    points = []
    for fi, frac in enumerate(fractions):
        if not 0 < frac <= 1:
            raise ValueError(f"fraction {frac} outside (0, 1]")
        train_scores, val_scores = [], []
        for r in range(repeats):
            s = child_seed(seed, fi * repeats + r)
            rng = np.random.default_rng(s)
            train = stratified_subsample(y, frac, rng)
            held = np.setdiff1d(np.arange(y.size), train)
            model = _seeded(estimator, s).fit(X[train], y[train])
            train_scores.append(float(np.mean(model.predict(X[train]) == y[train])))
            if held.size:
                val_scores.append(float(np.mean(model.predict(X[held]) == y[held])))
        val = float(np.mean(val_scores)) if val_scores else float("nan")
        points.append(CurvePoint(float(frac), float(np.mean(train_scores)), val))
    return points


def curve_csv_text(points):
    lines = ["fraction,train_accuracy,validation_accuracy"]
    for p in points:
        val = "" if math.isnan(p.validation_accuracy) else format(p.validation_accuracy, ".17g")
        lines.append(f"{p.fraction:.17g},{p.train_accuracy:.17g},{val}")
    return "\n".join(lines) + "\n"
