import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.metrics import f1_score

from emerald.exceptions import InsufficientData, ModelFormatError, NoConvergence, TooFewInstances
from emerald.learning import (
    AffinityPropagation,
    DecisionTree,
    ExtraTreesClassifier,
    KMeans,
    MLPClassifier,
    RandomForestClassifier,
    affinity_propagation,
    confusion_matrix,
    evaluate_cv,
    evaluate_holdout,
    kmeans,
    learning_curve,
    load_model,
    macro_f1,
    map_clusters_to_labels,
    predict,
    save_model,
    train_extra_trees,
    train_mlp,
    train_random_forest,
)
from emerald.learning._common import child_seed
from emerald.learning.evaluation import EvalReport, curve_csv_text, stratified_folds, stratified_subsample

from conftest import blobs


def two_class(n=20, d=24, seed=0):
    r = np.random.default_rng(seed)
    X = r.normal(size=(2 * n, d))
    y = np.repeat([0, 1], n)
    X[y == 1] += 4.0
    return X, y


class ConstantZero(BaseEstimator, ClassifierMixin):
    def __init__(self, n_classes=8):
        self.n_classes = n_classes

    def fit(self, X, y):
        return self

    def predict(self, X):
        return np.zeros(len(X), dtype=int)


class FirstFeatureParity(BaseEstimator, ClassifierMixin):
    """Predicts ``round(x0) mod k``; training accuracy depends on which rows it saw."""

    def __init__(self, random_state=None, n_classes=8):
        self.random_state = random_state
        self.n_classes = n_classes

    def fit(self, X, y):
        self.shift_ = int(np.sum(y)) % 2
        return self

    def predict(self, X):
        return (np.round(X[:, 0]).astype(int) + self.shift_) % 2


# --------------------------------------------------------------------- MLP

class TestMlp:
    def test_separable_training_accuracy(self):
        X, y = two_class()
        m = train_mlp(X, y, seed=1)
        assert np.mean(m.predict(X) == y) == 1.0
        assert m.layer_sizes_ == [24, 32, 8]

    def test_single_class(self):
        X, _ = two_class()
        with pytest.raises(InsufficientData):
            train_mlp(X, np.zeros(len(X), int), seed=0)

    def test_deterministic(self):
        X, y = two_class()
        a = train_mlp(X, y, seed=5, epochs=20)
        b = train_mlp(X, y, seed=5, epochs=20)
        for wa, wb in zip(a.coefs_ + a.intercepts_, b.coefs_ + b.intercepts_):
            assert wa.tobytes() == wb.tobytes()

    def test_zero_weights_uniform(self):
        X, y = two_class()
        m = train_mlp(X, y, seed=0, epochs=1)
        m.coefs_ = [np.zeros_like(w) for w in m.coefs_]
        m.intercepts_ = [np.zeros_like(b) for b in m.intercepts_]
        label, scores = predict(m, X[0])
        assert label == 0
        np.testing.assert_allclose(scores, np.full(8, 1 / 8), atol=1e-15)

    def test_loss_decreases(self):
        X, y = blobs(n_per_class=10, seed=2)
        m = MLPClassifier(epochs=50, random_state=0).fit(X, y)
        assert m.loss_curve_[-1] < m.loss_curve_[0]


# ----------------------------------------------------------------- forests

@pytest.mark.parametrize("cls", [RandomForestClassifier, ExtraTreesClassifier])
class TestForest:
    def test_training_accuracy_on_blobs(self, cls):
        X, y = blobs()
        f = cls(n_estimators=30, random_state=0).fit(X, y)
        assert np.mean(f.predict(X) == y) >= 0.99

    def test_one_instance_per_class(self, cls):
        X = np.random.default_rng(1).normal(size=(8, 24))
        y = np.arange(8)
        f = cls(n_estimators=50, random_state=3).fit(X, y)
        if cls is ExtraTreesClassifier:
            # without bootstrap every tree sees every point and grows pure leaves
            np.testing.assert_array_equal(f.predict(X), y)
        else:
            # a bootstrap tree may miss a point, but the ensemble still interpolates
            assert np.mean(f.predict(X) == y) >= 0.875

    def test_same_seed_same_structure(self, cls):
        X, y = blobs(n_per_class=6)
        a = cls(n_estimators=10, random_state=9).fit(X, y)
        b = cls(n_estimators=10, random_state=9).fit(X, y)
        assert [t.to_dict() for t in a.estimators_] == [t.to_dict() for t in b.estimators_]

    def test_threads_do_not_change_result(self, cls, monkeypatch):
        X, y = blobs(n_per_class=6)
        a = cls(n_estimators=8, random_state=4, n_jobs=1).fit(X, y)
        monkeypatch.setenv("EMERALD_THREADS", "3")
        b = cls(n_estimators=8, random_state=4).fit(X, y)
        assert [t.to_dict() for t in a.estimators_] == [t.to_dict() for t in b.estimators_]

    def test_empty(self, cls):
        with pytest.raises(InsufficientData):
            cls().fit(np.zeros((0, 24)), np.zeros(0, int))

    def test_sklearn_params(self, cls):
        p = cls(n_estimators=7).get_params()
        assert p["n_estimators"] == 7 and p["max_features"] == "sqrt"


def test_trainer_bootstrap_defaults():
    assert train_random_forest.__name__ and RandomForestClassifier().bootstrap is True
    assert ExtraTreesClassifier().bootstrap is False


def test_random_forest_uses_only_midpoint_thresholds():
    X, y = blobs(n_per_class=5, n_features=6)
    f = RandomForestClassifier(n_estimators=5, random_state=0, bootstrap=False).fit(X, y)
    for tree in f.estimators_:
        for feat, thr in zip(tree.feature, tree.threshold):
            if feat < 0:
                continue
            # adjacency is within the node, so compare against every pairwise midpoint
            vals = np.unique(X[:, feat])
            mids = (vals[:, None] + vals[None, :]) / 2
            assert np.min(np.abs(mids - thr)) < 1e-12


def test_extra_trees_thresholds_within_range():
    X, y = blobs(n_per_class=5, n_features=6)
    f = ExtraTreesClassifier(n_estimators=5, random_state=0).fit(X, y)
    for tree in f.estimators_:
        for feat, thr in zip(tree.feature, tree.threshold):
            if feat >= 0:
                assert X[:, feat].min() <= thr <= X[:, feat].max()


def test_single_tree_pure_leaf():
    tree = DecisionTree(np.array([-1]), np.array([0.0]), np.array([-1]), np.array([-1]),
                        np.array([[0, 0, 0, 5, 0, 0, 0, 0]], float))
    f = RandomForestClassifier(n_estimators=1)
    f.estimators_, f.n_features_in_, f.classes_ = [tree], 24, np.arange(8)
    label, scores = predict(f, np.zeros(24))
    assert label == 3 and scores[3] == 1.0 and scores.sum() == 1.0


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["mlp", "rf", "ert"]))
def test_scores_sum_to_one(seed, algo):
    X, y = blobs(n_per_class=4, n_features=5, spread=2.0, seed=seed)
    if algo == "mlp":
        m = train_mlp(X, y, seed=seed, epochs=3)
    elif algo == "rf":
        m = train_random_forest(X, y, seed=seed, n_estimators=5)
    else:
        m = train_extra_trees(X, y, seed=seed, n_estimators=5)
    P = m.predict_proba(np.random.default_rng(seed).normal(0, 5, (20, 5)))
    assert np.all(P >= 0)
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-9)


# ------------------------------------------------------------- persistence

@pytest.mark.parametrize("algo", ["mlp", "rf", "ert"])
def test_model_round_trip(tmp_path, algo):
    X, y = blobs(n_per_class=5, spread=1.5)
    trainer = {"mlp": train_mlp, "rf": train_random_forest, "ert": train_extra_trees}[algo]
    kwargs = {"epochs": 10} if algo == "mlp" else {"n_estimators": 6}
    m = trainer(X, y, seed=2, **kwargs)
    save_model(m, tmp_path / "m.json", provenance={"k": "v"})
    doc = json.loads((tmp_path / "m.json").read_text())
    assert doc["format_version"] == 1 and doc["variant"] == algo
    assert {"config", "standardization", "parameters"} <= doc.keys()
    loaded, prov = load_model(tmp_path / "m.json")
    assert prov == {"k": "v"}
    Q = np.random.default_rng(0).normal(0, 3, (30, 24))
    assert loaded.predict_proba(Q).tobytes() == m.predict_proba(Q).tobytes()


def test_newer_format_rejected(tmp_path):
    X, y = blobs(n_per_class=3)
    save_model(train_random_forest(X, y, seed=0, n_estimators=2), tmp_path / "m.json")
    doc = json.loads((tmp_path / "m.json").read_text())
    doc["format_version"] = 2
    (tmp_path / "m.json").write_text(json.dumps(doc))
    with pytest.raises(ModelFormatError):
        load_model(tmp_path / "m.json")


def test_garbage_model_rejected(tmp_path):
    (tmp_path / "m.json").write_text("{not json")
    with pytest.raises(ModelFormatError):
        load_model(tmp_path / "m.json")


# -------------------------------------------------------------- clustering

class TestKMeans:
    def test_k1(self, rng):
        X = rng.normal(size=(15, 4))
        km = KMeans(n_clusters=1, random_state=0, standardize=False).fit(X)
        assert not km.labels_.any()
        np.testing.assert_allclose(km.cluster_centers_[0], X.mean(axis=0))

    def test_two_blobs(self, rng):
        X = np.vstack([rng.normal(0, 0.1, (12, 3)), rng.normal(10, 0.1, (12, 3))])
        c = kmeans(X, 2, seed=0)
        assert len(set(c.assignments[:12])) == 1 and len(set(c.assignments[12:])) == 1
        assert c.assignments[0] != c.assignments[12]

    def test_k_equals_n(self, rng):
        X = rng.normal(size=(9, 3))
        c = kmeans(X, 9, seed=1)
        assert sorted(c.assignments.tolist()) == list(range(9))
        assert c.inertia == pytest.approx(0.0, abs=1e-12)

    def test_too_few(self):
        with pytest.raises(TooFewInstances):
            kmeans(np.zeros((3, 2)), 4)

    def test_deterministic(self):
        X, _ = blobs(n_per_class=6, spread=2)
        a, b = kmeans(X, 8, seed=3), kmeans(X, 8, seed=3)
        np.testing.assert_array_equal(a.assignments, b.assignments)
        assert a.inertia == b.inertia

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 1000), st.integers(1, 6))
    def test_assignments_below_k(self, seed, k):
        X = np.random.default_rng(seed).normal(size=(12, 3))
        c = kmeans(X, k, seed=seed)
        assert c.assignments.max() < k and c.k == k


class TestAffinityPropagation:
    def test_two_groups(self):
        X = np.vstack([np.zeros((5, 3)), np.full((5, 3), 10.0)])
        c = affinity_propagation(X, seed=0)
        assert c.k == 2
        assert len(set(c.assignments[:5])) == 1 and len(set(c.assignments[5:])) == 1
        assert c.assignments[0] != c.assignments[5]

    def test_large_preference(self, rng):
        X = rng.normal(size=(7, 2))
        c = affinity_propagation(X, preference=1e6, seed=0)
        assert c.k == 7
        assert sorted(c.assignments.tolist()) == list(range(7))

    def test_symmetric_duplicates(self, rng):
        base = rng.normal(size=(4, 2))
        X = np.vstack([base, base + 50])
        c = affinity_propagation(X, seed=0)
        a, b = c.assignments[:4], c.assignments[4:]
        # the same partition of the two mirrored halves
        assert [len(set(a[a == v])) for v in a] == [len(set(b[b == v])) for v in b]
        assert np.array_equal(a[:, None] == a[None, :], b[:, None] == b[None, :])

    def test_no_convergence_warns(self, rng):
        X = rng.normal(size=(20, 3))
        with pytest.warns(NoConvergence):
            est = AffinityPropagation(max_iter=2, random_state=0).fit(X)
        assert est.labels_.shape == (20,)

    def test_bad_damping(self):
        with pytest.raises(ValueError):
            affinity_propagation(np.zeros((3, 2)), damping=0.3)

    def test_blobs_converge(self):
        X, _ = blobs(n_per_class=6)
        with warnings.catch_warnings():
            warnings.simplefilter("error", NoConvergence)
            c = affinity_propagation(X, seed=0)
        assert c.converged and c.assignments.max() < c.k


class TestMapClusters:
    def test_identity(self):
        y = np.repeat(np.arange(8), 3)
        acc, f1, mapping = map_clusters_to_labels(y, y)
        assert acc == 1.0 and f1 == 1.0
        assert mapping == {i: i for i in range(8)}

    def test_majority(self):
        labels = np.array([0, 0, 0, 1])
        acc, _, mapping = map_clusters_to_labels(np.zeros(4, int), labels)
        assert mapping == {0: 0}
        assert acc * 4 == 3

    def test_single_cluster_balanced(self):
        y = np.repeat(np.arange(8), 24)
        acc, _, _ = map_clusters_to_labels(np.zeros(192, int), y)
        assert acc == pytest.approx(1 / 8)


# -------------------------------------------------------------- evaluation

class TestMetrics:
    def test_diagonal(self):
        assert macro_f1(np.diag([3, 4, 5])) == 1.0

    def test_two_class_hand_computation(self):
        cm = np.array([[8, 2], [3, 7]])
        assert macro_f1(cm) == pytest.approx((16 / 21 + 14 / 19) / 2, abs=1e-12)
        assert macro_f1(cm) == pytest.approx(0.7494, abs=5e-5)
        y_true = [0] * 10 + [1] * 10
        y_pred = [0] * 8 + [1] * 2 + [0] * 3 + [1] * 7
        assert macro_f1(cm) == pytest.approx(f1_score(y_true, y_pred, average="macro"))

    def test_absent_class_scores_zero(self):
        cm = np.zeros((3, 3), int)
        cm[0, 0] = cm[1, 1] = 5
        assert macro_f1(cm) == pytest.approx(2 / 3)

    def test_confusion_188_of_192(self):
        diag = [23, 24, 24, 24, 24, 24, 24, 21]
        cm = np.diag(diag)
        cm[0, 1] = 1
        cm[7, 2] = 3
        report = EvalReport.from_confusion(cm)
        assert cm.sum() == 192
        assert report.accuracy == pytest.approx(188 / 192)
        assert report.accuracy == pytest.approx(0.979, abs=5e-4)

    def test_confusion_matrix_counts(self):
        cm = confusion_matrix([0, 1, 1, 2], [0, 1, 2, 2], 3)
        np.testing.assert_array_equal(cm, [[1, 0, 0], [0, 1, 1], [0, 0, 1]])


class TestCv:
    def test_separable(self):
        X, y = blobs(n_per_class=10)
        r = evaluate_cv(X, y, RandomForestClassifier(n_estimators=15), folds=5, seed=0)
        assert r.accuracy == 1.0 and r.macro_f1 == 1.0
        assert r.confusion.sum() == 80

    def test_constant_predictor(self):
        X, y = blobs(n_per_class=10)
        r = evaluate_cv(X, y, ConstantZero(), folds=5, seed=0)
        assert r.accuracy == pytest.approx(0.125)

    def test_each_instance_in_one_fold(self):
        y = np.repeat(np.arange(8), 24)
        folds = stratified_folds(y, 10, seed=4)
        seen = np.concatenate([te for _, te in folds])
        assert sorted(seen.tolist()) == list(range(192))
        for tr, te in folds:
            assert not set(tr) & set(te)

    def test_too_few_per_class(self):
        X, y = blobs(n_per_class=3)
        with pytest.raises(InsufficientData):
            evaluate_cv(X, y, ConstantZero(), folds=5)

    def test_deterministic(self):
        X, y = blobs(n_per_class=10, spread=4)
        a = evaluate_cv(X, y, ExtraTreesClassifier(n_estimators=5), folds=5, seed=1)
        b = evaluate_cv(X, y, ExtraTreesClassifier(n_estimators=5), folds=5, seed=1)
        np.testing.assert_array_equal(a.confusion, b.confusion)

    def test_holdout(self):
        X, y = blobs(n_per_class=8)
        r = evaluate_holdout(X, y, RandomForestClassifier(n_estimators=10), test_size=0.25, seed=0)
        assert r.confusion.sum() == 16 and r.accuracy == 1.0

    def test_report_exports(self):
        cm = np.diag([2, 3])
        r = EvalReport.from_confusion(cm, per_fold=[(1.0, 1.0)])
        d = json.loads(r.to_json())
        assert d["accuracy"] == 1.0 and d["confusion"] == [[2, 0], [0, 3]]
        assert EvalReport.from_dict(d).accuracy == 1.0
        assert "accuracy" in r.to_text().lower()


class TestLearningCurve:
    def test_full_fraction_has_no_validation(self):
        X, y = blobs(n_per_class=6)
        (p,) = learning_curve(X, y, RandomForestClassifier(n_estimators=5), [1.0], repeats=1)
        assert math.isnan(p.validation_accuracy) and p.train_accuracy == 1.0
        assert curve_csv_text([p]).splitlines()[1].endswith(",")

    def test_separable_flat(self):
        X, y = blobs(n_per_class=10)
        pts = learning_curve(X, y, RandomForestClassifier(n_estimators=10), [0.5, 0.8], repeats=2)
        for p in pts:
            assert p.train_accuracy == 1.0 and p.validation_accuracy == 1.0

    def test_means_of_repeats(self):
        r = np.random.default_rng(0)
        X = r.uniform(0, 3, (40, 2))
        y = np.repeat([0, 1], 20)
        est = FirstFeatureParity()
        (p,) = learning_curve(X, y, est, [0.5], repeats=2, seed=11)
        train_acc, val_acc = [], []
        for rep in range(2):
            s = child_seed(11, rep)
            tr = stratified_subsample(y, 0.5, np.random.default_rng(s))
            held = np.setdiff1d(np.arange(40), tr)
            m = FirstFeatureParity().fit(X[tr], y[tr])
            train_acc.append(np.mean(m.predict(X[tr]) == y[tr]))
            val_acc.append(np.mean(m.predict(X[held]) == y[held]))
        assert p.train_accuracy == pytest.approx(sum(train_acc) / 2, abs=1e-12)
        assert p.validation_accuracy == pytest.approx(sum(val_acc) / 2, abs=1e-12)

    def test_bad_fraction(self):
        X, y = blobs(n_per_class=4)
        with pytest.raises(ValueError):
            learning_curve(X, y, ConstantZero(), [0.0])
