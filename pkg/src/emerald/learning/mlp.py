"""One-hidden-layer perceptron with softmax output, trained by momentum SGD."""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..exceptions import InsufficientData
from ..features import Standardizer
from ._common import check_labels


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class MLPClassifier(BaseEstimator, ClassifierMixin):
    """inputs -> ``hidden_units`` logistic units -> ``n_classes`` softmax outputs.

    Inputs are z-scored with statistics from the training rows, stored on
    the model. Training minimises mean cross-entropy with mini-batch
    gradient descent plus classical momentum; batches are reshuffled every
    epoch from a generator seeded by ``random_state``.
    """

    def __init__(self, hidden_units=32, learning_rate=0.01, momentum=0.9, batch_size=16,
                 epochs=500, n_classes=8, random_state=None):
        self.hidden_units = hidden_units
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.batch_size = batch_size
        self.epochs = epochs
        self.n_classes = n_classes
        self.random_state = random_state

    def fit(self, X, y):
        X = check_array(X, dtype=np.float64, ensure_min_samples=0)
        y = check_labels(y, self.n_classes, n_rows=X.shape[0])
        if np.unique(y).size < 2:
            raise InsufficientData("the MLP needs at least two classes in the training set")
        rng = np.random.default_rng(self.random_state)

        self.standardizer_ = Standardizer().fit(X)
        Z = self.standardizer_.transform(X)
        n, d = Z.shape
        h, c = self.hidden_units, self.n_classes
        targets = np.zeros((n, c))
        targets[np.arange(n), y] = 1.0

        lim1 = np.sqrt(6.0 / (d + h))
        lim2 = np.sqrt(6.0 / (h + c))
        params = [
            rng.uniform(-lim1, lim1, (d, h)),
            np.zeros(h),
            rng.uniform(-lim2, lim2, (h, c)),
            np.zeros(c),
        ]
        velocity = [np.zeros_like(p) for p in params]
        lr, mu = self.learning_rate, self.momentum

        self.loss_curve_ = []
        for _ in range(self.epochs):
            order = rng.permutation(n)
            epoch_loss = 0.0
            for start in range(0, n, self.batch_size):
                batch = order[start:start + self.batch_size]
                xb, tb = Z[batch], targets[batch]
                w1, b1, w2, b2 = params
                hidden = _sigmoid(xb @ w1 + b1)
                proba = _softmax(hidden @ w2 + b2)
                epoch_loss -= np.sum(tb * np.log(np.clip(proba, 1e-300, None)))

                delta_out = (proba - tb) / batch.size
                delta_hidden = (delta_out @ w2.T) * hidden * (1.0 - hidden)
                grads = [xb.T @ delta_hidden, delta_hidden.sum(axis=0),
                         hidden.T @ delta_out, delta_out.sum(axis=0)]
                for p, v, g in zip(params, velocity, grads):
                    v *= mu
                    v -= lr * g
                    p += v
            self.loss_curve_.append(epoch_loss / n)

        self.coefs_ = [params[0], params[2]]
        self.intercepts_ = [params[1], params[3]]
        self.n_features_in_ = d
        self.classes_ = np.arange(c)
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "coefs_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        Z = self.standardizer_.transform(X)
        hidden = _sigmoid(Z @ self.coefs_[0] + self.intercepts_[0])
        return _softmax(hidden @ self.coefs_[1] + self.intercepts_[1])

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)

    @property
    def layer_sizes_(self):
        check_is_fitted(self, "coefs_")
        return [self.coefs_[0].shape[0], self.coefs_[0].shape[1], self.coefs_[1].shape[1]]
