"""Versioned JSON documents for trained classifiers."""

import json

import numpy as np

from ..exceptions import ModelFormatError
from ..features import Standardizer
from .mlp import MLPClassifier
from .trees import DecisionTree, ExtraTreesClassifier, RandomForestClassifier

FORMAT_VERSION = 1

_VARIANTS = {
    "mlp": MLPClassifier,
    "rf": RandomForestClassifier,
    "ert": ExtraTreesClassifier,
}


def variant_of(model):
    for name, cls in _VARIANTS.items():
        if type(model) is cls:
            return name
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_to_dict(model, provenance=None):
    variant = variant_of(model)
    config = {k: v for k, v in model.get_params().items() if k != "n_jobs"}
    doc = {
        "format_version": FORMAT_VERSION,
        "variant": variant,
        "config": config,
        "n_features": int(model.n_features_in_),
        "standardization": None,
        "parameters": None,
        "provenance": provenance,
    }
    if variant == "mlp":
        doc["standardization"] = model.standardizer_.to_dict()
        doc["parameters"] = {
            "layer_sizes": model.layer_sizes_,
            "weights": [w.tolist() for w in model.coefs_],
            "biases": [b.tolist() for b in model.intercepts_],
        }
    else:
        doc["parameters"] = {"trees": [t.to_dict() for t in model.estimators_]}
    return doc


def model_from_dict(doc):
    try:
        version = int(doc["format_version"])
        variant = doc["variant"]
    except (KeyError, TypeError, ValueError):
        raise ModelFormatError("model document lacks format_version/variant") from None
    if version > FORMAT_VERSION:
        raise ModelFormatError(
            f"model format_version {version} is newer than supported version {FORMAT_VERSION}"
        )
    if variant not in _VARIANTS:
        raise ModelFormatError(f"unknown model variant {variant!r}")
    model = _VARIANTS[variant](**doc["config"])
    params = doc["parameters"]
    model.n_features_in_ = int(doc["n_features"])
    model.classes_ = np.arange(model.n_classes)
    if variant == "mlp":
        model.standardizer_ = Standardizer.from_dict(doc["standardization"])
        model.coefs_ = [np.asarray(w, dtype=np.float64) for w in params["weights"]]
        model.intercepts_ = [np.asarray(b, dtype=np.float64) for b in params["biases"]]
    else:
        model.estimators_ = [DecisionTree.from_dict(t) for t in params["trees"]]
    return model


def save_model(model, path, provenance=None):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model, provenance), fh, sort_keys=True)
        fh.write("\n")


def load_model(path):
    """Return ``(model, provenance)``."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON ({exc})") from None
    return model_from_dict(doc), doc.get("provenance")
