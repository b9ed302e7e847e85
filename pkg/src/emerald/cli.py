"""Command-line entry point: ``emerald <command> ...``.

Exit codes: 0 success, 1 validation or usage error, 2 some images failed
during extraction, 3 internal error.
"""

import argparse
import json
import logging
import sys
import traceback
import warnings
from pathlib import Path

import numpy as np

from .exceptions import EmeraldError, ProvenanceMismatch
from .features import N_CATEGORIES, format_float
from .learning import learning_curve, load_model, save_model
from .learning.evaluation import curve_csv_text
from .pipeline import (
    ALGORITHMS,
    FeatureTable,
    UsageError,
    extract_batch,
    generate_dataset,
    generate_manifest,
    load_manifest,
    make_classifier,
    run_experiment,
)
from .pipeline.experiment import SUPERVISED, UNSUPERVISED
from .ranking import (
    classifier_attribute_eval,
    correlation_rank,
    gain_ratio_rank,
    info_gain_rank,
)

EXIT_OK, EXIT_USAGE, EXIT_PARTIAL, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("emerald")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write_text(path, text):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _fractions(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad fraction list {text!r}") from None


def cmd_extract(args):
    manifest = load_manifest(args.manifest).with_params(
        bins=args.bins, glcm_levels=args.glcm_levels, closing_radius=args.closing_radius
    )
    table = extract_batch(manifest, n_jobs=args.threads)
    table.write(args.out)
    log.info("wrote %d rows to %s", len(table), args.out)
    if table.failures:
        for f in table.failures:
            print(f"failed: {f['path']}: {f['error']}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _labelled(table):
    if np.any(table.labels < 0):
        raise UsageError("this command needs labelled features (the label column is empty)")
    return table.X, table.labels


def cmd_train(args):
    table = FeatureTable.read(args.features)
    X, y = _labelled(table)
    model = make_classifier(args.algo, args.seed).fit(X, y)
    prov = {"features_provenance_sha256": table.provenance_hash}
    save_model(model, args.out, provenance=prov)
    return EXIT_OK


def cmd_predict(args):
    model, prov = load_model(args.model)
    table = FeatureTable.read(args.features)
    expected = (prov or {}).get("features_provenance_sha256")
    if expected != table.provenance_hash:
        warnings.warn(
            "feature file provenance differs from the features the model was trained on",
            ProvenanceMismatch,
            stacklevel=1,
        )
    proba = model.predict_proba(table.X)
    pred = np.argmax(proba, axis=1)
    lines = ["id,label,predicted," + ",".join(f"p{c}" for c in range(N_CATEGORIES))]
    for sid, label, p, row in zip(table.ids, table.labels, pred, proba):
        label_txt = "" if label < 0 else str(int(label))
        lines.append(f"{sid},{label_txt},{int(p)}," + ",".join(format_float(v) for v in row))
    _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_evaluate(args):
    table = FeatureTable.read(args.features)
    X, y = _labelled(table)
    protocol = "holdout" if args.holdout is not None else "cv"
    report = run_experiment(X, y, args.algo, protocol, args.seed, args.folds,
                            args.holdout if args.holdout is not None else 0.25)
    sys.stdout.write(report.to_text())
    if args.out:
        _write_text(args.out, report.to_json())
    return EXIT_OK


def cmd_cluster(args):
    table = FeatureTable.read(args.features)
    X, y = _labelled(table)
    report = run_experiment(X, y, args.algo, seed=args.seed)
    sys.stdout.write(report.to_text())
    if args.out:
        _write_text(args.out, report.to_json())
    return EXIT_OK


def cmd_rank(args):
    table = FeatureTable.read(args.features)
    X, y = _labelled(table)
    if args.method == "classifier":
        ranking = classifier_attribute_eval(X, y, make_classifier(args.algo, args.seed), args.folds, args.seed)
    elif args.method == "infogain":
        ranking = info_gain_rank(X, y, args.bins)
    elif args.method == "gainratio":
        ranking = gain_ratio_rank(X, y, args.bins)
    else:
        ranking = correlation_rank(X, y)
    sys.stdout.write(ranking.to_text())
    if args.out:
        _write_text(args.out, ranking.to_csv())
    return EXIT_OK


def cmd_curve(args):
    table = FeatureTable.read(args.features)
    X, y = _labelled(table)
    points = learning_curve(X, y, make_classifier(args.algo, args.seed), args.fractions,
                            args.repeats, args.seed)
    _write_text(args.out, curve_csv_text(points))
    return EXIT_OK


def cmd_synth(args):
    path = generate_dataset(args.out, per_class=args.per_class, seed=args.seed, size=args.size)
    print(path)
    return EXIT_OK


def cmd_manifest(args):
    doc = generate_manifest(args.root)
    _write_text(args.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def build_parser():
    p = _Parser(prog="emerald", description="Emerald grading from stone photographs.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("extract", help="segment images and write the 24-feature CSV")
    s.add_argument("--manifest", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--bins", type=int)
    s.add_argument("--glcm-levels", type=int)
    s.add_argument("--closing-radius", type=int)
    s.add_argument("--threads", type=int, help="worker threads (default: $EMERALD_THREADS or 1)")
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("train", help="train a classifier and save it as JSON")
    s.add_argument("--features", required=True)
    s.add_argument("--algo", choices=SUPERVISED, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("predict", help="grade stones with a saved model")
    s.add_argument("--model", required=True)
    s.add_argument("--features", required=True)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("evaluate", help="cross-validate (or hold out) a classifier")
    s.add_argument("--features", required=True)
    s.add_argument("--algo", required=True, help=f"one of {', '.join(ALGORITHMS)}")
    s.add_argument("--folds", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--holdout", type=float, help="hold-out test fraction instead of CV")
    s.add_argument("--out", help="write the report as JSON")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("cluster", help="cluster and score with majority label mapping")
    s.add_argument("--features", required=True)
    s.add_argument("--algo", choices=UNSUPERVISED, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="write the report as JSON")
    s.set_defaults(func=cmd_cluster)

    s = sub.add_parser("rank", help="rank the 24 features")
    s.add_argument("--features", required=True)
    s.add_argument("--method", choices=("classifier", "infogain", "gainratio", "correlation"), required=True)
    s.add_argument("--algo", choices=("rf", "mlp"), default="rf")
    s.add_argument("--folds", type=int, default=10)
    s.add_argument("--bins", type=int, default=10, help="equal-frequency bins for infogain/gainratio")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="write the ranking as CSV")
    s.set_defaults(func=cmd_rank)

    s = sub.add_parser("curve", help="learning curve as CSV")
    s.add_argument("--features", required=True)
    s.add_argument("--algo", choices=SUPERVISED, required=True)
    s.add_argument("--fractions", type=_fractions, default=[0.1 * i for i in range(1, 10)])
    s.add_argument("--repeats", type=int, default=5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_curve)

    s = sub.add_parser("synth", help="render a synthetic 8-category image dataset")
    s.add_argument("--out", required=True)
    s.add_argument("--per-class", type=int, default=24)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--size", type=int, default=96)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("manifest", help="generate a manifest from one sub-directory per category")
    s.add_argument("--root", required=True)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_manifest)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except EmeraldError as exc:
        print(f"emerald: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
