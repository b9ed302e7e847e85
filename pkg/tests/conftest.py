import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from emerald.pipeline import extract_batch, generate_dataset, load_manifest  # noqa: E402


@pytest.fixture(scope="session")
def synthetic_manifest_path(tmp_path_factory):
    out = tmp_path_factory.mktemp("synthetic")
    return generate_dataset(out, per_class=24, seed=7)


@pytest.fixture(scope="session")
def synthetic_table(synthetic_manifest_path):
    return extract_batch(load_manifest(synthetic_manifest_path))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def blobs(n_per_class=24, n_classes=8, n_features=24, spread=0.3, seed=0):
    """Gaussian blobs around well separated class centres."""
    r = np.random.default_rng(seed)
    centres = r.normal(0, 5, (n_classes, n_features))
    X = np.vstack([c + r.normal(0, spread, (n_per_class, n_features)) for c in centres])
    y = np.repeat(np.arange(n_classes), n_per_class)
    return X, y


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split("AC")[1].split(":")[0])):
            terminalreporter.write_line(line)
