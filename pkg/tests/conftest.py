import os
import time

import numpy as np
import pytest

from propdmg import augment, synthgen
from propdmg.cascade import CascadeConfig, train_cascade
from propdmg.dataset import build_dataset, split_dataset
from propdmg.evalkit import evaluate_cascade
from propdmg.flightlog import DamageLabel

ACCEPTANCE_LINES = []
FULL_RUN_BUDGET_S = 600.0

SMALL_DAMAGES = (
    DamageLabel(),
    DamageLabel.tipcut(5, 5),
    DamageLabel.tipcut(20, 20),
    DamageLabel.tipcut(40, 40),
    DamageLabel.tipcut(0, 15),
    DamageLabel.tipcut(10, 20),
    DamageLabel.longitudinal(20),
    DamageLabel.longitudinal(40),
)


@pytest.fixture(scope="session")
def small_logs():
    """Eight 40 s flights on motor 1, rotated onto all four motors."""
    logs = synthgen.build_corpus(damages=SMALL_DAMAGES, duration_s=40.0, seed=7)
    return augment.augment_corpus(logs)


@pytest.fixture(scope="session")
def small_dataset(small_logs):
    return split_dataset(build_dataset(small_logs), seed=3)


@pytest.fixture(scope="session")
def small_model(small_dataset):
    return train_cascade(small_dataset, CascadeConfig(epochs=40, seed=5, svm_max_iter=500))


@pytest.fixture(scope="session")
def full_run():
    """Default corpus (18 flights x 4 rotations) through the default cascade."""
    t0 = time.perf_counter()
    logs = augment.augment_corpus(synthgen.build_corpus())
    ds = split_dataset(build_dataset(logs), seed=0)
    model = train_cascade(ds, CascadeConfig())
    elapsed = time.perf_counter() - t0
    return {"logs": logs, "ds": ds, "model": model, "elapsed": elapsed, "metrics": evaluate_cascade(model, ds)}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def dataset_dir():
    """Directory holding the public flight corpus in CSV + sidecar form, if any."""
    path = os.environ.get("PROPDMG_DATASET", "")
    return path if path and os.path.isdir(path) else None
