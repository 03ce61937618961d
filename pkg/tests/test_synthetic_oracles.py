"""Behaviour of the trained cascade on the synthetic corpus that follows from
how the generator encodes damage: small cuts are hard, the rotor band carries
the damage-type signal, and the torque bias carries the location."""

import re

import numpy as np
import pytest

from propdmg import augment, synthgen
from propdmg.cascade import CascadeConfig
from propdmg.evalkit import ABLATION_MASKS, ablation_study, band_width_study, cascade_importance, confusion_by_flight

pytestmark = pytest.mark.slow


def test_small_cuts_are_harder(full_run):
    fc = confusion_by_flight(full_run["model"], full_run["ds"], "test", group_by="damage")
    pct = fc.percent
    diag = {k: pct[i][1] for i, k in enumerate(fc.keys) if k in ("5-5", "20-20")}
    assert diag["20-20"] > 95.0
    assert diag["20-20"] - diag["5-5"] > 20.0


def test_rotor_band_among_top_type_features(full_run):
    imp = cascade_importance(full_run["model"], full_run["ds"], "type", repeats=2)
    top = [name for name, _, _ in imp.top(15)]
    bands = []
    for name in top:
        m = re.search(r"_(\d+)-(\d+)Hz$", name)
        if m:
            bands.append((int(m.group(1)), int(m.group(2))))
    # the healthy rotor line sits at 83 Hz; tip cuts push it up, long cuts down
    assert any(lo <= 90 and hi >= 75 for lo, hi in bands), top


def test_healthy_accuracy_stable_across_band_widths():
    logs = augment.augment_corpus(synthgen.build_corpus(duration_s=30.0, seed=2))
    table = band_width_study(logs, seed=2, config=CascadeConfig(svm_max_iter=500))
    healthy = np.array([r[2] for r in table.rows])
    assert healthy.max() - healthy.min() < 5.0, healthy


def test_torque_features_carry_location(full_run):
    masks = (ABLATION_MASKS[0], ("acc+gyro", ("acc", "gyro")))
    table = ablation_study(full_run["ds"], masks, CascadeConfig(epochs=30, svm_max_iter=500), localization=True)
    full, no_torque = table.rows
    assert no_torque[7] < full[7] - 5.0  # localization accuracy, percent
    assert no_torque[3] > full[3] and no_torque[4] > full[4]  # tip-cut MSE
