import filecmp
import json
from collections import Counter
from dataclasses import replace

import numpy as np
import pytest

from propdmg.cascade import (
    CascadeConfig,
    CascadeModel,
    diagnosis_rows,
    infer,
    infer_batch,
    infer_matrix,
    train_cascade,
)
from propdmg.dataset import split_dataset
from propdmg.errors import DataError, SchemaError
from propdmg.flightlog import DamageLabel
from propdmg.spectral import log_features, n_features
from propdmg.synthgen import SynthScenario, simulate_flight


def flight(label, seconds=30.0, seed=999):
    t = seconds / 3
    return simulate_flight(SynthScenario(label=label, duration_s=seconds, phase_durations_s=(t, t, t), seed=seed))


def toy_dataset(small_dataset, n):
    return small_dataset.subset(np.arange(n))


@pytest.mark.parametrize("n,sizes", [(1000, (400, 300, 300)), (1001, (400, 300, 301))])
def test_split_sizes(small_dataset, n, sizes):
    ds = split_dataset(toy_dataset(small_dataset, n), seed=1)
    assert tuple(int(np.count_nonzero(ds.split == s)) for s in ("train", "val", "test")) == sizes


def test_split_deterministic(small_dataset):
    ds = toy_dataset(small_dataset, 500)
    np.testing.assert_array_equal(split_dataset(ds, seed=4).split, split_dataset(ds, seed=4).split)
    assert not np.array_equal(split_dataset(ds, seed=4).split, split_dataset(ds, seed=5).split)


def test_split_by_flight_keeps_flights_whole(small_dataset):
    ds = split_dataset(small_dataset, seed=2, by_flight=True)
    for f in np.unique(ds.flight_id):
        assert len(set(ds.split[ds.flight_id == f])) == 1


def test_split_needs_ten_rows(small_dataset):
    with pytest.raises(DataError):
        split_dataset(toy_dataset(small_dataset, 9))


def test_training_counts(small_model, small_dataset):
    prov = small_model.provenance
    counts = prov["type_train_counts"]
    assert len(set(counts.values())) == 1
    train = small_dataset.rows("train")
    smallest = min(np.count_nonzero(train & (small_dataset.type_labels == t)) for t in range(3))
    assert set(counts.values()) == {smallest}
    for key in ("tipcut_loc_train_counts", "long_loc_train_counts"):
        assert sorted(prov[key]) == ["1", "2", "3", "4"]
        assert max(prov[key].values()) <= 4000
    assert small_model.tipcut_nn.layer_sizes == [232, 32, 8, 4, 2]
    assert small_model.long_nn.layer_sizes == [232, 32, 8, 4, 1]


def test_missing_coverage(small_dataset):
    keep = ~((small_dataset.type_labels == 2) & (small_dataset.motor_labels == 3))
    with pytest.raises(DataError, match="C2 on motor 3"):
        train_cascade(small_dataset.subset(keep), CascadeConfig(epochs=1))


def majority(diags, attr):
    return Counter(getattr(d, attr) for d in diags).most_common(1)[0][0]


def test_healthy_log_diagnosed_healthy(small_model):
    _, F = log_features(flight(DamageLabel()))
    diags = infer_matrix(small_model, F)
    assert majority(diags, "type") == "C0"
    d = next(d for d in diags if d.type == "C0")
    assert d.sum_mm is None and d.motor is None


def test_tipcut_on_motor_one(small_model):
    _, F = log_features(flight(DamageLabel.tipcut(20, 20, motor=1)))
    diags = infer_matrix(small_model, F)
    assert majority(diags, "type") == "C1"
    tip = [d for d in diags if d.type == "C1"]
    assert majority(tip, "motor") == 1
    assert np.median([d.sum_mm for d in tip]) == pytest.approx(40, abs=8)
    for d in tip:
        assert 0 <= d.diff_mm <= max(d.sum_mm, 0)
        assert d.motor_probs.sum() == pytest.approx(1.0)


def test_zero_vector_is_total(small_model):
    d = infer(small_model, np.zeros(232))
    assert d.type in ("C0", "C1", "C2")
    assert d.type_probs.sum() == pytest.approx(1.0)
    assert np.all(np.isfinite(d.type_probs))


def test_wrong_width_rejected(small_model):
    with pytest.raises(SchemaError):
        infer(small_model, np.zeros(231))
    with pytest.raises(SchemaError):
        infer_matrix(small_model, np.zeros((3, n_features(7))))


def test_batch_matches_serial(small_model):
    lg = flight(DamageLabel.longitudinal(40, motor=2), seconds=12)
    a = infer_batch(small_model, lg, vectorized=True)
    b = infer_batch(small_model, lg, vectorized=False)
    assert len(a) == len(b)
    for x, y in zip(a.diagnoses, b.diagnoses):
        assert x.type == y.type and x.motor == y.motor
        np.testing.assert_allclose(x.type_probs, y.type_probs, rtol=1e-12)
        if x.sum_mm is not None:
            assert x.sum_mm == pytest.approx(y.sum_mm, rel=1e-12)


def test_two_minute_log_gives_826_diagnoses(small_model):
    stream = infer_batch(small_model, flight(DamageLabel(), seconds=120))
    assert len(stream) == 826
    assert stream.windows_per_s > 0
    rows = diagnosis_rows(stream)
    assert len(rows) == 827 and len(rows[0]) == 13


def test_bundle_round_trip(small_model, tmp_path, small_dataset):
    small_model.save(tmp_path / "a")
    back = CascadeModel.load(tmp_path / "a")
    back.save(tmp_path / "b")
    for name in sorted(p.name for p in (tmp_path / "a").iterdir()):
        assert filecmp.cmp(tmp_path / "a" / name, tmp_path / "b" / name, shallow=False), name
    X = small_dataset.features[:50]
    for x, y in zip(infer_matrix(small_model, X), infer_matrix(back, X)):
        assert x.type == y.type and x.motor == y.motor
        np.testing.assert_array_equal(x.type_probs, y.type_probs)


def test_bundle_schema_checked(small_model, tmp_path):
    small_model.save(tmp_path)
    doc = json.loads((tmp_path / "cascade.json").read_text())
    (tmp_path / "cascade.json").write_text(json.dumps(dict(doc, schema_id="nope")))
    with pytest.raises(SchemaError):
        CascadeModel.load(tmp_path)
    with pytest.raises(DataError):
        CascadeModel.load(tmp_path / "missing")
    doc2 = json.loads((tmp_path / "type_svm.json").read_text())
    (tmp_path / "cascade.json").write_text(json.dumps(doc))
    (tmp_path / "type_svm.json").write_text(json.dumps(dict(doc2, schema_id="mlp-relu-v1")))
    with pytest.raises(SchemaError):
        CascadeModel.load(tmp_path)


def test_training_is_deterministic(small_dataset):
    ds = small_dataset.subset(np.arange(len(small_dataset))[::6])
    cfg = CascadeConfig(epochs=3, svm_max_iter=50, seed=9)
    a, b = train_cascade(ds, cfg), train_cascade(ds, cfg)
    assert json.dumps(a.component_dicts(), sort_keys=True) == json.dumps(b.component_dicts(), sort_keys=True)
    c = train_cascade(ds, replace(cfg, seed=10))
    assert json.dumps(a.component_dicts(), sort_keys=True) != json.dumps(c.component_dicts(), sort_keys=True)
