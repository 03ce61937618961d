"""The detection cascade: damage-type SVM gating per-type magnitude MLPs and
rotor-localization SVMs.

Tip cuts (symmetric and asymmetric together) and longitudinal cuts each get
their own regressor/localizer pair; healthy windows stop after the first
stage.  All stages share one standardizer fitted on the training rows.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .cluster import balance_classes
from .dataset import LabeledDataset, split_dataset
from .errors import DataError, SchemaError
from .flightlog import TYPE_NAMES, FlightLog, atomic_write_text
from .mlp import DEFAULT_HIDDEN, MlpModel, mlp_forward, mlp_init, mlp_train
from .spectral import Standardizer, log_features, n_features, schema_id
from .svm import LinearSvmModel, svm_train_multiclass

log = logging.getLogger(__name__)

BUNDLE_SCHEMA = "propdmg-cascade-v1"
COMPONENTS = ("type_svm", "tipcut_nn", "tipcut_loc_svm", "long_nn", "long_loc_svm")

__all__ = [
    "CascadeConfig",
    "CascadeModel",
    "Diagnosis",
    "infer",
    "infer_batch",
    "infer_matrix",
    "split_dataset",
    "train_cascade",
]


@dataclass
class CascadeConfig:
    C: float = 1.0
    tol: float = 1e-4
    svm_max_iter: int = 2000
    epochs: int = 200
    lr: float = 0.1
    rho: float = 0.95
    eps: float = 1e-6
    batch_size: int | None = 32
    hidden: tuple = DEFAULT_HIDDEN
    loc_target: int = 4000
    balance_target: int | None = None
    seed: int = 0
    by_flight: bool = False

    def to_dict(self):
        d = dict(self.__dict__)
        d["hidden"] = list(self.hidden)
        return d


@dataclass
class Diagnosis:
    type_probs: np.ndarray
    type: str
    sum_mm: float | None = None
    diff_mm: float | None = None
    motor: int | None = None
    motor_probs: np.ndarray | None = None
    raw: dict = field(default_factory=dict)

    @property
    def type_index(self):
        return TYPE_NAMES.index(self.type)


@dataclass
class CascadeModel:
    type_svm: LinearSvmModel
    tipcut_nn: MlpModel
    tipcut_loc_svm: LinearSvmModel
    long_nn: MlpModel
    long_loc_svm: LinearSvmModel
    standardizer: Standardizer
    band_width_hz: int = 5
    provenance: dict = field(default_factory=dict)

    @property
    def schema_id(self):
        return schema_id(self.band_width_hz)

    @property
    def n_features(self):
        return n_features(self.band_width_hz)

    def component_dicts(self):
        return {
            "type_svm": self.type_svm.to_dict(),
            "tipcut_nn": self.tipcut_nn.to_dict(),
            "tipcut_loc_svm": self.tipcut_loc_svm.to_dict(),
            "long_nn": self.long_nn.to_dict(),
            "long_loc_svm": self.long_loc_svm.to_dict(),
            "standardizer": self.standardizer.to_dict(),
        }

    def save(self, directory):
        """Write ``cascade.json`` plus one JSON file per component."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        files = {}
        for name, doc in self.component_dicts().items():
            fname = f"{name}.json"
            atomic_write_text(directory / fname, json.dumps(doc, sort_keys=True) + "\n")
            files[name] = fname
        bundle = {
            "schema_id": BUNDLE_SCHEMA,
            "feature_schema": self.schema_id,
            "band_width_hz": self.band_width_hz,
            "components": {k: files[k] for k in COMPONENTS},
            "standardizer": files["standardizer"],
            "provenance": self.provenance,
        }
        path = directory / "cascade.json"
        atomic_write_text(path, json.dumps(bundle, indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def load(cls, path):
        path = Path(path)
        if path.is_dir():
            path = path / "cascade.json"
        if not path.exists():
            raise DataError(f"no cascade bundle at {path}")
        bundle = json.loads(path.read_text())
        if bundle.get("schema_id") != BUNDLE_SCHEMA:
            raise SchemaError(f"{path} is not a cascade bundle")
        base = path.parent

        def doc(name):
            return json.loads((base / name).read_text())

        comp = bundle["components"]
        return cls(
            LinearSvmModel.from_dict(doc(comp["type_svm"])),
            MlpModel.from_dict(doc(comp["tipcut_nn"])),
            LinearSvmModel.from_dict(doc(comp["tipcut_loc_svm"])),
            MlpModel.from_dict(doc(comp["long_nn"])),
            LinearSvmModel.from_dict(doc(comp["long_loc_svm"])),
            Standardizer.from_dict(doc(bundle["standardizer"])),
            int(bundle["band_width_hz"]),
            bundle.get("provenance", {}),
        )


def _check_coverage(ds: LabeledDataset, train):
    missing = []
    for t, name in enumerate(TYPE_NAMES):
        if not np.any(train & (ds.type_labels == t)):
            missing.append(f"type {name}")
    motors = np.unique(ds.motor_labels[ds.motor_labels > 0])
    for t, name in ((1, "C1"), (2, "C2")):
        for m in motors:
            if not np.any(train & (ds.type_labels == t) & (ds.motor_labels == m)):
                missing.append(f"{name} on motor {m}")
    if missing:
        raise DataError("training rows do not cover: " + ", ".join(missing))


def _balanced_stack(groups: dict, target: int, seed: int):
    balanced = balance_classes(groups, target, seed=seed)
    X = np.vstack([balanced[k] for k in groups])
    y = np.concatenate([np.full(balanced[k].shape[0], k, dtype=object) for k in groups])
    counts = {str(k): int(balanced[k].shape[0]) for k in groups}
    return X, y, counts


def _train_nn(X, Y, cfg: CascadeConfig, seed):
    model = mlp_init([X.shape[1], *cfg.hidden, Y.shape[1]], seed=seed)
    return mlp_train(model, X, Y, cfg.epochs, cfg.lr, cfg.rho, cfg.eps, cfg.batch_size, seed)


def train_tipcut_nn(Z, ds: LabeledDataset, rows, cfg: CascadeConfig, seed=None):
    Y = np.column_stack([ds.sum_mm[rows], ds.diff_mm[rows]])
    return _train_nn(Z[rows], Y, cfg, cfg.seed + 2 if seed is None else seed)


def train_long_nn(Z, ds: LabeledDataset, rows, cfg: CascadeConfig, seed=None):
    Y = ds.sum_mm[rows][:, None]
    return _train_nn(Z[rows], Y, cfg, cfg.seed + 4 if seed is None else seed)


def train_type_svm(Z, type_labels, cfg: CascadeConfig, target=None, seed=None):
    seed = cfg.seed + 1 if seed is None else seed
    groups = {name: Z[type_labels == t] for t, name in enumerate(TYPE_NAMES)}
    if target is None:
        target = cfg.balance_target or min(g.shape[0] for g in groups.values())
    X, y, counts = _balanced_stack(groups, target, seed)
    model = svm_train_multiclass(X, y, cfg.C, cfg.tol, cfg.svm_max_iter, seed)
    return model, counts


def train_loc_svm(Z, motor_labels, cfg: CascadeConfig, seed):
    groups = {int(m): Z[motor_labels == m] for m in np.unique(motor_labels)}
    X, y, counts = _balanced_stack(groups, cfg.loc_target, seed)
    model = svm_train_multiclass(X, y.astype(np.int64), cfg.C, cfg.tol, cfg.svm_max_iter, seed)
    return model, counts


def train_cascade(ds: LabeledDataset, config: CascadeConfig | None = None) -> CascadeModel:
    cfg = config or CascadeConfig()
    if ds.split is None:
        ds = split_dataset(ds, cfg.seed, cfg.by_flight)
    train = ds.rows("train")
    _check_coverage(ds, train)
    t0 = time.perf_counter()
    std = Standardizer().fit(ds.features[train])
    Z = std.apply(ds.features)

    type_svm, type_counts = train_type_svm(Z[train], ds.type_labels[train], cfg)
    log.info("type SVM trained on %s", type_counts)

    tip = train & (ds.type_labels == 1)
    lon = train & (ds.type_labels == 2)
    tipcut_nn = train_tipcut_nn(Z, ds, tip, cfg)
    tip_loc, tip_counts = train_loc_svm(Z[tip], ds.motor_labels[tip], cfg, cfg.seed + 3)
    long_nn = train_long_nn(Z, ds, lon, cfg)
    long_loc, long_counts = train_loc_svm(Z[lon], ds.motor_labels[lon], cfg, cfg.seed + 5)

    provenance = {
        "package_version": __version__,
        "config": cfg.to_dict(),
        "rows": {s: int(np.count_nonzero(ds.split == s)) for s in ("train", "val", "test")},
        "type_train_counts": type_counts,
        "tipcut_loc_train_counts": tip_counts,
        "long_loc_train_counts": long_counts,
        "tipcut_nn_rows": int(tip.sum()),
        "long_nn_rows": int(lon.sum()),
    }
    log.info("cascade trained in %.1f s", time.perf_counter() - t0)
    return CascadeModel(type_svm, tipcut_nn, tip_loc, long_nn, long_loc, std, ds.band_width_hz, provenance)


def _diagnosis_from(type_p, nn_out, loc_p, loc_classes):
    t = int(np.argmax(type_p))
    name = TYPE_NAMES[t]
    if t == 0:
        return Diagnosis(type_p, name)
    if t == 1:
        s_raw, d_raw = float(nn_out[0]), float(nn_out[1])
        s = s_raw
        d = min(max(d_raw, 0.0), max(s, 0.0))
        raw = {"sum_mm": s_raw, "diff_mm": d_raw}
    else:
        s_raw = float(nn_out[0])
        s, d, raw = s_raw, None, {"sum_mm": s_raw}
    m = int(loc_classes[int(np.argmax(loc_p))])
    return Diagnosis(type_p, name, s, d, m, loc_p, raw)


def infer_matrix(model: CascadeModel, X) -> list:
    """Diagnoses for raw (unstandardized) feature rows."""
    X = np.atleast_2d(np.asarray(getattr(X, "values", X), dtype=np.float64))
    if X.shape[1] != model.n_features:
        raise SchemaError(f"cascade expects {model.n_features} features ({model.schema_id}), got {X.shape[1]}")
    Z = model.standardizer.apply(X)
    type_p = model.type_svm.predict_proba(Z)
    kind = np.argmax(type_p, axis=1)
    out = [None] * X.shape[0]
    tip = np.flatnonzero(kind == 1)
    lon = np.flatnonzero(kind == 2)
    tip_nn = mlp_forward(model.tipcut_nn, Z[tip]) if tip.size else None
    tip_loc = model.tipcut_loc_svm.predict_proba(Z[tip]) if tip.size else None
    lon_nn = mlp_forward(model.long_nn, Z[lon]) if lon.size else None
    lon_loc = model.long_loc_svm.predict_proba(Z[lon]) if lon.size else None
    for i in np.flatnonzero(kind == 0):
        out[i] = Diagnosis(type_p[i], TYPE_NAMES[0])
    for j, i in enumerate(tip):
        out[i] = _diagnosis_from(type_p[i], tip_nn[j], tip_loc[j], model.tipcut_loc_svm.classes)
    for j, i in enumerate(lon):
        out[i] = _diagnosis_from(type_p[i], lon_nn[j], lon_loc[j], model.long_loc_svm.classes)
    return out


def infer(model: CascadeModel, feature_vector) -> Diagnosis:
    """Run one raw feature vector through the cascade."""
    x = np.asarray(getattr(feature_vector, "values", feature_vector), dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.n_features:
        raise SchemaError(f"cascade expects a {model.n_features}-feature vector ({model.schema_id})")
    z = model.standardizer.apply(x)
    type_p = model.type_svm.predict_proba(z)
    t = int(np.argmax(type_p))
    if t == 0:
        return Diagnosis(type_p, TYPE_NAMES[0])
    nn, loc = (model.tipcut_nn, model.tipcut_loc_svm) if t == 1 else (model.long_nn, model.long_loc_svm)
    return _diagnosis_from(type_p, mlp_forward(nn, z), loc.predict_proba(z), loc.classes)


@dataclass
class DiagnosisStream:
    flight_id: str
    start_index: np.ndarray
    diagnoses: list
    windows_per_s: float

    def __len__(self):
        return len(self.diagnoses)


def infer_batch(model: CascadeModel, log: FlightLog, vectorized: bool = True) -> DiagnosisStream:
    """One diagnosis per 1 s window of a log, with the measured throughput.

    Throughput covers feature extraction and inference.
    """
    t0 = time.perf_counter()
    starts, F = log_features(log, model.band_width_hz)
    if vectorized:
        diags = infer_matrix(model, F)
    else:
        diags = [infer(model, f) for f in F]
    elapsed = time.perf_counter() - t0
    rate = len(diags) / elapsed if elapsed > 0 else float("inf")
    return DiagnosisStream(log.flight_id, starts, diags, rate)


DIAGNOSIS_COLUMNS = ("flight_id", "start_index", "p_C0", "p_C1", "p_C2", "type", "sum_mm", "diff_mm", "motor")


def diagnosis_rows(stream: DiagnosisStream, n_motors: int = 4):
    header = list(DIAGNOSIS_COLUMNS) + [f"p_m{i + 1}" for i in range(n_motors)]
    rows = [header]
    for s, d in zip(stream.start_index, stream.diagnoses):
        mp = [""] * n_motors if d.motor_probs is None else [repr(float(p)) for p in d.motor_probs]
        rows.append(
            [stream.flight_id, int(s)]
            + [repr(float(p)) for p in d.type_probs]
            + [
                d.type,
                "" if d.sum_mm is None else repr(d.sum_mm),
                "" if d.diff_mm is None else repr(d.diff_mm),
                "" if d.motor is None else d.motor,
            ]
            + mp
        )
    return rows
