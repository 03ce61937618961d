"""Labeled feature tables: construction from logs, random splits, CSV persistence."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import ConfigError, DataError, SchemaError
from .flightlog import HEALTHY, LONGITUDINAL, TIPCUT, FlightLog
from .spectral import STRIDE, feature_names, log_features, n_features

SPLITS = ("train", "val", "test")
SPLIT_FRACTIONS = (0.4, 0.3, 0.3)
META_COLUMNS = ("flight_id", "start_index", "kind", "cut1_mm", "cut2_mm", "motor", "split")


@dataclass
class LabeledDataset:
    """One row per window.

    ``type_labels`` is 0 (healthy), 1 (tip cut, symmetric or not) or 2
    (longitudinal); ``motor_labels`` is 0 for healthy rows.  ``split`` is an
    array of ``"train" / "val" / "test"`` or ``None`` before splitting.
    """

    features: np.ndarray
    type_labels: np.ndarray
    motor_labels: np.ndarray
    cut1_mm: np.ndarray
    cut2_mm: np.ndarray
    flight_id: np.ndarray
    start_index: np.ndarray
    band_width_hz: int = 5
    split: np.ndarray | None = None

    def __post_init__(self):
        n = self.features.shape[0]
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, np.ndarray) and v.shape[0] != n:
                raise DataError(f"column {f.name} has {v.shape[0]} rows, expected {n}")
        if self.features.ndim != 2 or self.features.shape[1] != n_features(self.band_width_hz):
            raise SchemaError(
                f"feature matrix has {self.features.shape[1] if self.features.ndim == 2 else '?'} columns, "
                f"band width {self.band_width_hz} Hz needs {n_features(self.band_width_hz)}"
            )

    def __len__(self):
        return self.features.shape[0]

    @property
    def sum_mm(self):
        return self.cut1_mm + self.cut2_mm

    @property
    def diff_mm(self):
        return np.abs(self.cut1_mm - self.cut2_mm)

    @property
    def kinds(self):
        return np.array([HEALTHY, TIPCUT, LONGITUDINAL], dtype=object)[self.type_labels]

    @property
    def damage(self):
        """Damage code per row: ``0-0``, ``10-15``, ``L20-20``."""
        prefix = np.where(self.type_labels == 2, "L", "")
        return np.array([f"{p}{a:g}-{b:g}" for p, a, b in zip(prefix, self.cut1_mm, self.cut2_mm)], dtype=object)

    @property
    def symmetric(self):
        return (self.type_labels == 1) & (self.cut1_mm == self.cut2_mm)

    def subset(self, mask) -> "LabeledDataset":
        idx = np.asarray(mask)
        kw = {}
        for f in fields(self):
            v = getattr(self, f.name)
            kw[f.name] = v[idx] if isinstance(v, np.ndarray) else v
        return LabeledDataset(**kw)

    def rows(self, split) -> np.ndarray:
        if self.split is None:
            raise DataError("dataset has not been split")
        return self.split == split

    def with_features(self, features, band_width_hz=None) -> "LabeledDataset":
        return replace(self, features=features, band_width_hz=band_width_hz or self.band_width_hz)


def build_dataset(logs, band_width_hz: int = 5, stride: int = STRIDE) -> LabeledDataset:
    parts = []
    for lg in logs:
        starts, F = log_features(lg, band_width_hz, stride)
        m = starts.size
        lab = lg.label
        parts.append(
            dict(
                features=F,
                type_labels=np.full(m, lab.type_index),
                motor_labels=np.full(m, lab.motor or 0),
                cut1_mm=np.full(m, lab.cut1_mm),
                cut2_mm=np.full(m, lab.cut2_mm),
                flight_id=np.full(m, lg.flight_id, dtype=object),
                start_index=starts.astype(np.int64),
            )
        )
    if not parts:
        raise DataError("no logs given")
    cols = {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}
    return LabeledDataset(**cols, band_width_hz=band_width_hz)


def split_dataset(ds: LabeledDataset, seed: int = 0, by_flight: bool = False) -> LabeledDataset:
    """Random 40/30/30 train/val/test assignment.

    Row-level by default; ``by_flight`` assigns whole flights instead (sizes
    then follow the flights' row counts only approximately).
    """
    n = len(ds)
    if n < 10:
        raise DataError("at least 10 rows are needed to split")
    rng = np.random.default_rng(seed)
    split = np.empty(n, dtype=object)
    if by_flight:
        flights = np.unique(ds.flight_id)
        order = flights[rng.permutation(flights.size)]
        sizes = {f: int(np.count_nonzero(ds.flight_id == f)) for f in order}
        bounds = np.cumsum(SPLIT_FRACTIONS)[:-1] * n
        done = 0
        for f in order:
            tag = SPLITS[int(np.searchsorted(bounds, done, side="right"))]
            split[ds.flight_id == f] = tag
            done += sizes[f]
    else:
        perm = rng.permutation(n)
        n_train = int(round(SPLIT_FRACTIONS[0] * n))
        n_val = int(round(SPLIT_FRACTIONS[1] * n))
        split[perm[:n_train]] = "train"
        split[perm[n_train : n_train + n_val]] = "val"
        split[perm[n_train + n_val :]] = "test"
    return replace(ds, split=split)


def write_features_csv(ds: LabeledDataset, stream, header_comment: str | None = None):
    names = feature_names(ds.band_width_hz)
    if header_comment:
        for line in header_comment.splitlines():
            stream.write(f"# {line}\n")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(list(META_COLUMNS) + names)
    kinds = ds.kinds
    for i in range(len(ds)):
        meta = [
            ds.flight_id[i],
            int(ds.start_index[i]),
            kinds[i],
            repr(float(ds.cut1_mm[i])),
            repr(float(ds.cut2_mm[i])),
            int(ds.motor_labels[i]),
            "" if ds.split is None else ds.split[i],
        ]
        w.writerow(meta + [repr(float(v)) for v in ds.features[i]])


def read_features_csv(stream) -> LabeledDataset:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.reader(line for line in stream if not line.startswith("#"))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty feature file") from None
    if tuple(header[: len(META_COLUMNS)]) != META_COLUMNS:
        raise SchemaError(f"feature file must start with columns {','.join(META_COLUMNS)}")
    n_feat = len(header) - len(META_COLUMNS)
    bw = next((b for b in (2, 3, 4, 5, 6, 7, 8, 10) if n_features(b) == n_feat), None)
    if bw is None:
        raise SchemaError(f"{n_feat} feature columns match no supported band width")
    if header[len(META_COLUMNS) :] != feature_names(bw):
        raise SchemaError("feature column names do not match the schema")
    meta, feats = [], []
    for i, row in enumerate(reader, start=1):
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(f"row {i}: expected {len(header)} cells, found {len(row)}")
        meta.append(row[: len(META_COLUMNS)])
        try:
            feats.append([float(v) for v in row[len(META_COLUMNS) :]])
        except ValueError:
            raise DataError(f"row {i}: non-numeric feature value") from None
    if not meta:
        raise DataError("feature file has no rows")
    type_of = {HEALTHY: 0, TIPCUT: 1, LONGITUDINAL: 2}
    try:
        types = np.array([type_of[m[2]] for m in meta])
    except KeyError as exc:
        raise DataError(f"unknown damage kind {exc.args[0]!r}") from None
    splits = [m[6] for m in meta]
    split = None if all(s == "" for s in splits) else np.array(splits, dtype=object)
    if split is not None and not set(split) <= set(SPLITS):
        raise DataError(f"split column may only contain {SPLITS}")
    return LabeledDataset(
        features=np.asarray(feats, dtype=np.float64),
        type_labels=types,
        motor_labels=np.array([int(m[5]) for m in meta]),
        cut1_mm=np.array([float(m[3]) for m in meta]),
        cut2_mm=np.array([float(m[4]) for m in meta]),
        flight_id=np.array([m[0] for m in meta], dtype=object),
        start_index=np.array([int(m[1]) for m in meta], dtype=np.int64),
        band_width_hz=bw,
        split=split,
    )


def check_split_fractions(ds: LabeledDataset):
    if ds.split is None:
        raise ConfigError("dataset is not split")
    return {s: int(np.count_nonzero(ds.split == s)) for s in SPLITS}
