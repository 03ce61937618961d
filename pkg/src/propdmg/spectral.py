"""Band-energy and torque-moment features of 1 s windows.

Each window of 222 control cycles becomes ``n_bands * 10 + 12`` numbers: for
every channel (acc xyz, gyro xyz, torque command xyz, thrust) the energies of
consecutive frequency bands of the one-sided power spectrum, followed by the
mean, variance, skewness and excess kurtosis of the three torque commands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DataError, LogTooShortError, NotFittedError, SchemaError
from .flightlog import FlightLog

N = 222
FS = 222.0
N_BINS = N // 2 + 1  # bins 0..111, one per Hz
STRIDE = 32
SUPPORTED_WIDTHS = (2, 3, 4, 5, 6, 7, 8, 10)
CHANNELS = ("acc_x", "acc_y", "acc_z", "gyro_x", "gyro_y", "gyro_z", "tq_x", "tq_y", "tq_z", "thrust")
TORQUE_CHANNELS = (6, 7, 8)
MOMENTS = ("mean", "var", "skew", "kurt")
STD_FLOOR = 1e-12


def n_bands(band_width_hz: int) -> int:
    """Number of bands covering 0..111 Hz, ``round(111 / bw)`` with ties going down."""
    if band_width_hz not in SUPPORTED_WIDTHS:
        raise SchemaError(f"unsupported band width {band_width_hz!r}; choose one of {SUPPORTED_WIDTHS}")
    return math.ceil((N_BINS - 1) / band_width_hz - 0.5)


def n_features(band_width_hz: int = 5) -> int:
    return n_bands(band_width_hz) * len(CHANNELS) + len(TORQUE_CHANNELS) * len(MOMENTS)


def schema_id(band_width_hz: int = 5) -> str:
    return f"bands-v1-bw{band_width_hz}-n{n_features(band_width_hz)}"


def band_edges(band_width_hz: int = 5):
    """Start bin of every band plus the end sentinel (``N_BINS``)."""
    b = n_bands(band_width_hz)
    return np.append(np.arange(b) * band_width_hz, N_BINS)


def feature_names(band_width_hz: int = 5) -> list:
    edges = band_edges(band_width_hz)
    names = []
    for ch in CHANNELS:
        for lo, hi in zip(edges[:-1], edges[1:]):
            names.append(f"{ch}_{lo}-{hi - 1}Hz")
    for c in TORQUE_CHANNELS:
        names.extend(f"{CHANNELS[c]}_{m}" for m in MOMENTS)
    return names


def feature_groups(band_width_hz: int = 5) -> dict:
    """Column indices per sensor group (torque includes the moment features)."""
    nb = n_bands(band_width_hz)

    def chans(*cs):
        return [c * nb + i for c in cs for i in range(nb)]

    moments = list(range(nb * len(CHANNELS), n_features(band_width_hz)))
    return {
        "acc": chans(0, 1, 2),
        "gyro": chans(3, 4, 5),
        "torque": chans(6, 7, 8) + moments,
        "thrust": chans(9),
    }


@dataclass(frozen=True)
class SampleWindow:
    records: np.ndarray  # (222, 11) rows of the parent log, time column first
    start_index: int
    flight_id: str

    def __post_init__(self):
        if self.records.shape[0] != N:
            raise DataError(f"a window holds exactly {N} records, got {self.records.shape[0]}")

    @property
    def channels(self):
        return self.records[:, 1:]


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    schema_id: str

    def __len__(self):
        return self.values.shape[0]


def window_starts(length: int, width: int = N, stride: int = STRIDE) -> np.ndarray:
    if length < width:
        raise LogTooShortError(f"log of {length} records is shorter than one {width}-record window")
    return np.arange(0, length - width + 1, stride)


def extract_windows(log: FlightLog, width: int = N, stride: int = STRIDE) -> list:
    starts = window_starts(len(log), width, stride)
    return [SampleWindow(log.data[s : s + width], int(s), log.flight_id) for s in starts]


def window_array(log: FlightLog, width: int = N, stride: int = STRIDE):
    """``(starts, windows)`` with windows shaped (m, width, 10), a strided view."""
    starts = window_starts(len(log), width, stride)
    view = sliding_window_view(log.channels, width, axis=0)[::stride]
    return starts, np.swapaxes(view, 1, 2)


def power_spectrum(signal, axis=-1) -> np.ndarray:
    """One-sided power of a 222-sample signal at 1 Hz bins 0..111.

    Normalized so the bins sum to the mean of ``x**2`` (Parseval).
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.shape[axis] != N:
        raise DataError(f"power_spectrum expects {N} samples, got {x.shape[axis]}")
    X = np.fft.rfft(x, axis=axis)
    p = (X.real**2 + X.imag**2) / (N * N)
    p = np.moveaxis(p, axis, -1)
    p[..., 1:-1] *= 2.0
    return np.moveaxis(p, -1, axis)


def band_energies(P, band_width_hz: int = 5) -> np.ndarray:
    """Sum power bins per band along the last axis; the last band keeps the leftovers."""
    P = np.asarray(P, dtype=np.float64)
    if P.shape[-1] != N_BINS:
        raise DataError(f"expected {N_BINS} power bins, got {P.shape[-1]}")
    edges = band_edges(band_width_hz)
    return np.add.reduceat(P, edges[:-1], axis=-1)


def moments(signal, axis=-1):
    """Population mean, variance, skewness and excess kurtosis.

    Near-constant signals (``m2 < 1e-12 * (mean**2 + 1)``) get zero skew and kurtosis.
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.shape[axis] < 2:
        raise DataError("moments need at least two samples")
    mean = x.mean(axis=axis, keepdims=True)
    dev = x - mean
    m2 = (dev**2).mean(axis=axis)
    m3 = (dev**3).mean(axis=axis)
    m4 = (dev**4).mean(axis=axis)
    mean = np.squeeze(mean, axis=axis)
    flat = m2 < 1e-12 * (mean**2 + 1.0)
    safe = np.where(flat, 1.0, m2)
    skew = np.where(flat, 0.0, m3 / safe**1.5)
    kurt = np.where(flat, 0.0, m4 / safe**2 - 3.0)
    if np.ndim(mean) == 0:
        return float(mean), float(m2), float(skew), float(kurt)
    return mean, m2, skew, kurt


def features_from_windows(windows, band_width_hz: int = 5) -> np.ndarray:
    """Feature matrix for windows shaped (m, 222, 10)."""
    w = np.asarray(windows, dtype=np.float64)
    if w.ndim == 2:
        w = w[None]
    if w.shape[1:] != (N, len(CHANNELS)):
        raise DataError(f"windows must be shaped (m, {N}, {len(CHANNELS)}), got {w.shape}")
    m = w.shape[0]
    P = power_spectrum(w, axis=1)  # (m, 112, 10)
    bands = band_energies(np.swapaxes(P, 1, 2), band_width_hz)  # (m, 10, B)
    tq = w[:, :, list(TORQUE_CHANNELS)]
    mom = np.stack(moments(tq, axis=1), axis=-1)  # (m, 3, 4)
    return np.concatenate([bands.reshape(m, -1), mom.reshape(m, -1)], axis=1)


def assemble_features(window: SampleWindow, band_width_hz: int = 5) -> FeatureVector:
    values = features_from_windows(window.channels[None], band_width_hz)[0]
    return FeatureVector(values, schema_id(band_width_hz))


def log_features(log: FlightLog, band_width_hz: int = 5, stride: int = STRIDE, chunk: int = 2048):
    """``(start_indices, feature matrix)`` for every window of a log."""
    starts, view = window_array(log, N, stride)
    out = np.empty((starts.size, n_features(band_width_hz)))
    for i in range(0, starts.size, chunk):
        out[i : i + chunk] = features_from_windows(view[i : i + chunk], band_width_hz)
    return starts, out


@dataclass
class Standardizer:
    """Per-feature affine scaling to zero mean and unit variance."""

    mean: np.ndarray | None = None
    std: np.ndarray | None = None

    @property
    def fitted(self):
        return self.mean is not None

    def fit(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] < 2:
            raise DataError("standardizer needs at least two vectors")
        self.mean = X.mean(axis=0)
        self.std = np.maximum(X.std(axis=0), STD_FLOOR)
        return self

    def apply(self, X):
        if not self.fitted:
            raise NotFittedError("standardizer used before fit")
        X = np.asarray(getattr(X, "values", X), dtype=np.float64)
        if X.shape[-1] != self.mean.shape[0]:
            raise SchemaError(f"expected {self.mean.shape[0]} features, got {X.shape[-1]}")
        return (X - self.mean) / self.std

    def to_dict(self):
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["mean"], dtype=np.float64), np.asarray(d["std"], dtype=np.float64))


def standardizer_fit(vectors) -> Standardizer:
    return Standardizer().fit(np.asarray([getattr(v, "values", v) for v in vectors]))


def standardizer_apply(std: Standardizer, vector):
    out = std.apply(vector)
    if isinstance(vector, FeatureVector):
        return FeatureVector(out, vector.schema_id)
    return out
