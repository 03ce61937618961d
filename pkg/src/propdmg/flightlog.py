"""Flight logs sampled at the control rate: records, labels, CSV I/O and checks."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import DataError, LogTooShortError, LogValidationError, ParseError
from .geometry import VehicleGeometry

SAMPLE_RATE_HZ = 222.0
WINDOW = 222

COLUMNS = ("t", "ax", "ay", "az", "gx", "gy", "gz", "qx", "qy", "qz", "thrust")

HEALTHY = "healthy"
TIPCUT = "tipcut"
LONGITUDINAL = "longitudinal"
KINDS = (HEALTHY, TIPCUT, LONGITUDINAL)

# damage-type class index used by the cascade: C0 healthy, C1 tip cuts, C2 longitudinal
TYPE_INDEX = {HEALTHY: 0, TIPCUT: 1, LONGITUDINAL: 2}
TYPE_NAMES = ("C0", "C1", "C2")


class ImuRecord(NamedTuple):
    t: float
    acc: tuple
    gyro: tuple
    torque_cmd: tuple
    thrust_cmd: float


@dataclass(frozen=True)
class DamageLabel:
    """Damage on (at most) one propeller.

    Tip cuts carry two per-tip lengths; a longitudinal cut carries one depth
    that applies to both tips.  ``motor`` is 1-based and ``None`` iff healthy.
    """

    kind: str = HEALTHY
    cut1_mm: float = 0.0
    cut2_mm: float = 0.0
    motor: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"unknown damage kind {self.kind!r}")
        if self.kind == HEALTHY:
            if self.motor is not None:
                raise DataError("a healthy label has no motor")
            if self.cut1_mm or self.cut2_mm:
                raise DataError("a healthy label has no cuts")
            return
        if self.motor is None or int(self.motor) < 1:
            raise DataError("damaged labels need a motor index >= 1")
        object.__setattr__(self, "motor", int(self.motor))
        if self.cut1_mm < 0 or self.cut2_mm < 0:
            raise DataError("cut lengths must be non-negative")
        if self.kind == LONGITUDINAL:
            if self.cut1_mm <= 0 or self.cut1_mm != self.cut2_mm:
                raise DataError("longitudinal damage needs one positive depth for both tips")

    @classmethod
    def healthy(cls):
        return cls()

    @classmethod
    def tipcut(cls, cut1_mm, cut2_mm, motor=1):
        return cls(TIPCUT, float(cut1_mm), float(cut2_mm), motor)

    @classmethod
    def longitudinal(cls, depth_mm, motor=1):
        return cls(LONGITUDINAL, float(depth_mm), float(depth_mm), motor)

    @property
    def depth_mm(self):
        return self.cut1_mm if self.kind == LONGITUDINAL else None

    @property
    def type_index(self):
        return TYPE_INDEX[self.kind]

    @property
    def sum_mm(self):
        return float(self.cut1_mm + self.cut2_mm)

    @property
    def diff_mm(self):
        return float(abs(self.cut1_mm - self.cut2_mm))

    @property
    def symmetric(self):
        return self.kind == TIPCUT and self.cut1_mm == self.cut2_mm

    @property
    def name(self):
        """Short damage code such as ``0-0``, ``10-15`` or ``L20-20``."""
        code = f"{self.cut1_mm:g}-{self.cut2_mm:g}"
        return "L" + code if self.kind == LONGITUDINAL else code

    def with_motor(self, motor):
        if self.kind == HEALTHY:
            return self
        return replace(self, motor=int(motor))


@dataclass(frozen=True)
class FlightLog:
    """Immutable labeled sequence of control-cycle records.

    ``data`` has one row per cycle and the columns of :data:`COLUMNS`.
    """

    data: np.ndarray
    label: DamageLabel = field(default_factory=DamageLabel)
    flight_id: str = "flight"
    sample_rate_hz: float = SAMPLE_RATE_HZ
    geometry: VehicleGeometry | None = None

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.shape[1] != len(COLUMNS):
            raise DataError(f"flight data must have shape (n, {len(COLUMNS)}), got {arr.shape}")
        bad = ~np.isfinite(arr)
        if bad.any():
            row, col = np.argwhere(bad)[0]
            raise LogValidationError(f"non-finite value in column {COLUMNS[col]!r}", row=int(row))
        if arr.shape[0] < WINDOW:
            raise LogTooShortError(
                f"log {self.flight_id!r} has {arr.shape[0]} records, at least {WINDOW} needed"
            )
        steps = np.diff(arr[:, 0])
        if np.any(steps <= 0):
            row = int(np.flatnonzero(steps <= 0)[0]) + 1
            raise ParseError("timestamps must be strictly increasing", row=row)
        if self.sample_rate_hz <= 0:
            raise DataError("sample rate must be positive")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    def __len__(self):
        return self.data.shape[0]

    @property
    def t(self):
        return self.data[:, 0]

    @property
    def acc(self):
        return self.data[:, 1:4]

    @property
    def gyro(self):
        return self.data[:, 4:7]

    @property
    def torque_cmd(self):
        return self.data[:, 7:10]

    @property
    def thrust_cmd(self):
        return self.data[:, 10]

    @property
    def channels(self):
        """(n, 10) signal block without the time column."""
        return self.data[:, 1:]

    @property
    def duration_s(self):
        return len(self) / self.sample_rate_hz

    @property
    def geom(self):
        return self.geometry or VehicleGeometry()

    def record(self, i) -> ImuRecord:
        r = self.data[i]
        return ImuRecord(float(r[0]), tuple(r[1:4]), tuple(r[4:7]), tuple(r[7:10]), float(r[10]))

    def records(self):
        return (self.record(i) for i in range(len(self)))

    def meta(self):
        """Sidecar metadata document."""
        lab = self.label
        d = {
            "flight_id": self.flight_id,
            "kind": lab.kind,
            "cut1_mm": lab.cut1_mm,
            "cut2_mm": lab.cut2_mm,
            "motor": lab.motor,
            "sample_rate_hz": self.sample_rate_hz,
        }
        if self.geometry is not None:
            d["geometry"] = self.geometry.to_dict()
        return d


class ValidationReport(NamedTuple):
    rate_ok: bool
    finite_ok: bool
    length_ok: bool
    gap_count: int
    median_period_s: float

    @property
    def ok(self):
        return self.rate_ok and self.finite_ok and self.length_ok and self.gap_count == 0


def validate(log: FlightLog) -> ValidationReport:
    """Inspect a log without touching it."""
    period = 1.0 / log.sample_rate_hz
    steps = np.diff(log.t)
    median = float(np.median(steps)) if steps.size else math.nan
    return ValidationReport(
        rate_ok=bool(steps.size and abs(median - period) <= 0.05 * period),
        finite_ok=bool(np.isfinite(log.data).all()),
        length_ok=len(log) >= WINDOW,
        gap_count=int(np.count_nonzero(steps > 1.5 * period)),
        median_period_s=median,
    )


def label_from_meta(meta: dict) -> DamageLabel:
    try:
        kind = meta.get("kind", HEALTHY)
        if kind == HEALTHY:
            return DamageLabel()
        motor = meta.get("motor")
        if kind == LONGITUDINAL:
            return DamageLabel(LONGITUDINAL, float(meta["cut1_mm"]), float(meta.get("cut2_mm", meta["cut1_mm"])), motor)
        return DamageLabel(kind, float(meta["cut1_mm"]), float(meta["cut2_mm"]), motor)
    except KeyError as exc:
        raise DataError(f"label metadata is missing field {exc.args[0]!r}") from None


def parse_log(stream, meta: dict | None = None) -> FlightLog:
    """Read a flight CSV (header ``t,ax,...,thrust``) into a validated log.

    ``meta`` is the sidecar document; it supplies the label, sample rate and
    flight id.
    """
    meta = dict(meta or {})
    if isinstance(stream, (str, bytes)):
        stream = io.StringIO(stream.decode() if isinstance(stream, bytes) else stream)
    reader = csv.reader(line for line in stream if not line.startswith("#"))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError("empty flight file") from None
    missing = [c for c in COLUMNS if c not in header]
    if missing:
        raise ParseError(f"missing column(s) {', '.join(missing)}", row=0)
    order = [header.index(c) for c in COLUMNS]
    rows = []
    for i, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} cells, found {len(row)}", row=i)
        try:
            rows.append([float(row[j]) for j in order])
        except ValueError:
            bad = next(row[j] for j in order if not _is_float(row[j]))
            raise ParseError(f"non-numeric cell {bad!r}", row=i) from None
    data = np.array(rows, dtype=np.float64).reshape(-1, len(COLUMNS))
    bad = ~np.isfinite(data)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise LogValidationError(f"non-finite value in column {COLUMNS[c]!r}", row=int(r) + 1)
    steps = np.diff(data[:, 0])
    if np.any(steps <= 0):
        raise ParseError("time is not strictly increasing", row=int(np.flatnonzero(steps <= 0)[0]) + 2)
    geometry = meta.get("geometry")
    return FlightLog(
        data,
        label=label_from_meta(meta),
        flight_id=str(meta.get("flight_id", "flight")),
        sample_rate_hz=float(meta.get("sample_rate_hz", SAMPLE_RATE_HZ)),
        geometry=VehicleGeometry.from_dict(geometry) if geometry else None,
    )


def _is_float(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def serialize_log(log: FlightLog, stream=None):
    """Write the CSV body; returns the text when no stream is given."""
    out = stream if stream is not None else io.StringIO()
    out.write(",".join(COLUMNS) + "\n")
    lines = (",".join(repr(float(v)) for v in row) for row in log.data)
    out.write("\n".join(lines))
    out.write("\n")
    if stream is None:
        return out.getvalue()
    return None


def meta_path(csv_path):
    p = Path(csv_path)
    return p.with_name(p.name[: -len(".csv")] + ".meta.json" if p.name.endswith(".csv") else p.name + ".meta.json")


def read_log(csv_path, meta: dict | None = None) -> FlightLog:
    """Load ``<id>.csv`` plus its ``<id>.meta.json`` sidecar."""
    csv_path = Path(csv_path)
    if meta is None:
        side = meta_path(csv_path)
        if not side.exists():
            raise DataError(f"missing label sidecar {side.name}")
        meta = json.loads(side.read_text())
    meta.setdefault("flight_id", csv_path.name[:-4] if csv_path.name.endswith(".csv") else csv_path.name)
    with open(csv_path, newline="", encoding="utf-8") as fh:
        return parse_log(fh, meta)


def write_log(log: FlightLog, directory, extra_meta: dict | None = None):
    """Write ``<flight_id>.csv`` and its sidecar atomically; returns the CSV path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    csv_path = directory / f"{log.flight_id}.csv"
    atomic_write_text(csv_path, serialize_log(log))
    meta = log.meta()
    if extra_meta:
        meta.update(extra_meta)
    atomic_write_text(meta_path(csv_path), json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return csv_path


def load_corpus(directory) -> list:
    """All flights in a directory, ordered by flight id."""
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError(f"corpus directory {directory} does not exist")
    paths = sorted(directory.glob("*.csv"))
    if not paths:
        raise DataError(f"no flight CSVs in {directory}")
    return [read_log(p) for p in paths]


def atomic_write_text(path, text):
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def rows_to_log(log: FlightLog, data, **changes) -> FlightLog:
    """Copy of ``log`` with new data and optionally other fields replaced."""
    return FlightLog(
        data,
        label=changes.get("label", log.label),
        flight_id=changes.get("flight_id", log.flight_id),
        sample_rate_hz=changes.get("sample_rate_hz", log.sample_rate_hz),
        geometry=changes.get("geometry", log.geometry),
    )
