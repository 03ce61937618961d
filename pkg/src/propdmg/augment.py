"""Symmetry augmentation: move the damaged propeller to another motor by
rotating body-frame x/y signals about z.

A rotation by one inter-rotor step (+90 degrees on a quad, counterclockwise)
carries motor 1's azimuth onto motor 2's.  It also maps a CCW rotor slot
onto a CW one; the yaw channel is left untouched, so spin-direction effects
are copied as recorded rather than mirrored.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError, DataError
from .flightlog import FlightLog, rows_to_log

# (x, y) column pairs in FlightLog.data: acc, gyro, torque command
XY_PAIRS = ((1, 2), (4, 5), (7, 8))


def rotate_log(log: FlightLog, k: int) -> FlightLog:
    n = log.geom.n_rotors
    if not isinstance(k, (int, np.integer)) or k < 0 or k > n:
        raise ConfigError(f"rotation step k must be in 0..{n}, got {k!r}")
    theta = k * 2.0 * math.pi / n
    c, s = math.cos(theta), math.sin(theta)
    data = np.array(log.data)
    for ix, iy in XY_PAIRS:
        x = log.data[:, ix]
        y = log.data[:, iy]
        data[:, ix] = c * x - s * y
        data[:, iy] = s * x + c * y
    label = log.label
    if label.motor is not None:
        label = label.with_motor((label.motor - 1 + k) % n + 1)
    return rows_to_log(log, data, label=label, flight_id=f"{log.flight_id}.rot{k}")


def augment_corpus(logs) -> list:
    """Every log rotated onto every motor position (k = 0..n-1)."""
    logs = list(logs)
    if not logs:
        return []
    geoms = {lg.geom for lg in logs}
    if len(geoms) > 1:
        raise DataError("augment_corpus needs every log to share one vehicle geometry")
    n = logs[0].geom.n_rotors
    return [rotate_log(lg, k) for lg in logs for k in range(n)]
