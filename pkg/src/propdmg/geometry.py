"""Multirotor geometry and the rotor-force to body-torque/thrust allocation map."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, GeometryError

CW = "CW"
CCW = "CCW"


def _default_angles(n):
    # motor 1 sits front-right, the rest follow counterclockwise at equal spacing
    return tuple(math.pi / n + 2.0 * math.pi * i / n for i in range(n))


def _default_spins(n):
    return tuple(CCW if i % 2 == 0 else CW for i in range(n))


@dataclass(frozen=True)
class VehicleGeometry:
    """Rotor layout of a symmetric multirotor.

    ``rotor_angles_rad`` are azimuths measured counterclockwise from the body
    +x axis; entry ``i`` belongs to motor ``i + 1``.
    """

    n_rotors: int = 4
    arm_length_m: float = 0.225
    torque_const: float = 0.02
    rotor_angles_rad: tuple = field(default=None)
    spin_dirs: tuple = field(default=None)

    def __post_init__(self):
        n = self.n_rotors
        if not isinstance(n, (int, np.integer)) or n < 3:
            raise GeometryError(f"a multirotor needs at least 3 rotors, got {n!r}")
        if self.rotor_angles_rad is None:
            object.__setattr__(self, "rotor_angles_rad", _default_angles(n))
        else:
            object.__setattr__(self, "rotor_angles_rad", tuple(float(a) for a in self.rotor_angles_rad))
        if self.spin_dirs is None:
            object.__setattr__(self, "spin_dirs", _default_spins(n))
        else:
            object.__setattr__(self, "spin_dirs", tuple(str(s).upper() for s in self.spin_dirs))
        angles = self.rotor_angles_rad
        if len(angles) != n or len(self.spin_dirs) != n:
            raise GeometryError("rotor_angles_rad and spin_dirs need one entry per rotor")
        if self.arm_length_m <= 0:
            raise GeometryError("arm_length_m must be positive")
        if not all(s in (CW, CCW) for s in self.spin_dirs):
            raise GeometryError("spin_dirs entries must be 'CW' or 'CCW'")
        unwrapped = np.unwrap(np.asarray(angles))
        if np.any(np.diff(unwrapped) <= 0) or unwrapped[-1] - unwrapped[0] >= 2 * math.pi:
            raise GeometryError("rotor angles must increase counterclockwise within one turn")
        if n % 2 == 0 and any(self.spin_dirs[i] == self.spin_dirs[(i + 1) % n] for i in range(n)):
            raise GeometryError("adjacent rotors must spin in opposite directions")

    @property
    def spin_signs(self):
        return np.array([1.0 if s == CCW else -1.0 for s in self.spin_dirs])

    @property
    def step_angle(self):
        return 2.0 * math.pi / self.n_rotors

    def to_dict(self):
        return {
            "n_rotors": int(self.n_rotors),
            "arm_length_m": float(self.arm_length_m),
            "torque_const": float(self.torque_const),
            "rotor_angles_rad": list(self.rotor_angles_rad),
            "spin_dirs": list(self.spin_dirs),
        }

    @classmethod
    def from_dict(cls, d):
        if d is None:
            return cls()
        known = {"n_rotors", "arm_length_m", "torque_const", "rotor_angles_rad", "spin_dirs"}
        unknown = set(d) - known
        if unknown:
            raise GeometryError(f"unknown geometry fields: {sorted(unknown)}")
        return cls(**d)


QUAD = VehicleGeometry()


def allocation_matrix(geom: VehicleGeometry) -> np.ndarray:
    """4 x n map from rotor forces to ``[q_x, q_y, q_z, T]``.

    For the default X-quad the roll/pitch rows are ``+-l*cos(pi/4)`` with the
    sign pattern ``[-, +, +, -]`` and ``[+, +, -, -]``; yaw alternates with
    the spin direction and the thrust row is all -1 (body z points down).
    """
    if geom.n_rotors < 3:
        raise GeometryError("a multirotor needs at least 3 rotors")
    ang = np.asarray(geom.rotor_angles_rad)
    l = geom.arm_length_m
    return np.vstack(
        [
            -l * np.cos(ang),
            l * np.sin(ang),
            geom.torque_const * geom.spin_signs,
            -np.ones(geom.n_rotors),
        ]
    )


def mix_forces(geom: VehicleGeometry, forces):
    """Body torques ``(q_x, q_y, q_z)`` and thrust ``T`` produced by per-rotor forces."""
    f = np.asarray(forces, dtype=float)
    if f.shape != (geom.n_rotors,):
        raise DataError(f"expected {geom.n_rotors} rotor forces, got shape {f.shape}")
    if np.any(f < 0):
        raise DataError("rotor forces must be non-negative (rotors are unidirectional)")
    out = allocation_matrix(geom) @ f
    return out[:3], float(out[3])
