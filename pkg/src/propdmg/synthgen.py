"""Synthetic labeled flights with phenomenological damage signatures.

The generator does not model aerodynamics.  It reproduces the observable
spectral effects of propeller damage:

* every rotor adds a rotating vibration vector at its spin frequency
  (83 Hz at hover) to the acc/gyro/torque x-y channels, weaker on z;
* tip cuts raise the damaged rotor's frequency in proportion to the total
  cut length, and unequal cuts add imbalance vibration;
* longitudinal cuts lower the frequency and raise the peak slightly;
* the controller holds a roll/pitch torque bias pointing away from the
  damaged rotor, proportional to the damage and wandering slowly in time;
* maneuvers add band-limited noise below 20 Hz that grows with the
  aggressiveness of the flight phase (hover, soft, aggressive).

Sinusoids are evaluated in continuous time and sampled at 222 Hz, so rotor
frequencies above 111 Hz fold back into the observable band.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import signal as sps

from .errors import ConfigError
from .flightlog import HEALTHY, LONGITUDINAL, SAMPLE_RATE_HZ, TIPCUT, DamageLabel, FlightLog
from .geometry import VehicleGeometry

FS = SAMPLE_RATE_HZ
GRAVITY = 9.81
HOVER_THRUST = 0.375

# aggressiveness of hover / soft / aggressive phases
PHASE_LEVELS = (0.15, 0.45, 1.0)

# per-channel white-noise std: acc xyz, gyro xyz, torque xyz, thrust
DEFAULT_NOISE = (0.05, 0.05, 0.05, 0.005, 0.005, 0.005, 0.002, 0.002, 0.002, 0.001)

# maneuver gains (slow, fast) per channel
_MANEUVER_GAIN = np.array(
    [
        [0.8, 0.15],
        [0.8, 0.15],
        [1.5, 0.3],
        [0.3, 0.05],
        [0.3, 0.05],
        [0.4, 0.05],
        [0.025, 0.005],
        [0.025, 0.005],
        [0.02, 0.004],
        [0.05, 0.01],
    ]
)
# rotor vibration gain per sensor triple (xy amplitude relative to acc) and z fraction
_VIB_GAIN = (1.0, 0.08, 0.01)
_VIB_Z_FRACTION = 0.25
_VIB_THRUST = 0.002
_ROTOR_SPEED_WANDER = 0.02

# damage list of the reference experiment with its 1 s window counts;
# every propeller was flown on motor 1
TABLE1 = (
    ("healthy", DamageLabel(), 1005),
    ("symm", DamageLabel.tipcut(5, 5), 1098),
    ("symm", DamageLabel.tipcut(10, 10), 1043),
    ("symm", DamageLabel.tipcut(15, 15), 1131),
    ("symm", DamageLabel.tipcut(20, 20), 1051),
    ("symm", DamageLabel.tipcut(25, 25), 902),
    ("symm", DamageLabel.tipcut(30, 30), 784),
    ("symm", DamageLabel.tipcut(35, 35), 763),
    ("symm", DamageLabel.tipcut(40, 40), 752),
    ("asymm", DamageLabel.tipcut(0, 5), 847),
    ("asymm", DamageLabel.tipcut(0, 10), 879),
    ("asymm", DamageLabel.tipcut(0, 15), 465),
    ("asymm", DamageLabel.tipcut(10, 15), 885),
    ("asymm", DamageLabel.tipcut(10, 20), 766),
    ("long", DamageLabel.longitudinal(10), 863),
    ("long", DamageLabel.longitudinal(20), 954),
    ("long", DamageLabel.longitudinal(30), 875),
    ("long", DamageLabel.longitudinal(40), 968),
)
DEFAULT_DAMAGES = tuple(lab for _, lab, _ in TABLE1)


@dataclass(frozen=True)
class SynthCoeffs:
    """Damage-effect coefficients.

    The compensating torque along the damaged arm is
    ``B * tanh(bias_sharpness * (mu + w(t)))`` with ``w`` slow unit-variance
    noise and ``mu = bias_offset_per_mm * sum_mm`` (tip cuts) or
    ``long_bias_offset_per_mm * sum_mm`` (longitudinal).  Small ``mu`` lets
    the torque settle on the wrong side of the arm for a while, which is
    what confuses a rotor with the opposite one; larger damage pins it.
    """

    freq_shift_per_mm: float = 0.005
    imbalance_amp_per_mm: float = 0.06
    torque_bias_per_mm: float = 0.006
    long_freq_drop_per_mm: float = 0.004
    long_amp_per_mm: float = 0.02
    bias_offset_per_mm: float = 0.05
    long_bias_offset_per_mm: float = 0.015
    bias_sharpness: float = 8.0

    def __post_init__(self):
        for k, v in asdict(self).items():
            if v < 0:
                raise ConfigError(f"coefficient {k} must be >= 0")


@dataclass(frozen=True)
class SynthScenario:
    label: DamageLabel = field(default_factory=DamageLabel)
    geom: VehicleGeometry = field(default_factory=VehicleGeometry)
    duration_s: float = 120.0
    phase_durations_s: tuple = (40.0, 40.0, 40.0)
    base_rotor_hz: float = 83.0
    noise_std: tuple = DEFAULT_NOISE
    coeffs: SynthCoeffs = field(default_factory=SynthCoeffs)
    seed: int = 0
    flight_id: str = "synth"
    vibration_amp: float = 0.6

    def __post_init__(self):
        if len(self.phase_durations_s) != 3 or min(self.phase_durations_s) < 0:
            raise ConfigError("phase_durations_s needs three non-negative durations")
        if self.duration_s + 1e-9 < sum(self.phase_durations_s):
            raise ConfigError("duration_s is shorter than the sum of the phase durations")
        if not 0 < self.base_rotor_hz <= FS / 2 * 1.35:
            raise ConfigError(f"base_rotor_hz must lie in (0, {FS / 2 * 1.35}]")
        noise = self.noise_std
        if np.isscalar(noise):
            noise = (float(noise),) * 10
        if len(noise) != 10 or min(noise) < 0:
            raise ConfigError("noise_std needs ten non-negative entries")
        object.__setattr__(self, "noise_std", tuple(float(v) for v in noise))
        if self.label.motor is not None and self.label.motor > self.geom.n_rotors:
            raise ConfigError("damaged motor index exceeds the rotor count")

    @property
    def n_samples(self):
        return int(round(self.duration_s * FS))

    def to_dict(self):
        lab = self.label
        return {
            "label": {"kind": lab.kind, "cut1_mm": lab.cut1_mm, "cut2_mm": lab.cut2_mm, "motor": lab.motor},
            "geom": self.geom.to_dict(),
            "duration_s": self.duration_s,
            "phase_durations_s": list(self.phase_durations_s),
            "base_rotor_hz": self.base_rotor_hz,
            "noise_std": list(self.noise_std),
            "coeffs": asdict(self.coeffs),
            "seed": self.seed,
            "flight_id": self.flight_id,
            "vibration_amp": self.vibration_amp,
        }

    @classmethod
    def from_dict(cls, d):
        from .flightlog import label_from_meta

        d = dict(d)
        kw = {}
        if "label" in d:
            kw["label"] = label_from_meta(d.pop("label"))
        if "geom" in d:
            kw["geom"] = VehicleGeometry.from_dict(d.pop("geom"))
        if "coeffs" in d:
            kw["coeffs"] = SynthCoeffs(**d.pop("coeffs"))
        for key in ("phase_durations_s", "noise_std"):
            if key in d:
                kw[key] = tuple(d.pop(key))
        try:
            return cls(**kw, **d)
        except TypeError as exc:
            raise ConfigError(f"bad scenario: {exc}") from None


def _lowpass_noise(rng, n, cutoff_hz, order=4):
    """Unit-variance Gaussian noise band-limited below ``cutoff_hz``."""
    pad = int(3 * FS / cutoff_hz) + 16
    sos = sps.butter(order, cutoff_hz, fs=FS, output="sos")
    x = sps.sosfilt(sos, rng.standard_normal(n + pad))[pad:]
    sd = x.std()
    return x / sd if sd > 0 else x


def _aggressiveness(sc: SynthScenario, n):
    t = np.arange(n) / FS
    level = np.full(n, PHASE_LEVELS[0])
    edges = np.cumsum(sc.phase_durations_s)
    start = 0.0
    for lvl, stop in zip(PHASE_LEVELS, edges):
        level[(t >= start) & (t < stop)] = lvl
        start = stop
    return level


def damaged_rotor_hz(sc: SynthScenario, base=None):
    """Nominal spin frequency of the damaged rotor (continuous time, may exceed 111 Hz)."""
    base = sc.base_rotor_hz if base is None else base
    lab, co = sc.label, sc.coeffs
    if lab.kind == TIPCUT:
        return base * (1.0 + co.freq_shift_per_mm * lab.sum_mm)
    if lab.kind == LONGITUDINAL:
        return base * max(1.0 - co.long_freq_drop_per_mm * lab.depth_mm, 0.05)
    return base


def aliased_hz(f, fs=FS):
    """Frequency at which a sampled sinusoid of frequency ``f`` appears."""
    f = math.fmod(abs(f), fs)
    return fs - f if f > fs / 2 else f


def simulate_flight(sc: SynthScenario) -> FlightLog:
    rng = np.random.default_rng(sc.seed)
    n = sc.n_samples
    geom = sc.geom
    lab = sc.label
    co = sc.coeffs
    agg = _aggressiveness(sc, n)
    t = np.arange(n) / FS

    sig = np.zeros((n, 10))
    # maneuvers
    for ch in range(10):
        slow = _lowpass_noise(rng, n, 2.0)
        fast = _lowpass_noise(rng, n, 15.0)
        sig[:, ch] = agg * (_MANEUVER_GAIN[ch, 0] * slow + _MANEUVER_GAIN[ch, 1] * fast)
    sig[:, 2] -= GRAVITY
    sig[:, 9] += HOVER_THRUST

    # rotor vibrations
    spins = geom.spin_signs
    for i in range(geom.n_rotors):
        wander = _lowpass_noise(rng, n, 0.5)
        f = sc.base_rotor_hz * (1.0 + _ROTOR_SPEED_WANDER * agg * wander)
        amp = sc.vibration_amp
        if lab.motor == i + 1:
            f = f * damaged_rotor_hz(sc, 1.0)
            if lab.kind == TIPCUT:
                amp += co.imbalance_amp_per_mm * lab.diff_mm
            elif lab.kind == LONGITUDINAL:
                amp += co.long_amp_per_mm * lab.depth_mm
        phase = 2.0 * np.pi * np.cumsum(f) / FS + rng.uniform(0.0, 2.0 * np.pi)
        cos_p = np.cos(phase)
        sin_p = spins[i] * np.sin(phase)
        z_p = np.cos(phase + 0.7)
        for k, gain in enumerate(_VIB_GAIN):
            a = amp * gain
            sig[:, 3 * k] += a * cos_p
            sig[:, 3 * k + 1] += a * sin_p
            sig[:, 3 * k + 2] += _VIB_Z_FRACTION * a * z_p
        sig[:, 9] += _VIB_THRUST * amp * cos_p

    # compensating roll/pitch torque
    if lab.kind != HEALTHY:
        alpha = geom.rotor_angles_rad[lab.motor - 1]
        per_mm = co.bias_offset_per_mm if lab.kind == TIPCUT else co.long_bias_offset_per_mm
        mu = per_mm * lab.sum_mm
        mag = co.torque_bias_per_mm * lab.sum_mm * np.tanh(co.bias_sharpness * (mu + _lowpass_noise(rng, n, 0.2)))
        sig[:, 6] -= mag * math.cos(alpha)
        sig[:, 7] -= mag * math.sin(alpha)

    sig += rng.standard_normal((n, 10)) * np.asarray(sc.noise_std)
    data = np.column_stack([t, sig])
    return FlightLog(data, label=lab, flight_id=sc.flight_id, sample_rate_hz=FS, geometry=None)


def duration_for_windows(count: int, width: int = 222, stride: int = 32) -> float:
    """Shortest duration that yields ``count`` windows."""
    return ((count - 1) * stride + width) / FS


def build_corpus(template: SynthScenario | None = None, damages=None, duration_s=None, seed=None) -> list:
    """One synthetic flight per damage spec.

    Without ``duration_s`` each flight is as long as its counterpart in the
    reference experiment (matching window counts); otherwise every flight
    lasts ``duration_s``.  Phases split each flight into equal thirds.
    """
    template = template or SynthScenario()
    base_seed = template.seed if seed is None else seed
    if damages is None:
        specs = [(grp, lab, cnt) for grp, lab, cnt in TABLE1]
    else:
        damages = list(damages)
        if not damages:
            raise ConfigError("build_corpus needs at least one damage spec")
        counts = {lab: cnt for _, lab, cnt in TABLE1}
        specs = [(_group(lab), lab, counts.get(lab, 900)) for lab in damages]
    logs = []
    for idx, (grp, lab, cnt) in enumerate(specs):
        dur = duration_s if duration_s is not None else duration_for_windows(cnt)
        sub_seed = int(np.random.SeedSequence([base_seed, idx]).generate_state(1)[0])
        sc = replace(
            template,
            label=lab,
            duration_s=dur,
            phase_durations_s=(dur / 3.0,) * 3,
            seed=sub_seed,
            flight_id=f"{grp}_{lab.cut1_mm:g}-{lab.cut2_mm:g}",
        )
        logs.append(simulate_flight(sc))
    return logs


def _group(lab: DamageLabel):
    if lab.kind == HEALTHY:
        return "healthy"
    if lab.kind == LONGITUDINAL:
        return "long"
    return "symm" if lab.symmetric else "asymm"
