import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from propdmg.augment import XY_PAIRS, augment_corpus, rotate_log
from propdmg.errors import ConfigError, DataError
from propdmg.flightlog import DamageLabel, FlightLog
from propdmg.geometry import VehicleGeometry
from propdmg.spectral import band_energies, n_bands, power_spectrum


def make_log(label=None, seed=0, n=300, geometry=None, flight_id="f"):
    rng = np.random.default_rng(seed)
    data = np.column_stack([np.arange(n) / 222.0, rng.standard_normal((n, 10))])
    return FlightLog(data, label=label or DamageLabel.tipcut(5, 10), flight_id=flight_id, geometry=geometry)


def test_unit_x_turns_into_unit_y():
    data = np.zeros((222, 11))
    data[:, 0] = np.arange(222) / 222.0
    data[:, 1] = 1.0
    data[:, 3] = -9.81
    out = rotate_log(FlightLog(data), 1)
    np.testing.assert_allclose(out.acc[:, 0], 0.0, atol=1e-15)
    np.testing.assert_allclose(out.acc[:, 1], 1.0, atol=1e-15)
    np.testing.assert_array_equal(out.acc[:, 2], -9.81)


def test_full_turn_is_identity():
    lg = make_log()
    np.testing.assert_allclose(rotate_log(lg, 4).data, lg.data, rtol=0, atol=1e-12)


@pytest.mark.parametrize("k,motor", [(0, 1), (1, 2), (2, 3), (3, 4)])
def test_label_arithmetic(k, motor):
    assert rotate_log(make_log(), k).label.motor == motor


def test_healthy_label_unchanged():
    out = rotate_log(make_log(DamageLabel()), 2)
    assert out.label == DamageLabel()


def test_out_of_range():
    with pytest.raises(ConfigError):
        rotate_log(make_log(), 5)
    with pytest.raises(ConfigError):
        rotate_log(make_log(), -1)


def test_untouched_columns():
    lg = make_log()
    out = rotate_log(lg, 3)
    for col in (0, 3, 6, 9, 10):
        np.testing.assert_array_equal(out.data[:, col], lg.data[:, col])


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 1000))
def test_group_property(a, b, seed):
    lg = make_log(seed=seed)
    two = rotate_log(rotate_log(lg, a), b)
    one = rotate_log(lg, (a + b) % 4)
    np.testing.assert_allclose(two.data, one.data, rtol=0, atol=1e-12)
    assert two.label == one.label


def test_norm_preserved():
    lg = make_log(seed=4)
    out = rotate_log(lg, 1)
    for ix, iy in XY_PAIRS:
        np.testing.assert_allclose(np.hypot(out.data[:, ix], out.data[:, iy]), np.hypot(lg.data[:, ix], lg.data[:, iy]), rtol=1e-12)


def test_four_fold_composition():
    lg = make_log(seed=9)
    out = lg
    for _ in range(4):
        out = rotate_log(out, 1)
    np.testing.assert_allclose(out.data, lg.data, rtol=0, atol=1e-12)


def test_band_energy_pair_sum_preserved():
    lg = make_log(seed=2, n=222)
    out = rotate_log(lg, 1)
    nb = n_bands(5)
    for ix, iy in XY_PAIRS:
        before = band_energies(power_spectrum(lg.data[:, ix])) + band_energies(power_spectrum(lg.data[:, iy]))
        after = band_energies(power_spectrum(out.data[:, ix])) + band_energies(power_spectrum(out.data[:, iy]))
        assert before.shape == (nb,)
        np.testing.assert_allclose(after, before, rtol=1e-9)
    for col in (3, 6, 9, 10):
        np.testing.assert_array_equal(band_energies(power_spectrum(out.data[:, col])), band_energies(power_spectrum(lg.data[:, col])))


def test_corpus_quadruples():
    logs = [make_log(flight_id=f"f{i}", seed=i) for i in range(18)]
    out = augment_corpus(logs)
    assert len(out) == 72


def test_healthy_copies_have_distinct_ids():
    out = augment_corpus([make_log(DamageLabel(), flight_id="healthy")])
    assert [x.flight_id for x in out] == [f"healthy.rot{k}" for k in range(4)]
    assert all(x.label == DamageLabel() for x in out)


def test_hexacopter():
    out = augment_corpus([make_log(geometry=VehicleGeometry(n_rotors=6))])
    assert len(out) == 6
    assert [x.label.motor for x in out] == [1, 2, 3, 4, 5, 6]


def test_mixed_geometry_rejected():
    with pytest.raises(DataError):
        augment_corpus([make_log(), make_log(geometry=VehicleGeometry(n_rotors=6))])
