import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from propdmg.errors import DataError, LogTooShortError, NotFittedError, SchemaError
from propdmg.flightlog import FlightLog
from propdmg.spectral import (
    N,
    SUPPORTED_WIDTHS,
    FeatureVector,
    SampleWindow,
    Standardizer,
    assemble_features,
    band_energies,
    extract_windows,
    feature_groups,
    feature_names,
    log_features,
    moments,
    n_bands,
    n_features,
    power_spectrum,
    schema_id,
    standardizer_apply,
    standardizer_fit,
)

signals = arrays(np.float64, N, elements=st.floats(-1e3, 1e3, allow_nan=False))


def direct_power(x):
    # O(N^2) DFT straight from the definition
    n = np.arange(N)
    X = np.array([np.sum(x * np.exp(-2j * np.pi * k * n / N)) for k in range(N // 2 + 1)])
    P = np.abs(X) ** 2 / N**2
    P[1:N // 2] *= 2
    return P


def log_of(n):
    return FlightLog(np.column_stack([np.arange(n) / 222.0, np.zeros((n, 10))]))


def test_window_counts():
    assert len(extract_windows(log_of(26640))) == 826
    assert len(extract_windows(log_of(222))) == 1
    assert len(extract_windows(log_of(253))) == 1
    assert [w.start_index for w in extract_windows(log_of(300))] == [0, 32, 64]


def test_window_too_short():
    lg = log_of(300)
    with pytest.raises(LogTooShortError):
        extract_windows(lg, width=400)


def test_matches_direct_dft(rng):
    for _ in range(5):
        x = rng.standard_normal(N)
        np.testing.assert_allclose(power_spectrum(x), direct_power(x), rtol=1e-10, atol=1e-14)


def test_constant_signal():
    P = power_spectrum(np.full(N, 3.0))
    assert P[0] == pytest.approx(9.0)
    assert np.abs(P[1:]).max() < 1e-24


def test_integer_bin_sinusoid():
    a = 1.7
    P = power_spectrum(a * np.sin(2 * np.pi * 10 * np.arange(N) / N))
    assert P[10] == pytest.approx(a**2 / 2, rel=1e-12)
    assert np.delete(P, 10).max() < 1e-20


def test_alias_of_140_hz():
    x = np.sin(2 * np.pi * 140 * np.arange(N) / 222.0)
    P = power_spectrum(x)
    assert int(np.argmax(P)) == 82
    assert int(np.argmax(band_energies(P, 5))) == 82 // 5


def test_wrong_length():
    with pytest.raises(DataError):
        power_spectrum(np.zeros(100))


@settings(max_examples=100, deadline=None)
@given(signals)
def test_parseval(x):
    P = power_spectrum(x)
    power = np.mean(x**2)
    assert abs(P.sum() - power) <= 1e-9 * max(power, 1e-300)
    for bw in SUPPORTED_WIDTHS:
        assert band_energies(P, bw).sum() == pytest.approx(P.sum(), rel=1e-12, abs=1e-300)


@settings(max_examples=30, deadline=None)
@given(signals, st.integers(0, N - 1))
def test_circular_shift_invariance(x, k):
    a = band_energies(power_spectrum(x))
    b = band_energies(power_spectrum(np.roll(x, k)))
    np.testing.assert_allclose(b, a, rtol=1e-9, atol=1e-9 * (a.max() + 1e-300))


def test_band_assignment():
    P = np.zeros(112)
    P[83] = 1.0
    b = band_energies(P, 5)
    assert b[16] == 1.0 and b.sum() == 1.0
    b = band_energies(np.ones(112), 5)
    assert b.shape == (22,)
    np.testing.assert_array_equal(b[:21], 5.0)
    assert b[21] == 7.0
    assert band_energies(np.ones(112), 10).shape == (11,)


def test_unsupported_width():
    with pytest.raises(SchemaError):
        band_energies(np.ones(112), 9)


def round_half_down(v):
    return math.ceil(v - 0.5)


@pytest.mark.parametrize("bw", SUPPORTED_WIDTHS)
def test_feature_count_law(bw):
    # 111/2 = 55.5 must give 55 bands to reach the reported 562 features
    assert n_features(bw) == round_half_down(111 / bw) * 10 + 12
    assert n_bands(bw) * 10 + 12 == n_features(bw)
    assert len(feature_names(bw)) == n_features(bw)
    groups = feature_groups(bw)
    assert sorted(sum(groups.values(), [])) == list(range(n_features(bw)))


def test_paper_feature_counts():
    assert (n_features(2), n_features(5), n_features(7), n_features(10)) == (562, 232, 172, 122)
    assert schema_id(5) == "bands-v1-bw5-n232"


def test_moments_examples():
    assert moments(np.full(10, 2.5)) == pytest.approx((2.5, 0, 0, 0))
    assert moments(np.tile([1.0, -1.0], 50)) == pytest.approx((0, 1, 0, -2))
    m = moments(np.array([0.0, 0, 0, 1]))
    assert m == pytest.approx((0.25, 0.1875, 2 / math.sqrt(3), -2 / 3), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(2, 60), elements=st.floats(-100, 100, allow_nan=False)))
def test_moments_brute_force(x):
    n = len(x)
    mu = sum(x) / n
    m2 = sum((v - mu) ** 2 for v in x) / n
    got = moments(x)
    assert got[0] == pytest.approx(mu, abs=1e-9)
    assert got[1] == pytest.approx(m2, rel=1e-9, abs=1e-9)
    if m2 > 1e-6 * (mu * mu + 1):
        m3 = sum((v - mu) ** 3 for v in x) / n
        m4 = sum((v - mu) ** 4 for v in x) / n
        assert got[2] == pytest.approx(m3 / m2**1.5, rel=1e-6, abs=1e-6)
        assert got[3] == pytest.approx(m4 / m2**2 - 3, rel=1e-6, abs=1e-6)


def test_assemble_layout(rng):
    rec = rng.standard_normal((N, 10))
    win = SampleWindow(np.column_stack([np.arange(N) / 222.0, rec]), 0, "f")
    for bw, n in ((5, 232), (2, 562), (10, 122)):
        fv = assemble_features(win, bw)
        assert isinstance(fv, FeatureVector) and fv.values.shape == (n,)
        assert fv.schema_id == schema_id(bw)
    fv = assemble_features(win, 5)
    np.testing.assert_allclose(fv.values[:22], band_energies(power_spectrum(rec[:, 0])))
    np.testing.assert_allclose(fv.values[-12:-8], moments(rec[:, 6]))
    assert not assemble_features(SampleWindow(np.zeros((N, 11)), 0, "z")).values.any()


def test_log_features_matches_windows(small_logs):
    lg = small_logs[0]
    starts, F = log_features(lg)
    wins = extract_windows(lg)
    assert len(wins) == F.shape[0]
    for i in (0, len(wins) // 2, len(wins) - 1):
        np.testing.assert_allclose(F[i], assemble_features(wins[i]).values, rtol=1e-12, atol=1e-15)
        assert starts[i] == wins[i].start_index


def test_standardizer(rng):
    v = rng.standard_normal(6)
    std = standardizer_fit([v, v])
    np.testing.assert_array_equal(standardizer_apply(std, v), 0.0)
    X = rng.normal(5, 2, size=(5000, 4))
    Z = Standardizer().fit(X).apply(X)
    np.testing.assert_allclose(Z.mean(0), 0, atol=0.05)
    np.testing.assert_allclose(Z.std(0), 1, atol=0.05)
    s = Standardizer().fit(X)
    a, b = rng.standard_normal(4), rng.standard_normal(4)
    np.testing.assert_allclose(s.apply(a + b) - s.apply(a), b / s.std, rtol=1e-12, atol=1e-12)
    with pytest.raises(NotFittedError):
        Standardizer().apply(a)
    back = Standardizer.from_dict(s.to_dict())
    np.testing.assert_array_equal(back.apply(X), s.apply(X))
