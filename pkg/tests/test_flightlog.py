import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from propdmg.errors import DataError, LogTooShortError, LogValidationError, ParseError
from propdmg.flightlog import (
    COLUMNS,
    DamageLabel,
    FlightLog,
    label_from_meta,
    load_corpus,
    meta_path,
    parse_log,
    read_log,
    serialize_log,
    validate,
    write_log,
)


def make_log(n=444, rate=222.0, label=None, seed=0, **kw):
    rng = np.random.default_rng(seed)
    data = np.column_stack([np.arange(n) / rate, rng.standard_normal((n, 10))])
    return FlightLog(data, label=label or DamageLabel(), sample_rate_hz=kw.pop("meta_rate", 222.0), **kw)


def csv_text(n, rate=222.0, mutate=None):
    rows = [",".join(COLUMNS)]
    for i in range(n):
        cells = [repr(i / rate)] + ["0.5"] * 10
        if mutate:
            mutate(i, cells)
        rows.append(",".join(cells))
    return "\n".join(rows) + "\n"


def test_parse_two_minute_file():
    lg = parse_log(csv_text(26640), {"kind": "healthy"})
    assert len(lg) == 26640
    assert lg.duration_s == pytest.approx(120.0)
    assert lg.label == DamageLabel()


def test_too_short_file():
    with pytest.raises(LogTooShortError):
        parse_log(csv_text(100))


def test_nan_row_named():
    def bad(i, cells):
        if i == 300:
            cells[1] = "nan"

    with pytest.raises(LogValidationError, match="row 301"):
        parse_log(csv_text(400, mutate=bad))


def test_missing_column():
    text = csv_text(300).replace("thrust", "thrusty", 1)
    with pytest.raises(ParseError, match="thrust"):
        parse_log(text)


def test_non_numeric_cell_names_row():
    def bad(i, cells):
        if i == 10:
            cells[4] = "abc"

    with pytest.raises(ParseError) as err:
        parse_log(csv_text(300, mutate=bad))
    assert err.value.row == 11


def test_non_monotone_time():
    def bad(i, cells):
        if i == 50:
            cells[0] = "0.0"

    with pytest.raises(ParseError, match="row"):
        parse_log(csv_text(300, mutate=bad))


def test_validate_ideal_log():
    rep = validate(make_log())
    assert rep.rate_ok and rep.finite_ok and rep.length_ok and rep.gap_count == 0 and rep.ok


def test_validate_dropped_sample():
    lg = make_log(445)
    data = np.delete(np.array(lg.data), 200, axis=0)
    rep = validate(FlightLog(data))
    assert rep.gap_count == 1
    assert not rep.ok


def test_validate_wrong_rate():
    rep = validate(make_log(rate=111.0))
    assert not rep.rate_ok


def test_validate_is_pure():
    lg = make_log()
    before = lg.data.copy()
    validate(lg)
    np.testing.assert_array_equal(lg.data, before)
    assert not lg.data.flags.writeable


def test_label_invariants():
    assert DamageLabel.tipcut(10, 10).symmetric
    assert not DamageLabel.tipcut(0, 5).symmetric
    lab = DamageLabel.longitudinal(20, motor=3)
    assert lab.sum_mm == 40 and lab.depth_mm == 20 and lab.name == "L20-20"
    with pytest.raises(DataError):
        DamageLabel("healthy", motor=1)
    with pytest.raises(DataError):
        DamageLabel("tipcut", 5, 5, None)
    with pytest.raises(DataError):
        DamageLabel("tipcut", -1, 5, 1)


def test_label_from_sidecar():
    lab = label_from_meta({"kind": "tipcut", "cut1_mm": 10, "cut2_mm": 15, "motor": 2})
    assert lab == DamageLabel.tipcut(10, 15, motor=2)
    with pytest.raises(DataError):
        label_from_meta({"kind": "tipcut", "cut1_mm": 10, "motor": 2})


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, (230, 10), elements=st.floats(-1e6, 1e6, allow_nan=False)))
def test_parse_serialize_round_trip(values):
    t = np.arange(230) / 222.0
    lg = FlightLog(np.column_stack([t, values]), label=DamageLabel.tipcut(5, 10, 2))
    back = parse_log(io.StringIO(serialize_log(lg)), lg.meta())
    np.testing.assert_allclose(back.data, lg.data, rtol=1e-9, atol=1e-9)
    assert back.label == lg.label


def test_write_and_read_with_sidecar(tmp_path):
    lg = make_log(label=DamageLabel.longitudinal(30, motor=4), flight_id="long_30")
    path = write_log(lg, tmp_path, {"note": "x"})
    side = json.loads(meta_path(path).read_text())
    assert side["kind"] == "longitudinal" and side["motor"] == 4 and side["note"] == "x"
    back = read_log(path)
    np.testing.assert_array_equal(back.data, lg.data)
    assert back.flight_id == "long_30"
    assert [x.flight_id for x in load_corpus(tmp_path)] == ["long_30"]


def test_missing_sidecar(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text(csv_text(300))
    with pytest.raises(DataError, match="sidecar"):
        read_log(p)


def test_records_view():
    lg = make_log()
    r = lg.record(3)
    assert r.t == pytest.approx(3 / 222)
    assert len(r.acc) == 3 and len(r.torque_cmd) == 3
    assert sum(1 for _ in lg.records()) == len(lg)
