import io
import json
import math

import gmpy2
import pytest
from gmpy2 import mpfr
from hypothesis import given, settings, strategies as st

from firoozbakht_verify.checkpoint import (
    CHECKPOINT_VERSION,
    Checkpoint,
    CheckpointError,
    load_checkpoint,
    save_checkpoint,
)
from firoozbakht_verify.classical import check_pn_bounds, check_kourbatov
from firoozbakht_verify.inequalities import check_ineq_2_4, firoozbakht_records
from firoozbakht_verify.interval import contexts
from firoozbakht_verify.report import (
    CSV_HEADER,
    ReportWriter,
    Row,
    Summary,
    _digits,
    format_endpoint,
    row_from,
    row_from_gap,
    rows_from_bound,
)


@settings(max_examples=300, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_endpoint_round_trips(x):
    assert float(format_endpoint(x)) == x


@settings(max_examples=300, deadline=None)
@given(mant=st.integers(-(2**200), 2**200), exp2=st.integers(-300, 300),
       bits=st.sampled_from([53, 64, 128, 256]))
def test_mpfr_endpoint_round_trips_at_its_precision(mant, exp2, bits):
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        x = gmpy2.mul_2exp(mpfr(mant), exp2)
    text = format_endpoint(x)
    assert mpfr(text, bits) == x


def test_mpfr_endpoint_examples():
    assert format_endpoint(mpfr("0.1", 64)) == "0.1"
    down, up = contexts(64)
    # log 2 = 0.693147180559945309417...; the endpoints bracket it
    assert format_endpoint(down.log(mpfr(2, 64))) == "0.6931471805599453094"
    assert format_endpoint(up.log(mpfr(2, 64))) == "0.69314718055994530943"
    assert format_endpoint(mpfr(-12345, 64) * 10**30) == "-1.2345e34"


@settings(max_examples=200, deadline=None)
@given(num=st.integers(1, 10**30), den=st.integers(1, 10**30), bits=st.sampled_from([53, 64, 128]))
def test_mpfr_endpoint_is_shortest(num, den, bits):
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        x = mpfr(num) / den
    text = format_endpoint(x)
    k = len(text.split("e")[0].replace(".", "").strip("0"))
    if k > 2:
        assert mpfr(_digits(x, k - 1), bits) != x


def test_endpoint_special_values():
    assert format_endpoint(7) == "7"
    assert format_endpoint(mpfr(0, 64)) == "0.0"
    assert format_endpoint(mpfr("inf")) == "inf"
    with pytest.raises(TypeError):
        format_endpoint("1.0")


def test_csv_header_is_exact():
    assert CSV_HEADER == "inequality_id,n,aux,verdict,lhs_lo,lhs_hi,rhs_lo,rhs_hi,bits_used"


def test_rows_have_nine_columns_and_json_mirrors():
    rows = [row_from(check_ineq_2_4(89)), row_from(firoozbakht_records([10])[0]),
            *rows_from_bound(check_pn_bounds(21)), row_from_gap(check_kourbatov(4), False)]
    for r in rows:
        cells = r.csv().split(",")
        assert len(cells) == 9
        data = json.loads(r.json())
        assert data["inequality_id"] == cells[0] and data["verdict"] == cells[3]
        assert str(data["bits_used"]) == cells[8]
    assert [r.inequality_id for r in rows[2:4]] == ["pn_lower", "pn_upper"]
    assert rows[4].inequality_id == "kourbatov_b1" and rows[4].verdict == "Fails"


def test_endpoints_enclose_the_record_values():
    rec = check_ineq_2_4(89)
    r = row_from(rec)
    assert mpfr(r.lhs_lo, rec.lhs.bits) <= rec.lhs.lo and rec.lhs.hi <= mpfr(r.lhs_hi,
                                                                             rec.lhs.bits)


def test_writer_formats():
    buf = io.StringIO()
    w = ReportWriter(buf, "csv")
    w.header()
    assert buf.getvalue() == CSV_HEADER + "\n"
    with pytest.raises(ValueError):
        ReportWriter(buf, "xml")
    jbuf = io.StringIO()
    w = ReportWriter(jbuf, "json")
    w.header()
    w.write([row_from(check_ineq_2_4(89))])
    assert json.loads(jbuf.getvalue())["verdict"] == "Holds"


def _row(n, verdict, asserted=True, cid="x"):
    return Row(cid, n, None, verdict, "0.0", "0.0", "1.0", "1.0", 53, asserted)


def test_summary_tallies_and_onsets():
    s = Summary("t")
    s.add([_row(1, "Fails", False), _row(2, "Holds", False), _row(3, "Fails", False),
           _row(4, "Holds"), _row(5, "Holds")])
    out = s.finish()
    assert out["totals"] == {"total": 5, "Holds": 3, "Fails": 2, "Unresolved": 0}
    assert out["probes"]["Fails"] == 2 and out["asserted"]["total"] == 2
    assert out["onsets"]["x"] == 4 and out["violations"] == [] and out["first_failure"] is None
    s.add([_row(6, "Fails")])
    assert s.first_failure["n"] == 6 and s.violation_count == 1


def test_summary_state_round_trip():
    s = Summary("t")
    s.add([_row(1, "Unresolved")])
    assert Summary.from_state(json.loads(json.dumps(s.finish() | {"onsets": s.onsets}))) == s


checkpoints = st.builds(
    Checkpoint, version=st.just(CHECKPOINT_VERSION), command=st.sampled_from(["all", "gaps"]),
    config_digest=st.text("0123456789abcdef", min_size=8, max_size=64),
    stage=st.integers(0, 20), next_chunk=st.integers(0, 10**4),
    last_completed_n=st.one_of(st.none(), st.integers(1, 10**7)),
    output_offset=st.integers(0, 10**9),
    violations=st.lists(st.tuples(st.text(min_size=1, max_size=10), st.integers(1, 10**6),
                                  st.none()).map(list), max_size=5),
    wall_time_s=st.floats(0, 1e6), done=st.booleans())


@settings(max_examples=50, deadline=None)
@given(checkpoints)
def test_checkpoint_round_trip(tmp_path_factory, state):
    path = tmp_path_factory.mktemp("ck") / "state.json"
    save_checkpoint(state, path)
    assert load_checkpoint(path, state.config_digest) == state
    assert list(path.parent.iterdir()) == [path]


def test_checkpoint_mismatches(tmp_path):
    path = tmp_path / "c.json"
    save_checkpoint(Checkpoint(CHECKPOINT_VERSION, "all", "abc", 0, 0, None, 0), path)
    with pytest.raises(CheckpointError):
        load_checkpoint(path, "abd")
    save_checkpoint(Checkpoint(CHECKPOINT_VERSION + 1, "all", "abc", 0, 0, None, 0), path)
    with pytest.raises(CheckpointError):
        load_checkpoint(path)
    path.write_text("{not json")
    with pytest.raises(CheckpointError):
        load_checkpoint(path)
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "missing.json")
