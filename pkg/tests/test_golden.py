import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fastrpb.bias import RelativeBias1D, RelativeBias2D
from fastrpb.errors import GoldenFormatError
from fastrpb.golden import (
    format_matrix,
    load_bias1d,
    load_bias2d,
    parse_matrix,
    read_matrix,
    read_vector,
    save_bias1d,
    save_bias2d,
    write_matrix,
    write_vector,
)


def test_random_matrix_round_trip_is_bit_exact(tmp_path, rng):
    a = rng.standard_normal((16, 3))
    write_matrix(tmp_path / "m.csv", a)
    back = read_matrix(tmp_path / "m.csv")
    assert back.tobytes() == a.tobytes()


@settings(max_examples=100, deadline=None)
@given(a=arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5)), elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_round_trip_property(a):
    assert parse_matrix(format_matrix(a)).tobytes() == a.tobytes()


def test_extreme_values_round_trip():
    a = np.array([[5e-324, -0.0, 1.7976931348623157e308, 0.1, 1 / 3]])
    assert parse_matrix(format_matrix(a)).tobytes() == a.tobytes()


def test_header_layout():
    text = format_matrix(np.array([[1.0, 2.5], [3.0, -4.0]]))
    assert text == "2,2\n1.0,2.5\n3.0,-4.0\n"


def test_count_mismatch_reports_line(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("2,2\n1,2\n3,4\n5\n")
    with pytest.raises(GoldenFormatError) as exc:
        read_matrix(p)
    assert exc.value.line == 4 and "line 4" in str(exc.value)


def test_short_row_reports_line():
    with pytest.raises(GoldenFormatError) as exc:
        parse_matrix("2,2\n1,2\n3\n")
    assert exc.value.line == 3


def test_missing_rows():
    with pytest.raises(GoldenFormatError, match="only 1 present"):
        parse_matrix("2,2\n1,2\n")


def test_empty_file(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("")
    with pytest.raises(GoldenFormatError, match="missing header"):
        read_matrix(p)


@pytest.mark.parametrize("header", ["rows,cols", "2", "2,x", "1,2,3"])
def test_malformed_header(header):
    with pytest.raises(GoldenFormatError) as exc:
        parse_matrix(header + "\n1,2\n")
    assert exc.value.line == 1


def test_bad_value():
    with pytest.raises(GoldenFormatError, match="line 2"):
        parse_matrix("1,2\n1,abc\n")


def test_vector_round_trip(tmp_path, rng):
    v = rng.standard_normal(9)
    write_vector(tmp_path / "v.csv", v)
    assert read_vector(tmp_path / "v.csv").tobytes() == v.tobytes()


def test_bias_files(tmp_path, rng):
    b1 = RelativeBias1D(5, rng.standard_normal(9))
    save_bias1d(tmp_path / "b1.csv", b1)
    assert np.array_equal(load_bias1d(tmp_path / "b1.csv").weights, b1.weights)

    shared = RelativeBias2D(4, rng.standard_normal(7))
    save_bias2d(tmp_path / "s.csv", shared)
    got = load_bias2d(tmp_path / "s.csv")
    assert got.shared and np.array_equal(got.weights_h, shared.weights_h)

    sep = RelativeBias2D(4, rng.standard_normal(7), rng.standard_normal(7), shared=False)
    save_bias2d(tmp_path / "p.csv", sep)
    got = load_bias2d(tmp_path / "p.csv")
    assert not got.shared
    assert np.array_equal(got.weights_h, sep.weights_h) and np.array_equal(got.weights_v, sep.weights_v)
