import numpy as np
import pytest

from pdqshape.datasets import (
    WOOL_OUTLIERS,
    ParseError,
    load_wool,
    read_frequency_csv,
    read_sample,
)


def test_wool_summary():
    s = load_wool()
    assert s.n == 4817
    assert s.values.min() == 9 and s.values.max() == 54
    assert np.all(s.values == np.round(s.values))
    assert np.median(s.values) == 25
    assert round(float(s.values.mean()), 2) == 25.08
    # the three largest diameters are the outliers
    assert tuple(s.values[-3:]) == WOOL_OUTLIERS
    trimmed = load_wool(trim_outliers=True)
    assert trimmed.n == 4814 and trimmed.values.max() < 50


def test_read_frequency_csv(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("value,count\n1,2\n2.5,1\n\n# note\n4,3\n")
    s = read_frequency_csv(p)
    assert list(s.values) == [1, 1, 2.5, 4, 4, 4]
    p.write_text("1,2\n2,1\n")
    assert read_frequency_csv(p).n == 3


@pytest.mark.parametrize("text,line", [
    ("value,count\n1,2\n1,3\n", 3),
    ("1,2\n2,0\n", 2),
    ("1,2\n2,1.5\n", 2),
    ("1,2,3\n", 1),
    ("1,2\nx,1\n", 2),
    ("1,2\ninf,1\n", 2),
    ("value,count\n", None),
])
def test_frequency_errors_report_lines(tmp_path, text, line):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(ParseError) as err:
        read_frequency_csv(p)
    assert err.value.line == line
    assert str(p) in str(err.value)


def test_read_sample(tmp_path):
    p = tmp_path / "x.txt"
    p.write_text("# header\n3.5\n\n-1\n2e1\n")
    assert list(read_sample(p).values) == [-1, 3.5, 20]
    p.write_text("1\nnan\n")
    with pytest.raises(ParseError) as err:
        read_sample(p)
    assert err.value.line == 2
    p.write_text("\n# nothing\n")
    with pytest.raises(ParseError):
        read_sample(p)


def test_parse_error_is_value_error():
    assert issubclass(ParseError, ValueError)
