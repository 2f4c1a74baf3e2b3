"""Bundled data and readers for the sample file formats.

Frequency files are CSV with rows ``value,count`` (header optional, values
strictly increasing, counts >= 1).  Raw sample files hold one real per line;
blank lines and lines starting with ``#`` are skipped.
"""

from __future__ import annotations

import csv
import io
from importlib import resources

import numpy as np

from .estimate import EmpiricalSample

__all__ = ["ParseError", "read_frequency_csv", "read_sample", "load_wool", "WOOL_OUTLIERS"]

# the three largest wool diameters, dropped by ``load_wool(trim_outliers=True)``
WOOL_OUTLIERS = (52.0, 52.0, 54.0)


class ParseError(ValueError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, message, path=None, line=None):
        where = f"{path or '<input>'}" + (f":{line}" if line is not None else "")
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


def _parse_frequency(text, path=None):
    values, counts = [], []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        if len(row) != 2:
            raise ParseError(f"expected 2 fields, got {len(row)}", path, lineno)
        try:
            v, c = float(row[0]), float(row[1])
        except ValueError:
            if not values and lineno == 1:
                continue  # header
            raise ParseError(f"cannot parse {','.join(row)!r}", path, lineno) from None
        if not np.isfinite(v):
            raise ParseError(f"value {row[0]!r} is not finite", path, lineno)
        if c != int(c) or c < 1:
            raise ParseError(f"count {row[1]!r} is not a positive integer", path, lineno)
        if values and v <= values[-1]:
            raise ParseError("values must be strictly increasing", path, lineno)
        values.append(v)
        counts.append(int(c))
    if not values:
        raise ParseError("no data rows", path)
    return EmpiricalSample.from_frequencies(values, counts)


def read_frequency_csv(path) -> EmpiricalSample:
    with open(path, encoding="utf-8") as fh:
        return _parse_frequency(fh.read(), str(path))


def read_sample(path) -> EmpiricalSample:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                x = float(text)
            except ValueError:
                raise ParseError(f"cannot parse {text!r} as a number", str(path), lineno) from None
            if not np.isfinite(x):
                raise ParseError(f"{text!r} is not finite", str(path), lineno)
            out.append(x)
    if not out:
        raise ParseError("no data", str(path))
    return EmpiricalSample(out)


def load_wool(trim_outliers: bool = False) -> EmpiricalSample:
    """4817 wool fibre diameters in microns (integers 9 to 54).

    With ``trim_outliers`` the two 52s and the 54 are dropped.
    """
    text = resources.files("pdqshape").joinpath("data/wool.csv").read_text(encoding="utf-8")
    s = _parse_frequency(text, "wool.csv")
    if trim_outliers:
        return EmpiricalSample(s.values[s.values < 50])
    return s
