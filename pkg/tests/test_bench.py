import io
from fractions import Fraction

import pytest

from sparsenash.bench import CSV_HEADER, bench_star, fit_slope, write_csv
from sparsenash.errors import ParameterOutOfRange


def test_slope_needs_two_sizes() -> None:
    assert fit_slope([10], [1.0]) is None
    assert fit_slope([1, 2, 4], [1.0, 4.0, 16.0]) == pytest.approx(2.0)


def test_small_stars() -> None:
    result = bench_star([1, 2], Fraction(1, 10), repeats=2)
    assert [row.k for row in result.rows] == [1, 2]
    assert all(row.s_leaf == 120 and row.s_center == 120 for row in result.rows)
    assert all(len(row.timings) == 2 for row in result.rows)
    assert result.slope is not None

    handle = io.StringIO()
    write_csv(result, handle)
    lines = handle.getvalue().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 3


def test_sizes_must_ascend() -> None:
    with pytest.raises(ParameterOutOfRange):
        bench_star([5, 2], Fraction(1, 10), repeats=1)
    with pytest.raises(ParameterOutOfRange):
        bench_star([2], Fraction(1, 10), repeats=0)


@pytest.mark.slow
def test_star_runtime_is_polynomial() -> None:
    result = bench_star([10, 25, 50, 100], Fraction(1, 10), repeats=1)
    assert result.slope <= 4
