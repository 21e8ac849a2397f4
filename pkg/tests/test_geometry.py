import math

import numpy as np
import pytest

from subgeo.errors import InputError
from subgeo.geometry import (
    EvalCounter,
    PointSet,
    RngStream,
    as_generator,
    dist,
    farthest_index,
    kth_largest,
    safe_ceil,
    sample_uniform,
    top_m,
)


def test_dist_345():
    c = EvalCounter()
    assert dist((0, 0), (3, 4), c) == 5.0
    assert c.distance_evals == 1


def test_dist_dimension_mismatch():
    with pytest.raises(InputError):
        dist((0, 0), (1, 2, 3))


def test_kth_largest_example():
    assert kth_largest([5, 3, 8, 1, 9], 3) == 5.0
    assert kth_largest([5, 3, 8, 1, 9], 1) == 9.0
    assert kth_largest([5, 3, 8, 1, 9], 5) == 1.0
    with pytest.raises(InputError):
        kth_largest([1, 2], 3)


def test_kth_largest_matches_sort(rng):
    v = rng.normal(size=1001)
    s = np.sort(v)[::-1]
    for k in (1, 2, 17, 500, 1001):
        assert kth_largest(v, k) == s[k - 1]


def test_top_m_ties_prefer_small_index():
    v = np.array([1.0, 3.0, 3.0, 3.0, 0.0])
    assert list(top_m(v, 2)) == [1, 2]
    assert list(top_m(v, 0)) == []
    assert list(top_m(v, 5)) == [0, 1, 2, 3, 4]


def test_farthest_index_tie_goes_to_zero():
    P = PointSet([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
    assert farthest_index(P, (0, 0)) == 0


def test_pointset_validation_and_immutability():
    with pytest.raises(InputError):
        PointSet([[0.0, np.nan]])
    with pytest.raises(InputError):
        PointSet(np.zeros((0, 2)))
    P = PointSet([[0.0, 0.0], [3.0, 4.0]])
    with pytest.raises(ValueError):
        P.coords[0, 0] = 1.0
    assert P.n == 2 and P.d == 2
    assert P.scaled(2.0) == PointSet([[0.0, 0.0], [6.0, 8.0]])


def test_sample_uniform_frequencies():
    P = PointSet(np.arange(10, dtype=float).reshape(-1, 1))
    S = sample_uniform(P, 100_000, 3)
    freq = np.bincount(S.coords[:, 0].astype(int), minlength=10) / 100_000
    assert np.all(np.abs(freq - 0.1) < 0.006)


def test_rng_stream_reproducible_and_distinct():
    a = RngStream(7, 3).generator().random(5)
    b = RngStream(7, 3).generator().random(5)
    c = RngStream(7, 4).generator().random(5)
    d = RngStream(7, 3).child(1).generator().random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)
    assert np.array_equal(as_generator(7).random(3), RngStream(7).generator().random(3))


def test_safe_ceil_absorbs_rounding():
    assert safe_ceil(1.1 * 10) == 11
    assert safe_ceil(3.0000001) == 4
    assert safe_ceil(2.0) == 2
    assert safe_ceil(math.pi) == 4


def test_counter_merge():
    a = EvalCounter(3, 1)
    a += EvalCounter(2, 2)
    assert (a.distance_evals, a.points_touched) == (5, 3)
