import itertools

import numpy as np
import pytest

from subgeo import kernels
from subgeo.geometry import PointSet
from subgeo.oracles import (
    _two_class,
    exact_meb_radius,
    oracle_kcenter_bruteforce,
    oracle_meb_bracket,
    oracle_meb_exact_lowdim,
    oracle_meb_outliers_bruteforce,
    oracle_polytope_bracket,
    oracle_two_class_bracket,
)


def test_welzl_two_points_and_triangle():
    b = oracle_meb_exact_lowdim(np.array([[0.0, 0.0], [2.0, 0.0]]))
    assert np.allclose(b.center, [1.0, 0.0]) and b.radius == pytest.approx(1.0)
    T = np.array([[1.0, 0.0], [-0.5, np.sqrt(3) / 2], [-0.5, -np.sqrt(3) / 2]])
    b = oracle_meb_exact_lowdim(T)
    assert np.allclose(b.center, 0.0, atol=1e-12) and b.radius == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(5))
def test_welzl_vs_reference(seed):
    X = np.random.default_rng(seed).normal(size=(50, 2))
    w = oracle_meb_exact_lowdim(X)
    ball, lb = oracle_meb_bracket(X, 1e-9)
    assert lb - 1e-9 <= w.radius <= ball.radius + 1e-9
    assert np.linalg.norm(X - w.center, axis=1).max() <= w.radius * (1 + 1e-9)


def test_bracket_encloses_and_is_tight(rng):
    X = rng.normal(size=(300, 7))
    ball, lb = oracle_meb_bracket(X, 1e-8)
    assert np.linalg.norm(X - ball.center, axis=1).max() <= ball.radius * (1 + 1e-12)
    assert ball.radius <= lb * (1 + 1e-8) + 1e-12


def test_working_set_meb_agrees(rng):
    X = rng.normal(size=(20_000, 6))
    ball, lb = oracle_meb_bracket(X, 1e-6)
    _, ub2, lb2, _ = kernels.meb_fw_away(X, 1e-4, 10**6)
    assert ball.radius <= lb * (1 + 1e-6) + 1e-12
    # both brackets contain the true radius, so they overlap
    assert lb <= ub2 * (1 + 1e-12) and lb2 <= ball.radius * (1 + 1e-12)


def test_polytope_oracle_agrees_with_gilbert(rng):
    X = rng.normal(size=(20_000, 5))
    X[:, 0] = 1.0 + np.abs(X[:, 0])
    lo, hi, v = oracle_polytope_bracket(X, 1e-9)
    v2, _, c2, _, _ = kernels.polytope_distance(X, 1e-4, 10**6, True, False)
    assert hi <= lo / (1 - 1e-9) + 1e-12
    assert lo <= np.linalg.norm(v2) + 1e-12 and c2 <= hi + 1e-12
    assert float((X @ v).min()) / np.linalg.norm(v) == pytest.approx(lo)


def test_two_class_oracle_agrees_with_away_steps(rng):
    A = rng.normal(size=(2500, 4)) + [2.5, 0, 0, 0]
    B = rng.normal(size=(2500, 4)) - [2.5, 0, 0, 0]
    lo, hi, v = oracle_two_class_bracket(A, B, 1e-6)
    lo2, hi2, _ = _two_class(A, B, 1e-3, 100_000)
    assert lo <= hi2 * (1 + 1e-12) and lo2 <= hi * (1 + 1e-12)
    assert hi - lo <= 1e-6 * hi + 1e-12


def test_outliers_bruteforce():
    X = np.vstack([np.random.default_rng(0).normal(size=(9, 2)), [[100.0, 100.0]]])
    r0, S0 = oracle_meb_outliers_bruteforce(PointSet(X[:9]), 0.0)
    assert r0 == pytest.approx(exact_meb_radius(X[:9]))
    r, S = oracle_meb_outliers_bruteforce(PointSet(X), 0.1)
    assert 9 not in set(S) and r == pytest.approx(r0)


def test_kcenter_bruteforce_matches_exhaustive():
    rng = np.random.default_rng(3)
    X = np.vstack([rng.normal(size=(4, 2)), rng.normal(size=(4, 2)) + 10])
    r, inl, lab = oracle_kcenter_bruteforce(PointSet(X), 2, 0.0)
    best = np.inf
    for mask in itertools.product([0, 1], repeat=8):
        mask = np.array(mask)
        rr = max(exact_meb_radius(X[mask == c]) if np.any(mask == c) else 0.0 for c in (0, 1))
        best = min(best, rr)
    assert r == pytest.approx(best)


def test_oracles_are_deterministic(rng):
    X = rng.normal(size=(100, 3))
    assert oracle_meb_bracket(X)[0].radius == oracle_meb_bracket(X)[0].radius
    Y = X + [5, 0, 0]
    assert oracle_polytope_bracket(Y)[:2] == oracle_polytope_bracket(Y)[:2]
