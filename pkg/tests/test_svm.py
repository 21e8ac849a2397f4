import math

import numpy as np
import pytest
from scipy.optimize import minimize

from subgeo.errors import InputError
from subgeo.instances import gen_planted_svm1, gen_planted_svm2
from subgeo.model import BiCriteriaParams, OutlierInstance, TwoClassInstance
from subgeo.oracles import oracle_polytope_bracket, oracle_two_class_bracket
from subgeo.svm import HalfSpaceFamily, gilbert, segment_closest, svm1_outliers, svm2_outliers


def qp_distance(X):
    """Independent oracle: min ||X^T w|| over the simplex by SLSQP."""
    n = X.shape[0]
    G = X @ X.T
    res = minimize(
        lambda w: w @ G @ w,
        np.full(n, 1.0 / n),
        jac=lambda w: 2 * G @ w,
        bounds=[(0, 1)] * n,
        constraints=[{"type": "eq", "fun": lambda w: w.sum() - 1, "jac": lambda w: np.ones(n)}],
        method="SLSQP",
        options={"ftol": 1e-15, "maxiter": 1000},
    )
    return math.sqrt(max(res.fun, 0.0))


def separable(rng, n=40, d=3, shift=3.0):
    X = rng.normal(size=(n, d))
    X[:, 0] = shift + np.abs(X[:, 0])
    return X


def test_singleton():
    st = gilbert(np.array([[3.0, 4.0]]))
    assert st.norm == pytest.approx(5.0)
    assert st.bracket == pytest.approx((5.0, 5.0))


def test_two_points_symmetric():
    st = gilbert(np.array([[1.0, 0.0], [0.0, 1.0]]), epsilon=1e-7)
    assert abs(st.norm - math.sqrt(0.5)) <= 1e-6


def test_segment_closest():
    v = np.array([1.0, 1.0])
    assert np.allclose(segment_closest(v, np.array([1.0, -1.0])), [1.0, 0.0])
    assert np.allclose(segment_closest(v, np.array([2.0, 2.0])), v)
    assert np.allclose(segment_closest(v, v), v)


def test_inseparable_flag():
    X = np.array([[1.0, 0.0], [-1.0, 0.1], [0.0, -1.0]])
    st = gilbert(X, 1e-6, 10_000)
    assert st.inseparable


@pytest.mark.parametrize("seed", range(5))
def test_matches_qp_oracle(seed):
    X = separable(np.random.default_rng(seed), n=25)
    lo, hi, _ = oracle_polytope_bracket(X, 1e-9)
    ref = qp_distance(X)
    assert lo - 1e-6 <= ref <= hi + 1e-6
    assert hi - lo <= 1e-8 * hi + 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_iteration_bound_and_monotone(seed):
    X = separable(np.random.default_rng(seed), n=200, d=5)
    st = gilbert(X, 0.1, 100_000)
    assert st.cert >= 0.9 * st.norm
    lo, hi, _ = oracle_polytope_bracket(X, 1e-9)
    E = (2 * np.sqrt(((X - X.mean(0)) ** 2).sum(1).max())) ** 2 / lo**2
    assert st.iter <= 2 * math.ceil(2 * E / 0.1)
    h = st.history_norms
    assert np.all(np.diff(h) <= 1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_bracket_sound_every_iterate(seed):
    X = separable(np.random.default_rng(seed + 10), n=100, d=4, shift=2.0)
    lo, hi, _ = oracle_polytope_bracket(X, 1e-10)
    st = gilbert(X, 1e-4, 50_000)
    rho = 0.5 * (lo + hi)
    assert np.all(st.history_certs <= rho + 1e-9)
    assert np.all(st.history_norms >= rho - 1e-9)


def test_halfspace_family_sizes():
    fam = HalfSpaceFamily()
    u = np.array([1.0, 0.0])
    X = np.array([[2.0, 5.0], [0.5, -1.0], [-1.0, 0.0]])
    s = fam.min_enclosing_size(u, X)
    assert s[0] == pytest.approx(0.5) and s[1] == pytest.approx(2.0) and math.isinf(s[2])
    assert list(fam.contains(u, 2.0, X)) == [True, True, False]


def test_svm1_single_point():
    p = np.array([[3.0, 4.0]])
    rep = svm1_outliers(p, 0.0, BiCriteriaParams(0.5, 0.25))
    assert rep.margin == pytest.approx(5.0)


def test_svm1_planted_linear():
    inst = gen_planted_svm1(5000, 5, 0.1, seed=1)
    p = BiCriteriaParams(0.3, 0.25, repeats=20)
    rep = svm1_outliers(inst, None, p, "linear", rng=3)
    assert rep.margin >= 0.7 * inst.truth.size
    assert rep.excluded[0] <= (1.25**2 / 0.75) * 0.1 * 5000


def test_svm1_counter_independent_of_n():
    p = BiCriteriaParams(0.3, 0.25)
    ev = set()
    for n in (100_000, 300_000):
        inst = gen_planted_svm1(n, 4, 0.1, seed=0)
        ev.add(svm1_outliers(inst, None, p, "sublinear", rng=1, final=False).counter.distance_evals)
    assert len(ev) == 1


def test_svm2_two_points():
    inst = TwoClassInstance(np.array([[0.0, 1.0]]), np.array([[0.0, -1.0]]), 0.0, 0.0)
    rep = svm2_outliers(inst, BiCriteriaParams(0.5, 0.25))
    assert rep.margin == pytest.approx(2.0)
    assert abs(abs(rep.direction[1]) - 1.0) < 1e-12


@pytest.mark.parametrize("convention", ["p1-p2", "p2-p1"])
def test_svm2_planted(convention):
    inst = gen_planted_svm2(3000, 3000, 4, 0.1, margin=1.0, seed=2)
    p = BiCriteriaParams(0.3, 0.25, repeats=20)
    rep = svm2_outliers(inst, p, "linear", rng=4, convention=convention)
    assert rep.margin >= 0.7 * 1.0
    cap = (1.25**2 / 0.75) * 0.1 * 3000
    assert rep.excluded[0] <= cap and rep.excluded[1] <= cap


def test_two_class_oracle_matches_qp(rng):
    A = rng.normal(size=(10, 3)) + [3, 0, 0]
    B = rng.normal(size=(12, 3)) - [3, 0, 0]
    lo, hi, _ = oracle_two_class_bracket(A, B, 1e-9)
    D = (A[:, None, :] - B[None, :, :]).reshape(-1, 3)
    ref = qp_distance(D)
    assert lo - 1e-6 <= ref <= hi + 1e-6


def test_bad_mode():
    with pytest.raises(InputError):
        svm1_outliers(np.ones((3, 2)), 0.0, BiCriteriaParams(0.5, 0.25), "fast")
    inst = TwoClassInstance(np.ones((2, 2)), -np.ones((2, 2)), 0.0, 0.0)
    with pytest.raises(InputError):
        svm2_outliers(inst, BiCriteriaParams(0.5, 0.25), convention="x")
    assert isinstance(OutlierInstance(np.ones((3, 2)), 0.0).P.n, int)
