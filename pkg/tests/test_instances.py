import numpy as np
import pytest

from subgeo.errors import InputError, PreconditionError
from subgeo.flat import Flat, dist_flat
from subgeo.instances import (
    gen_lower_bound,
    gen_planted_kcenter,
    gen_planted_line,
    gen_planted_meb,
    gen_planted_svm1,
    gen_planted_svm2,
    outlier_count,
    verify_lower_bound,
)
from subgeo.oracles import oracle_meb_bracket


def test_planted_meb_gamma_zero_and_gap():
    inst = gen_planted_meb(500, 4, 0.0, seed=1)
    assert inst.truth.inliers.size == 500
    inst = gen_planted_meb(2000, 50, 0.1, beta=10, seed=2)
    X = inst.P.coords
    r = np.linalg.norm(X - inst.truth.params["center"], axis=1)
    out = np.setdiff1d(np.arange(2000), inst.truth.inliers)
    assert out.size == 200
    assert r[out].min() - r[inst.truth.inliers].max() >= 9 - 1e-9
    _, lb = oracle_meb_bracket(X[inst.truth.inliers], 1e-3)
    assert lb <= inst.truth.size * (1 + 1e-9)


def test_generators_deterministic():
    a = gen_planted_meb(300, 3, 0.1, seed=5)
    b = gen_planted_meb(300, 3, 0.1, seed=5)
    c = gen_planted_meb(300, 3, 0.1, seed=6)
    assert a.P == b.P and not a.P == c.P
    assert np.array_equal(a.truth.inliers, b.truth.inliers)


def test_outlier_count_validation():
    assert outlier_count(100, 0.1) == 10
    with pytest.raises(InputError):
        outlier_count(10, 0.01)
    with pytest.raises(InputError):
        outlier_count(0, 0.1)


def test_lower_bound_construction():
    inst = gen_lower_bound(100, 0.1, 1.0, 100.0)
    assert inst.truth.size == 0.5
    assert inst.truth.params["sizes"] == (1, 89, 10)
    assert verify_lower_bound(inst, inst.truth.params["qb"]) == pytest.approx(2.0)
    assert verify_lower_bound(inst, inst.truth.params["qc"]) >= 2.0
    mid = 0.5 * (inst.truth.params["qb"] + inst.truth.params["qc"])
    assert verify_lower_bound(inst, mid) > 2.0
    with pytest.raises(PreconditionError):
        verify_lower_bound(inst, [0.5, 1.0])
    with pytest.raises(InputError):
        gen_lower_bound(100, 0.1, 1.0, 5.0)


def test_planted_kcenter_truth():
    inst = gen_planted_kcenter(1000, 3, 2, 0.1, seed=4)
    X = inst.P.coords[inst.truth.inliers]
    C = inst.truth.params["centers"]
    d = np.min(np.linalg.norm(X[:, None, :] - C[None], axis=2), axis=1)
    assert d.max() <= inst.truth.size * (1 + 1e-9)


def test_planted_line_truth():
    inst = gen_planted_line(1000, 4, 0.1, width=0.3, seed=2)
    F = Flat.line(inst.truth.params["anchor"], inst.truth.params["direction"])
    w = dist_flat(F, inst.P.coords[inst.truth.inliers]).max()
    assert w == pytest.approx(inst.truth.size) and w <= 0.3


def test_planted_svm_truth():
    inst = gen_planted_svm1(2000, 3, 0.1, seed=1)
    lo, hi = inst.truth.params["rho_bracket"]
    assert lo <= hi <= lo * (1 + 1e-9)
    assert inst.P.coords[inst.truth.inliers, 0].min() >= 1.0
    two = gen_planted_svm2(500, 700, 3, 0.1, margin=1.0, seed=1)
    assert two.margin >= 1.0 - 1e-9
    assert two.truth1.inliers.size == 450 and two.truth2.inliers.size == 630
