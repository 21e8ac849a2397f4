"""Planted-instance generators and the collinear lower-bound construction.

Every generator re-checks its recorded truth with a full scan before
returning, so a ``PlantedTruth`` is always feasible for its instance.
"""

from __future__ import annotations

import math

import numpy as np

from . import kernels
from .errors import InputError, PreconditionError
from .geometry import PointSet, as_generator, as_point
from .model import OutlierInstance, PlantedTruth, TwoClassInstance
from .oracles import oracle_polytope_bracket, oracle_two_class_bracket

__all__ = [
    "gen_planted_meb",
    "gen_lower_bound",
    "verify_lower_bound",
    "gen_planted_kcenter",
    "gen_planted_line",
    "gen_planted_svm1",
    "gen_planted_svm2",
    "outlier_count",
    "GENERATORS",
]


def outlier_count(n: int, gamma: float) -> int:
    if n < 1:
        raise InputError("n must be positive")
    if not 0.0 <= gamma < 1.0:
        raise InputError(f"gamma must lie in [0, 1), got {gamma}")
    m = int(round(gamma * n))
    if gamma > 0 and m < 1:
        raise InputError(f"gamma*n = {gamma * n:g} rounds to zero outliers")
    if m >= n:
        raise InputError("need at least one inlier")
    return m


def _unit(rng, m: int, d: int) -> np.ndarray:
    u = rng.normal(size=(m, d))
    nrm = np.linalg.norm(u, axis=1, keepdims=True)
    nrm[nrm == 0] = 1.0
    return u / nrm


def _in_ball(rng, m: int, d: int, r: float) -> np.ndarray:
    return _unit(rng, m, d) * (r * rng.random((m, 1)) ** (1.0 / d))


def _shuffle(rng, inl: np.ndarray, out: np.ndarray):
    """Interleave inliers and outliers at random positions."""
    X = np.vstack([inl, out]) if out.size else inl
    perm = rng.permutation(X.shape[0])
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    inliers = np.sort(inv[: inl.shape[0]])
    return X[perm], inliers


def _check(ok: bool, what: str) -> None:
    if not ok:
        raise AssertionError(f"planted truth self-check failed: {what}")


def gen_planted_meb(
    n: int,
    d: int,
    gamma: float,
    r_in: float = 1.0,
    beta: float = 10.0,
    seed: int = 0,
    center=None,
) -> OutlierInstance:
    """Inliers uniform in ``B(c*, r_in)``, outliers on the sphere of radius
    ``beta * r_in`` about ``c*``.  The optimum is at most ``r_in``."""
    if beta <= 2:
        raise InputError("beta must exceed 2 so that outliers are unambiguous")
    if r_in <= 0 or d < 1:
        raise InputError("need r_in > 0 and d >= 1")
    m = outlier_count(n, gamma)
    rng = as_generator(seed)
    c = np.zeros(d) if center is None else as_point(center, d)
    inl = c + _in_ball(rng, n - m, d, r_in)
    out = c + _unit(rng, m, d) * (beta * r_in)
    X, inliers = _shuffle(rng, inl, out)
    dist = np.sqrt(kernels.sq_dists(X, c))
    _check(bool(np.all(dist[inliers] <= r_in * (1 + 1e-12))), "inliers inside B(c*, r_in)")
    truth = PlantedTruth("meb", {"center": c, "radius": r_in, "beta": beta}, inliers, r_in)
    return OutlierInstance(PointSet(X), gamma, truth)


def gen_lower_bound(n: int, gamma: float, x: float = 1.0, y: float = 100.0, d: int = 2):
    """Three collinear clusters ``q_a = 0``, ``q_b = x e1``, ``q_c = (x+y) e1``
    holding 1, ``(1-gamma) n - 1`` and ``gamma n`` points.  The optimal
    radius is ``x / 2`` and ``P_opt = P_a + P_b``."""
    if not (x > 0 and y >= 10 * x):
        raise InputError("need x > 0 and y >= 10 x")
    if d < 1:
        raise InputError("d must be >= 1")
    m = gamma * n
    if abs(m - round(m)) > 1e-9 or round(m) < 1:
        raise InputError("gamma*n must be a positive integer")
    m = int(round(m))
    nb = n - m - 1
    if nb < 1:
        raise InputError("construction needs (1-gamma) n >= 2")
    e = np.zeros(d)
    e[0] = 1.0
    qa, qb, qc = 0.0 * e, x * e, (x + y) * e
    X = np.vstack([qa[None, :], np.repeat(qb[None, :], nb, 0), np.repeat(qc[None, :], m, 0)])
    inliers = np.arange(nb + 1)
    truth = PlantedTruth(
        "meb",
        {"center": 0.5 * x * e, "radius": 0.5 * x, "x": x, "y": y, "qa": qa, "qb": qb, "qc": qc,
         "sizes": (1, nb, m)},
        inliers,
        0.5 * x,
    )
    _check(bool(np.all(np.sqrt(kernels.sq_dists(X[inliers], 0.5 * x * e)) <= 0.5 * x + 1e-12)),
           "P_a and P_b within x/2 of the midpoint")
    return OutlierInstance(PointSet(X), gamma, truth)


def verify_lower_bound(inst: OutlierInstance, center) -> float:
    """Ratio between the radius a center on ``[q_b, q_c]`` needs to cover
    ``(1-gamma) n`` points and the optimum ``x / 2``; always at least 2."""
    t = inst.truth
    if t is None or "qb" not in t.params:
        raise InputError("instance was not built by gen_lower_bound")
    qb, qc, x = t.params["qb"], t.params["qc"], t.params["x"]
    c = as_point(center, inst.d)
    seg = qc - qb
    L2 = float(seg @ seg)
    lam = float((c - qb) @ seg) / L2
    off = c - (qb + lam * seg)
    scale = math.sqrt(L2)
    if lam < -1e-9 or lam > 1 + 1e-9 or float(np.linalg.norm(off)) > 1e-9 * scale:
        raise PreconditionError("center must lie on the segment [q_b, q_c]")
    keep = inst.n - round(inst.gamma * inst.n)
    dist = np.sqrt(kernels.sq_dists(inst.P.coords, c))
    need = float(np.partition(dist, keep - 1)[keep - 1])
    return need / (0.5 * x)


def gen_planted_kcenter(
    n: int,
    d: int,
    k: int = 2,
    gamma: float = 0.1,
    sep: float = 20.0,
    r_in: float = 1.0,
    out_radius: float = 100.0,
    seed: int = 0,
) -> OutlierInstance:
    """``k`` balls of radius ``r_in`` with centers ``sep`` apart along
    ``e1``; outliers at distance ``out_radius`` from their centroid."""
    if k < 1 or d < 1:
        raise InputError("need k >= 1 and d >= 1")
    m = outlier_count(n, gamma)
    rng = as_generator(seed)
    C = np.zeros((k, d))
    C[:, 0] = sep * np.arange(k)
    labels = np.arange(n - m) % k
    inl = C[labels] + _in_ball(rng, n - m, d, r_in)
    mid = C.mean(axis=0)
    out = mid + _unit(rng, m, d) * out_radius
    X, inliers = _shuffle(rng, inl, out)
    dist = np.sqrt(kernels.min_sq_dists(X[inliers], C))
    _check(bool(np.all(dist <= r_in * (1 + 1e-12))), "inliers within r_in of a center")
    truth = PlantedTruth("kcenter", {"centers": C, "radius": r_in, "k": k}, inliers, r_in)
    return OutlierInstance(PointSet(X), gamma, truth)


def gen_planted_line(
    n: int,
    d: int,
    gamma: float = 0.1,
    width: float = 0.5,
    length: float = 20.0,
    out_dist: float | None = None,
    seed: int = 0,
) -> OutlierInstance:
    """Inliers within ``width`` of a random line through the origin and
    spread over ``length`` along it; outliers at distance ``out_dist``
    (default ``length``) from the line.  ``truth.size`` is the realised
    inlier width, an upper bound on the optimum."""
    if d < 2 or width <= 0 or length <= 0:
        raise InputError("need d >= 2, width > 0 and length > 0")
    m = outlier_count(n, gamma)
    rng = as_generator(seed)
    u = _unit(rng, 1, d)[0]
    out_dist = float(length if out_dist is None else out_dist)

    def orth(v):
        return v - np.outer(v @ u, u)

    t_in = rng.uniform(-length / 2, length / 2, n - m)
    off = orth(_in_ball(rng, n - m, d, 1.0))
    # rescale so the orthogonal part is uniform in a (d-1)-ball of radius width
    nrm = np.linalg.norm(off, axis=1, keepdims=True)
    nrm[nrm == 0] = 1.0
    off = off / nrm * (width * rng.random((n - m, 1)) ** (1.0 / (d - 1)))
    inl = np.outer(t_in, u) + off
    t_out = rng.uniform(-length / 2, length / 2, m)
    od = orth(rng.normal(size=(m, d)))
    od /= np.linalg.norm(od, axis=1, keepdims=True)
    out = np.outer(t_out, u) + od * out_dist
    X, inliers = _shuffle(rng, inl, out)
    res = X[inliers] - np.outer(X[inliers] @ u, u)
    w = float(np.sqrt(np.einsum("ij,ij->i", res, res)).max())
    _check(w <= width * (1 + 1e-9), "inliers within width of the line")
    truth = PlantedTruth(
        "line", {"anchor": np.zeros(d), "direction": u, "width": width}, inliers, w
    )
    return OutlierInstance(PointSet(X), gamma, truth)


def gen_planted_svm1(
    n: int,
    d: int,
    gamma: float = 0.1,
    x_lo: float = 1.0,
    x_hi: float = 2.5,
    r_orth: float = 1.0,
    seed: int = 0,
) -> OutlierInstance:
    """One-class instance: inliers with ``<p, e1>`` uniform in
    ``[x_lo, x_hi]`` and orthogonal part in a ball of radius ``r_orth``;
    outliers at ``<p, e1> = -1``.  ``truth.size`` is the inliers' polytope
    distance from the origin (upper end of a tight bracket)."""
    if d < 2 or not 0 < x_lo < x_hi:
        raise InputError("need d >= 2 and 0 < x_lo < x_hi")
    m = outlier_count(n, gamma)
    rng = as_generator(seed)

    def block(cnt, x1):
        B = np.zeros((cnt, d))
        B[:, 0] = x1
        B[:, 1:] = _in_ball(rng, cnt, d - 1, r_orth)
        return B

    inl = block(n - m, rng.uniform(x_lo, x_hi, n - m))
    out = block(m, -1.0)
    X, inliers = _shuffle(rng, inl, out)
    lo, hi, v = oracle_polytope_bracket(X[inliers], 1e-10)
    _check(float(X[inliers, 0].min()) >= x_lo - 1e-12, "inliers beyond the planted margin")
    truth = PlantedTruth(
        "svm1",
        {"direction": np.eye(d)[0], "margin_lb": float(X[inliers, 0].min()), "rho_bracket": (lo, hi),
         "v": v},
        inliers,
        hi,
    )
    return OutlierInstance(PointSet(X), gamma, truth)


def gen_planted_svm2(
    n1: int,
    n2: int,
    d: int,
    gamma: float = 0.1,
    margin: float = 1.0,
    depth: float = 1.5,
    r_orth: float = 1.0,
    seed: int = 0,
) -> TwoClassInstance:
    """Mirrored two-class instance.  Class 1 inliers have ``<p, e1>`` in
    ``[margin/2, margin/2 + depth]``, class 2 inliers the mirror image; each
    class has a ``gamma`` fraction of cross-side outliers.  ``margin`` on the
    instance is the inliers' exact convex-hull distance (tight bracket)."""
    if d < 2 or margin <= 0:
        raise InputError("need d >= 2 and margin > 0")
    m1, m2 = outlier_count(n1, gamma), outlier_count(n2, gamma)
    rng = as_generator(seed)
    h = margin / 2.0

    def block(cnt, x1):
        B = np.zeros((cnt, d))
        B[:, 0] = x1
        B[:, 1:] = _in_ball(rng, cnt, d - 1, r_orth)
        return B

    X1, in1 = _shuffle(rng, block(n1 - m1, rng.uniform(h, h + depth, n1 - m1)),
                       block(m1, -h - rng.uniform(0.0, 1.0, m1)))
    X2, in2 = _shuffle(rng, block(n2 - m2, -rng.uniform(h, h + depth, n2 - m2)),
                       block(m2, h + rng.uniform(0.0, 1.0, m2)))
    _check(float(X1[in1, 0].min()) >= h and float(X2[in2, 0].max()) <= -h, "planted slab")
    lo, hi, v = oracle_two_class_bracket(X1[in1], X2[in2])
    t1 = PlantedTruth("svm2", {"direction": np.eye(d)[0], "margin": margin}, in1, hi)
    t2 = PlantedTruth("svm2", {"direction": -np.eye(d)[0], "margin": margin}, in2, hi)
    return TwoClassInstance(PointSet(X1), PointSet(X2), gamma, gamma, t1, t2, hi)


GENERATORS = {
    "meb": gen_planted_meb,
    "kcenter": gen_planted_kcenter,
    "line": gen_planted_line,
    "svm1": gen_planted_svm1,
    "svm2": gen_planted_svm2,
    "lowerbound": gen_lower_bound,
}
