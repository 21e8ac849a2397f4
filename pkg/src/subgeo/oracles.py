"""Reference solvers used to anchor tests.

All oracles are deterministic and do not take a random seed.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from . import kernels
from .errors import InputError
from .geometry import PointSet, safe_ceil, top_m
from .meb import Ball

__all__ = [
    "oracle_meb_reference",
    "oracle_meb_bracket",
    "oracle_meb_exact_lowdim",
    "oracle_meb_outliers_bruteforce",
    "oracle_kcenter_bruteforce",
    "oracle_polytope_bracket",
    "exact_meb_radius",
    "oracle_two_class_bracket",
]


def _arr(P) -> np.ndarray:
    if isinstance(P, PointSet):
        return P.coords
    a = np.ascontiguousarray(P, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 1:
        raise InputError("expected a non-empty (n, d) array")
    return a


def oracle_meb_bracket(P, tol: float = 1e-6, max_iter: int = 10**6):
    """``(ball, lower)``: an enclosing ball and a certified lower bound on
    the MEB radius, with ``ball.radius <= (1 + tol) * lower`` unless the
    iteration cap was hit.

    Frank-Wolfe with away steps on the dual of the MEB problem; the duality
    gap gives the bracket.
    """
    X = _arr(P)
    if X.shape[0] == 1:
        return Ball(X[0].copy(), 0.0), 0.0
    if X.shape[0] > _WS_MIN:
        c, r, lb = _working_set(X, float(tol), int(max_iter))
        return Ball(c, r), min(lb, r)
    c, ub, lb, _ = kernels.meb_fw_away(X, float(tol), int(max_iter))
    # ub is the max distance from c, so B(c, ub) encloses X exactly
    r = math.sqrt(float(kernels.sq_dists(X, c).max()))
    return Ball(np.asarray(c).copy(), r), min(lb, r)


_WS_MIN = 4096
_WS_GROW = 512


def _working_set(X: np.ndarray, tol: float, max_iter: int):
    """Solve on a small subset, then add the points its ball misses.

    The subset's dual value bounds ``Rad(subset) <= Rad(X)`` from below, so
    the bracket stays certified for all of ``X``.
    """
    n = X.shape[0]
    c, _, _, _ = kernels.meb_fw_away(X, 1e-2, max_iter)
    S = top_m(kernels.sq_dists(X, c), min(n, _WS_GROW))
    while True:
        XS = np.ascontiguousarray(X[S])
        c, _, lb, _ = kernels.meb_fw_away(XS, 0.5 * tol, max_iter)
        D = kernels.sq_dists(X, c)
        r = math.sqrt(float(D.max()))
        if r <= (1.0 + tol) * lb or S.size == n:
            return np.asarray(c).copy(), r, lb
        D[S] = -1.0
        cut = ((1.0 + 0.5 * tol) * lb) ** 2
        m = min(int(np.count_nonzero(D > cut)), _WS_GROW)
        add = top_m(D, max(m, 1))
        S = np.union1d(S, add)


def oracle_meb_reference(P, tol: float = 1e-6) -> Ball:
    """High-accuracy enclosing ball; radius within ``(1+tol)`` of optimal."""
    return oracle_meb_bracket(P, tol)[0]


def _circum(R: np.ndarray):
    """Smallest ball with every row of ``R`` on its boundary (affine hull)."""
    k = R.shape[0]
    if k == 0:
        return None, -1.0
    p0 = R[0]
    if k == 1:
        return p0.copy(), 0.0
    A = R[1:] - p0
    G = A @ A.T
    b = 0.5 * np.einsum("ij,ij->i", A, A)
    lam, *_ = np.linalg.lstsq(G, b, rcond=None)
    c = p0 + lam @ A
    r = math.sqrt(max(float(np.max(np.einsum("ij,ij->i", R - c, R - c))), 0.0))
    return c, r


def _inside(c, r, p) -> bool:
    if c is None:
        return False
    diff = p - c
    return math.sqrt(float(diff @ diff)) <= r * (1.0 + 1e-12) + 1e-12


def oracle_meb_exact_lowdim(P) -> Ball:
    """Exact MEB for ``d <= 3`` by Welzl's recursion.

    Points are processed in a fixed pseudo-random order (seed 0) so that the
    expected running time is linear while the output stays deterministic.
    """
    X = _arr(P)
    n, d = X.shape
    if d > 3:
        raise InputError("exact low-dimensional MEB needs d <= 3")
    order = np.random.default_rng(0).permutation(n)
    pts = X[order]

    def mtf(m: int, R: list):
        c, r = _circum(np.array(R).reshape(len(R), d)) if R else (None, -1.0)
        if len(R) == d + 1:
            return c, r
        for i in range(m):
            if not _inside(c, r, pts[i]):
                c, r = mtf(i, R + [pts[i]])
        return c, r

    c, r = mtf(n, [])
    # certify: recompute the radius from the center over all points
    r = math.sqrt(float(kernels.sq_dists(X, np.asarray(c, dtype=np.float64)).max()))
    return Ball(np.asarray(c, dtype=np.float64), r)


def exact_meb_radius(X: np.ndarray) -> float:
    """Exact radius in ``d <= 3``, a ``1e-12``-accurate reference otherwise."""
    if X.shape[0] == 1:
        return 0.0
    if X.shape[1] <= 3:
        return oracle_meb_exact_lowdim(X).radius
    return oracle_meb_reference(X, 1e-12).radius


def _keep_count(n: int, gamma: float) -> int:
    return safe_ceil((1.0 - gamma) * n)


def oracle_meb_outliers_bruteforce(P, gamma: float):
    """``(radius, subset)``: the optimal ball covering ``ceil((1-gamma) n)``
    points, found by enumerating every subset of that size."""
    X = _arr(P)
    n = X.shape[0]
    keep = _keep_count(n, gamma)
    if n > 15 or n - keep > 3:
        raise InputError("brute force limited to n <= 15 and at most 3 outliers")
    best, arg = math.inf, None
    for S in itertools.combinations(range(n), keep):
        r = exact_meb_radius(X[list(S)])
        if r < best - 1e-15:
            best, arg = r, S
    return best, np.array(arg, dtype=np.int64)


def oracle_kcenter_bruteforce(P, k: int, gamma: float):
    """``(radius, inliers, labels)`` for k-center with outliers, ``n <= 10``,
    ``k <= 2``: every outlier subset times every split into ``k`` clusters."""
    X = _arr(P)
    n = X.shape[0]
    if n > 10 or k not in (1, 2):
        raise InputError("k-center brute force limited to n <= 10 and k <= 2")
    keep = _keep_count(n, gamma)
    cache: dict = {}

    def rad(idx: tuple) -> float:
        if not idx:
            return 0.0
        if idx not in cache:
            cache[idx] = exact_meb_radius(X[list(idx)])
        return cache[idx]

    best, arg = math.inf, None
    for S in itertools.combinations(range(n), keep):
        if k == 1:
            r = rad(S)
            if r < best:
                best, arg = r, (S, np.zeros(keep, dtype=np.int64))
            continue
        m = len(S)
        # first point fixed in cluster 0 to skip mirrored splits
        for mask in range(2 ** (m - 1)):
            lab = np.array([0] + [(mask >> j) & 1 for j in range(m - 1)], dtype=np.int64)
            A = tuple(s for s, l in zip(S, lab) if l == 0)
            B = tuple(s for s, l in zip(S, lab) if l == 1)
            r = max(rad(A), rad(B))
            if r < best:
                best, arg = r, (S, lab)
    return best, np.array(arg[0], dtype=np.int64), arg[1]


def _affine_min(S: np.ndarray) -> np.ndarray:
    """Weights (summing to one) of the point of minimum norm in the affine
    hull of the rows of ``S``."""
    m = S.shape[0]
    K = np.zeros((m + 1, m + 1))
    K[:m, :m] = S @ S.T
    K[:m, m] = K[m, :m] = 1.0
    rhs = np.zeros(m + 1)
    rhs[m] = 1.0
    return np.linalg.lstsq(K, rhs, rcond=None)[0][:m]


def _min_norm_point(lmo, eps: float, max_iter: int):
    """Wolfe's minimum-norm-point method over a polytope given only by its
    linear minimization oracle ``lmo(x) -> (vertex, key, min <p, x>)``.

    Returns ``(cert, ||x||, x)``: ``x`` lies in the polytope and ``cert`` is
    the best value ``min <p, x> / ||x||`` seen, so ``cert <= dist <= ||x||``.
    The corral stays small (at most ``d + 1`` vertices), and each minor cycle
    solves the affine subproblem exactly, so degenerate faces do not slow it
    down the way plain Frank-Wolfe steps do.
    """
    q, key, _ = lmo(None)
    S, keys, lam = [q], [key], np.ones(1)
    x = q.copy()
    cert = -math.inf
    stall = 0
    for _ in range(int(max_iter)):
        xx = float(x @ x)
        if xx == 0.0:
            return 0.0, 0.0, x
        nx = math.sqrt(xx)
        q, key, val = lmo(x)
        cert = max(cert, val / nx)
        if cert >= (1.0 - eps) * nx or key in keys or stall > 8:
            break
        S.append(q)
        keys.append(key)
        lam = np.append(lam, 0.0)
        while True:
            M = np.array(S)
            alpha = _affine_min(M)
            if np.all(alpha > 1e-14):
                lam = alpha
                break
            neg = alpha <= 1e-14
            theta = float(np.min(lam[neg] / np.maximum(lam[neg] - alpha[neg], 1e-300)))
            lam = (1.0 - theta) * lam + theta * alpha
            keep = lam > 1e-14
            keep[int(np.argmax(lam))] = True
            S = [S[i] for i in np.flatnonzero(keep)]
            keys = [keys[i] for i in np.flatnonzero(keep)]
            lam = lam[keep] / lam[keep].sum()
            if len(S) == 1:
                break
        x_new = lam @ np.array(S)
        stall = stall + 1 if float(x_new @ x_new) >= xx * (1.0 - 1e-15) else 0
        x = x_new
    nx = math.sqrt(float(x @ x))
    # rounding can push the certificate a few ulps past the norm
    return min(cert, nx), nx, x


def oracle_polytope_bracket(P, eps: float = 1e-9, max_iter: int = 100_000):
    """``(lower, upper, v)`` bracketing the distance from the origin to
    ``conv(P)`` (minimum-norm-point method; each step is one pass over P)."""
    X = _arr(P)
    sq = np.einsum("ij,ij->i", X, X)

    def lmo(x):
        if x is None:
            i = int(np.argmin(sq))
            return X[i].copy(), i, 0.0
        pr = X @ x
        i = int(np.argmin(pr))
        return X[i].copy(), i, float(pr[i])

    cert, nv, v = _min_norm_point(lmo, eps, max_iter)
    return float(cert), nv, v


def oracle_two_class_bracket(P1, P2, eps: float = 1e-9, max_iter: int = 100_000):
    """``(lower, upper, v)`` bracketing the distance between ``conv(P1)``
    and ``conv(P2)``.

    Minimum-norm point of the Minkowski difference ``P1 - P2``; its linear
    minimization pairs the lowest point of ``P1`` with the highest point of
    ``P2``, so the ``|P1| |P2|`` differences are never formed.
    """
    A, B = _arr(P1), _arr(P2)
    if A.shape[1] != B.shape[1]:
        raise InputError("class dimensions differ")
    u0 = A.mean(axis=0) - B.mean(axis=0)

    def lmo(x):
        x = u0 if x is None else x
        pa, pb = A @ x, B @ x
        a, b = int(np.argmin(pa)), int(np.argmax(pb))
        return A[a] - B[b], (a, b), float(pa[a] - pb[b])

    cert, nv, v = _min_norm_point(lmo, eps, max_iter)
    return max(cert, 0.0), nv, v


def _two_class(A, B, eps, max_iter):
    """Gilbert iterations with away steps on the Minkowski difference.  Kept
    as an independent check on :func:`oracle_two_class_bracket`."""
    i = int(np.argmin(np.einsum("ij,ij->i", A, A)))
    j = int(np.argmax(np.einsum("ij,ij->i", B, B)))
    w = {(i, j): 1.0}
    v = A[i] - B[j]
    cert = -math.inf
    for _ in range(int(max_iter)):
        vv = float(v @ v)
        if vv == 0.0:
            return 0.0, 0.0, v
        nv = math.sqrt(vv)
        pa = A @ v
        pb = B @ v
        a, b = int(np.argmin(pa)), int(np.argmax(pb))
        s_fw = float(pa[a] - pb[b])
        cert = max(cert, s_fw / nv)
        if cert >= (1.0 - eps) * nv:
            break
        keys = list(w)
        proj = [float(pa[x] - pb[y]) for x, y in keys]
        k = int(np.argmax(proj))
        g_fw = vv - s_fw
        g_aw = proj[k] - vv
        if g_fw >= g_aw:
            dvec = (A[a] - B[b]) - v
            dd = float(dvec @ dvec)
            alpha = min(1.0, g_fw / dd) if dd > 0 else 0.0
            for key in keys:
                w[key] *= 1.0 - alpha
            w[(a, b)] = w.get((a, b), 0.0) + alpha
        else:
            x, y = keys[k]
            dvec = v - (A[x] - B[y])
            dd = float(dvec @ dvec)
            wk = w[keys[k]]
            amax = wk / (1.0 - wk) if wk < 1.0 else math.inf
            alpha = min(amax, g_aw / dd) if dd > 0 else amax
            for key in keys:
                w[key] *= 1.0 + alpha
            w[keys[k]] -= alpha
            if alpha == amax:
                del w[keys[k]]
        w = {key: val for key, val in w.items() if val > 0.0}
        ia = np.array([key[0] for key in w])
        ib = np.array([key[1] for key in w])
        wt = np.array(list(w.values()))
        v = wt @ A[ia] - wt @ B[ib]
    return max(cert, 0.0), math.sqrt(float(v @ v)), v
