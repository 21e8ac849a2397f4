"""Hot numeric loops, each in a numba and a pure-numpy flavour.

The public names at the bottom of the module are bound to one flavour at
import time (see :mod:`subgeo._accel`).  Both flavours are always importable as
``NUMBA_KERNELS`` / ``NUMPY_KERNELS`` so the benchmark can compare them side
by side.

All kernels expect C-contiguous float64 arrays and never draw random numbers;
randomness stays in the callers so that both flavours consume identical
streams.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import BACKEND, USE_NUMBA, njit

__all__ = [
    "BACKEND",
    "sq_dists",
    "min_sq_dists",
    "line_sq_dists",
    "bc_center",
    "meb_fw_away",
    "polytope_distance",
    "NUMBA_KERNELS",
    "NUMPY_KERNELS",
]


# ---------------------------------------------------------------------------
# squared distances


def _sq_dists_np(P, c):
    diff = P - c
    return np.einsum("ij,ij->i", diff, diff)


@njit
def _sq_dists_nb(P, c):
    n, d = P.shape
    out = np.empty(n)
    for i in range(n):
        s = 0.0
        for k in range(d):
            t = P[i, k] - c[k]
            s += t * t
        out[i] = s
    return out


def _min_sq_dists_np(P, C):
    best = _sq_dists_np(P, C[0])
    for j in range(1, C.shape[0]):
        np.minimum(best, _sq_dists_np(P, C[j]), out=best)
    return best


@njit
def _min_sq_dists_nb(P, C):
    n, d = P.shape
    m = C.shape[0]
    out = np.empty(n)
    for i in range(n):
        best = np.inf
        for j in range(m):
            s = 0.0
            for k in range(d):
                t = P[i, k] - C[j, k]
                s += t * t
            if s < best:
                best = s
        out[i] = best
    return out


def _line_sq_dists_np(P, anchors, dirs):
    """Squared distances from every point to each line ``anchor + t*dir``.

    ``anchors`` and ``dirs`` are (m, d); ``dirs`` rows must be unit length.
    Returns an (m, n) array.
    """
    out = np.empty((anchors.shape[0], P.shape[0]))
    for j in range(anchors.shape[0]):
        R = P - anchors[j]
        # residual form: |r|^2 - t^2 cancels badly for points near the line
        R -= np.outer(R @ dirs[j], dirs[j])
        out[j] = np.einsum("ij,ij->i", R, R)
    return out


@njit
def _line_sq_dists_nb(P, anchors, dirs):
    n, d = P.shape
    m = anchors.shape[0]
    out = np.empty((m, n))
    for j in range(m):
        for i in range(n):
            rt = 0.0
            for k in range(d):
                rt += (P[i, k] - anchors[j, k]) * dirs[j, k]
            rr = 0.0
            for k in range(d):
                r = P[i, k] - anchors[j, k] - rt * dirs[j, k]
                rr += r * r
            out[j, i] = rr
    return out


# ---------------------------------------------------------------------------
# Badoiu-Clarkson approximate center: c <- c + (p_far - c) / (i + 1)


def _bc_center_np(T, iters):
    c = T[0].copy()
    for i in range(1, iters + 1):
        diff = T - c
        far = int(np.argmax(np.einsum("ij,ij->i", diff, diff)))
        c += (T[far] - c) / (i + 1)
    return c


@njit
def _bc_center_nb(T, iters):
    m, d = T.shape
    c = T[0].copy()
    for i in range(1, iters + 1):
        best = -1.0
        far = 0
        for j in range(m):
            s = 0.0
            for k in range(d):
                t = T[j, k] - c[k]
                s += t * t
            if s > best:
                best = s
                far = j
        step = 1.0 / (i + 1)
        for k in range(d):
            c[k] += (T[far, k] - c[k]) * step
    return c


# ---------------------------------------------------------------------------
# reference MEB: Frank-Wolfe with away steps on the dual
#   maximize  sum_i w_i |p_i|^2 - |sum_i w_i p_i|^2   over the simplex
# The dual value is a lower bound on Rad(P)^2; the max distance from the
# current center is an upper bound.  Converges linearly.


def _meb_init_weights(P, sq):
    n = P.shape[0]
    w = np.zeros(n)
    if n == 1:
        w[0] = 1.0
        return w
    a = int(np.argmax(sq(P, P[0])))
    b = int(np.argmax(sq(P, P[a])))
    if a == b:
        w[a] = 1.0
    else:
        w[a] = 0.5
        w[b] = 0.5
    return w


def _meb_fw_away_np(P, tol, max_iter):
    w = _meb_init_weights(P, _sq_dists_np)
    norms = np.einsum("ij,ij->i", P, P)
    it = 0
    while True:
        c = w @ P
        phi = float(w @ norms - c @ c)
        D = _sq_dists_np(P, c)
        j = int(np.argmax(D))
        ub = float(D[j])
        if ub <= phi * (1.0 + tol) ** 2 or it >= max_iter or ub == 0.0:
            break
        active = w > 0.0
        Da = np.where(active, D, np.inf)
        k = int(np.argmin(Da))
        g_fw = ub - phi
        g_aw = phi - float(D[k])
        if g_fw >= g_aw:
            alpha = min(1.0, g_fw / (2.0 * ub))
            w *= 1.0 - alpha
            w[j] += alpha
        else:
            wk = w[k]
            amax = wk / (1.0 - wk) if wk < 1.0 else np.inf
            alpha = min(amax, g_aw / (2.0 * D[k])) if D[k] > 0 else amax
            w *= 1.0 + alpha
            w[k] -= alpha
            if alpha == amax:
                w[k] = 0.0
        it += 1
    return c, math.sqrt(ub), math.sqrt(max(phi, 0.0)), it


@njit
def _meb_fw_away_nb(P, tol, max_iter):
    n, d = P.shape
    w = np.zeros(n)
    if n == 1:
        w[0] = 1.0
    else:
        a = np.argmax(_sq_dists_nb(P, P[0].copy()))
        b = np.argmax(_sq_dists_nb(P, P[a].copy()))
        if a == b:
            w[a] = 1.0
        else:
            w[a] = 0.5
            w[b] = 0.5
    norms = np.empty(n)
    for i in range(n):
        s = 0.0
        for k in range(d):
            s += P[i, k] * P[i, k]
        norms[i] = s
    it = 0
    c = np.zeros(d)
    ub = 0.0
    phi = 0.0
    while True:
        c[:] = 0.0
        wa = 0.0
        for i in range(n):
            if w[i] != 0.0:
                wa += w[i] * norms[i]
                for k in range(d):
                    c[k] += w[i] * P[i, k]
        cc = 0.0
        for k in range(d):
            cc += c[k] * c[k]
        phi = wa - cc
        D = _sq_dists_nb(P, c)
        j = 0
        ub = -1.0
        kk = -1
        lo = np.inf
        for i in range(n):
            if D[i] > ub:
                ub = D[i]
                j = i
            if w[i] > 0.0 and D[i] < lo:
                lo = D[i]
                kk = i
        if ub <= phi * (1.0 + tol) ** 2 or it >= max_iter or ub == 0.0:
            break
        g_fw = ub - phi
        g_aw = phi - lo
        if g_fw >= g_aw:
            alpha = min(1.0, g_fw / (2.0 * ub))
            for i in range(n):
                w[i] *= 1.0 - alpha
            w[j] += alpha
        else:
            wk = w[kk]
            amax = wk / (1.0 - wk) if wk < 1.0 else np.inf
            alpha = min(amax, g_aw / (2.0 * lo)) if lo > 0 else amax
            for i in range(n):
                w[i] *= 1.0 + alpha
            w[kk] -= alpha
            if alpha == amax:
                w[kk] = 0.0
        it += 1
    return c, math.sqrt(ub), math.sqrt(max(phi, 0.0)), it


# ---------------------------------------------------------------------------
# polytope distance (Gilbert), optionally with away steps.
# Returns v, iteration count, final certificate and (optionally) the
# per-iteration |v| and certificate histories.


def _polytope_np(P, eps, max_iter, away, record):
    n = P.shape[0]
    sq = np.einsum("ij,ij->i", P, P)
    start = int(np.argmin(sq))
    v = P[start].copy()
    w = np.zeros(n)
    w[start] = 1.0
    hn = []
    hc = []
    it = 0
    cert = 0.0
    while True:
        vv = float(v @ v)
        nv = math.sqrt(vv)
        proj = P @ v
        j = int(np.argmin(proj))
        cert = float(proj[j]) / nv if nv > 0 else -np.inf
        if record:
            hn.append(nv)
            hc.append(cert)
        if nv == 0.0 or cert >= (1.0 - eps) * nv or it >= max_iter:
            break
        g_fw = vv - proj[j]
        k = -1
        g_aw = -1.0
        if away:
            pa = np.where(w > 0.0, proj, -np.inf)
            k = int(np.argmax(pa))
            g_aw = float(pa[k]) - vv
        if not away or g_fw >= g_aw:
            d = P[j] - v
            dd = float(d @ d)
            alpha = min(1.0, g_fw / dd) if dd > 0 else 0.0
            v = v + alpha * d
            if away:
                w *= 1.0 - alpha
                w[j] += alpha
        else:
            d = v - P[k]
            dd = float(d @ d)
            wk = w[k]
            amax = wk / (1.0 - wk) if wk < 1.0 else np.inf
            alpha = min(amax, g_aw / dd) if dd > 0 else amax
            w *= 1.0 + alpha
            w[k] -= alpha
            if alpha == amax:
                w[k] = 0.0
            v = w @ P
        it += 1
    return v, it, cert, np.array(hn), np.array(hc)


@njit
def _polytope_nb(P, eps, max_iter, away, record):
    n, d = P.shape
    start = 0
    best = np.inf
    for i in range(n):
        s = 0.0
        for k in range(d):
            s += P[i, k] * P[i, k]
        if s < best:
            best = s
            start = i
    v = P[start].copy()
    w = np.zeros(n)
    w[start] = 1.0
    cap = max_iter + 1 if record else 1
    hn = np.empty(cap)
    hc = np.empty(cap)
    it = 0
    cert = 0.0
    proj = np.empty(n)
    while True:
        vv = 0.0
        for k in range(d):
            vv += v[k] * v[k]
        nv = math.sqrt(vv)
        j = 0
        pmin = np.inf
        kk = -1
        pmax = -np.inf
        for i in range(n):
            s = 0.0
            for k in range(d):
                s += P[i, k] * v[k]
            proj[i] = s
            if s < pmin:
                pmin = s
                j = i
            if away and w[i] > 0.0 and s > pmax:
                pmax = s
                kk = i
        cert = pmin / nv if nv > 0 else -np.inf
        if record:
            hn[it] = nv
            hc[it] = cert
        if nv == 0.0 or cert >= (1.0 - eps) * nv or it >= max_iter:
            break
        g_fw = vv - pmin
        g_aw = pmax - vv if away else -1.0
        if (not away) or g_fw >= g_aw:
            dd = 0.0
            for k in range(d):
                t = P[j, k] - v[k]
                dd += t * t
            alpha = min(1.0, g_fw / dd) if dd > 0 else 0.0
            for k in range(d):
                v[k] += alpha * (P[j, k] - v[k])
            if away:
                for i in range(n):
                    w[i] *= 1.0 - alpha
                w[j] += alpha
        else:
            dd = 0.0
            for k in range(d):
                t = v[k] - P[kk, k]
                dd += t * t
            wk = w[kk]
            amax = wk / (1.0 - wk) if wk < 1.0 else np.inf
            alpha = min(amax, g_aw / dd) if dd > 0 else amax
            for i in range(n):
                w[i] *= 1.0 + alpha
            w[kk] -= alpha
            if alpha == amax:
                w[kk] = 0.0
            v[:] = 0.0
            for i in range(n):
                if w[i] != 0.0:
                    for k in range(d):
                        v[k] += w[i] * P[i, k]
        it += 1
    if record:
        return v, it, cert, hn[: it + 1].copy(), hc[: it + 1].copy()
    return v, it, cert, hn[:0].copy(), hc[:0].copy()


NUMPY_KERNELS = {
    "sq_dists": _sq_dists_np,
    "min_sq_dists": _min_sq_dists_np,
    "line_sq_dists": _line_sq_dists_np,
    "bc_center": _bc_center_np,
    "meb_fw_away": _meb_fw_away_np,
    "polytope_distance": _polytope_np,
}

NUMBA_KERNELS = {
    "sq_dists": _sq_dists_nb,
    "min_sq_dists": _min_sq_dists_nb,
    "line_sq_dists": _line_sq_dists_nb,
    "bc_center": _bc_center_nb,
    "meb_fw_away": _meb_fw_away_nb,
    "polytope_distance": _polytope_nb,
}

_ACTIVE = NUMBA_KERNELS if USE_NUMBA else NUMPY_KERNELS

sq_dists = _ACTIVE["sq_dists"]
min_sq_dists = _ACTIVE["min_sq_dists"]
line_sq_dists = _ACTIVE["line_sq_dists"]
bc_center = _ACTIVE["bc_center"]
meb_fw_away = _ACTIVE["meb_fw_away"]
polytope_distance = _ACTIVE["polytope_distance"]
