"""Hot numeric kernels with a numba path and a pure-numpy fallback.

Set ``PROPDMG_DISABLE_NUMBA=1`` before import to force the numpy versions.
Both variants share the same random stream (a 31-bit LCG driven from an
integer seed), so they produce the same results up to floating point
summation order.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("PROPDMG_DISABLE_NUMBA", "").strip().lower() in (
    "",
    "0",
    "false",
    "no",
)

_LCG_MOD = 2147483648  # 2**31


def _lcg_shuffle_py(idx, m, state):
    # in-place Fisher-Yates over idx[:m]; the state stays below 2**31 so
    # products fit in int64
    for j in range(m - 1, 0, -1):
        state = (state * 1103515245 + 12345) % _LCG_MOD
        r = state % (j + 1)
        tmp = idx[j]
        idx[j] = idx[r]
        idx[r] = tmp
    return state


# ---------------------------------------------------------------------------
# linear SVM, dual coordinate descent with hinge loss
#
# Shrinking follows LIBLINEAR: a variable at a bound whose gradient points
# outward beyond last sweep's projected-gradient extremes is set aside.  When
# the active set meets the tolerance, everything is reactivated and the
# solver only stops once a full sweep passes.


def _dual_cd_numpy(X, y, C, tol, max_iter, seed):
    n, d = X.shape
    w = np.zeros(d)
    alpha = np.zeros(n)
    qii = np.einsum("ij,ij->i", X, X)
    idx = np.arange(n)
    active = n
    state = int(seed) % _LCG_MOD
    pg_max_old, pg_min_old = np.inf, -np.inf
    gap = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        state = _lcg_shuffle_py(idx, active, state)
        pg_max = -np.inf
        pg_min = np.inf
        s = 0
        while s < active:
            i = idx[s]
            if qii[i] <= 0.0:
                s += 1
                continue
            xi = X[i]
            g = y[i] * xi.dot(w) - 1.0
            a = alpha[i]
            pg = 0.0
            if a <= 0.0:
                if g > pg_max_old:
                    active -= 1
                    idx[s], idx[active] = idx[active], idx[s]
                    continue
                if g < 0.0:
                    pg = g
            elif a >= C:
                if g < pg_min_old:
                    active -= 1
                    idx[s], idx[active] = idx[active], idx[s]
                    continue
                if g > 0.0:
                    pg = g
            else:
                pg = g
            pg_max = max(pg_max, pg)
            pg_min = min(pg_min, pg)
            if abs(pg) > 1e-12:
                new = min(max(a - g / qii[i], 0.0), C)
                w += (new - a) * y[i] * xi
                alpha[i] = new
            s += 1
        gap = pg_max - pg_min
        if gap <= tol:
            if active == n:
                break
            active = n
            pg_max_old, pg_min_old = np.inf, -np.inf
            continue
        pg_max_old = pg_max if pg_max > 0.0 else np.inf
        pg_min_old = pg_min if pg_min < 0.0 else -np.inf
    return w, alpha, it, gap


def _dual_cd_loop(X, y, C, tol, max_iter, seed):
    n, d = X.shape
    w = np.zeros(d)
    alpha = np.zeros(n)
    qii = np.zeros(n)
    for i in range(n):
        s = 0.0
        for j in range(d):
            s += X[i, j] * X[i, j]
        qii[i] = s
    idx = np.arange(n)
    active = n
    state = seed % 2147483648
    pg_max_old = np.inf
    pg_min_old = -np.inf
    gap = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        state = _lcg_shuffle_nb(idx, active, state)
        pg_max = -np.inf
        pg_min = np.inf
        t = 0
        while t < active:
            i = idx[t]
            if qii[i] <= 0.0:
                t += 1
                continue
            s = 0.0
            for j in range(d):
                s += X[i, j] * w[j]
            g = y[i] * s - 1.0
            a = alpha[i]
            pg = 0.0
            if a <= 0.0:
                if g > pg_max_old:
                    active -= 1
                    tmp = idx[t]
                    idx[t] = idx[active]
                    idx[active] = tmp
                    continue
                if g < 0.0:
                    pg = g
            elif a >= C:
                if g < pg_min_old:
                    active -= 1
                    tmp = idx[t]
                    idx[t] = idx[active]
                    idx[active] = tmp
                    continue
                if g > 0.0:
                    pg = g
            else:
                pg = g
            if pg > pg_max:
                pg_max = pg
            if pg < pg_min:
                pg_min = pg
            if abs(pg) > 1e-12:
                new = min(max(a - g / qii[i], 0.0), C)
                step = (new - a) * y[i]
                for j in range(d):
                    w[j] += step * X[i, j]
                alpha[i] = new
            t += 1
        gap = pg_max - pg_min
        if gap <= tol:
            if active == n:
                break
            active = n
            pg_max_old = np.inf
            pg_min_old = -np.inf
            continue
        pg_max_old = pg_max if pg_max > 0.0 else np.inf
        pg_min_old = pg_min if pg_min < 0.0 else -np.inf
    return w, alpha, it, gap


# ---------------------------------------------------------------------------
# k-means pieces


def _kmeanspp_numpy(X, k, uniforms):
    n = X.shape[0]
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = min(int(uniforms[0] * n), n - 1)
    d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    taken = np.zeros(n, dtype=np.bool_)
    taken[chosen[0]] = True
    for c in range(1, k):
        total = d2.sum()
        if total > 0.0:
            cum = np.cumsum(d2)
            pick = int(np.searchsorted(cum, uniforms[c] * total, side="right"))
            pick = min(pick, n - 1)
            while d2[pick] <= 0.0 and pick > 0:
                pick -= 1
        else:
            free = np.flatnonzero(~taken)
            pick = int(free[min(int(uniforms[c] * free.size), free.size - 1)])
        chosen[c] = pick
        taken[pick] = True
        np.minimum(d2, ((X - X[pick]) ** 2).sum(axis=1), out=d2)
    return chosen


def _kmeanspp_loop(X, k, uniforms):
    n, d = X.shape
    chosen = np.empty(k, dtype=np.int64)
    first = int(uniforms[0] * n)
    if first > n - 1:
        first = n - 1
    chosen[0] = first
    d2 = np.empty(n)
    taken = np.zeros(n, dtype=np.bool_)
    taken[first] = True
    for i in range(n):
        s = 0.0
        for j in range(d):
            diff = X[i, j] - X[first, j]
            s += diff * diff
        d2[i] = s
    for c in range(1, k):
        total = 0.0
        for i in range(n):
            total += d2[i]
        pick = -1
        if total > 0.0:
            target = uniforms[c] * total
            acc = 0.0
            for i in range(n):
                acc += d2[i]
                if acc > target:
                    pick = i
                    break
            if pick < 0:
                pick = n - 1
            while d2[pick] <= 0.0 and pick > 0:
                pick -= 1
        else:
            nfree = 0
            for i in range(n):
                if not taken[i]:
                    nfree += 1
            r = int(uniforms[c] * nfree)
            if r > nfree - 1:
                r = nfree - 1
            for i in range(n):
                if not taken[i]:
                    if r == 0:
                        pick = i
                        break
                    r -= 1
        chosen[c] = pick
        taken[pick] = True
        for i in range(n):
            s = 0.0
            for j in range(d):
                diff = X[i, j] - X[pick, j]
                s += diff * diff
            if s < d2[i]:
                d2[i] = s
    return chosen


def _assign_numpy(X, centroids, chunk=4096):
    n = X.shape[0]
    labels = np.empty(n, dtype=np.int64)
    cn = (centroids**2).sum(axis=1)
    for start in range(0, n, chunk):
        block = X[start : start + chunk]
        d2 = cn[None, :] - 2.0 * block @ centroids.T
        labels[start : start + chunk] = np.argmin(d2, axis=1)
    return labels


def _assign_loop(X, centroids):
    n = X.shape[0]
    k = centroids.shape[0]
    cn = np.empty(k)
    for c in range(k):
        s = 0.0
        for j in range(centroids.shape[1]):
            s += centroids[c, j] * centroids[c, j]
        cn[c] = s
    labels = np.empty(n, dtype=np.int64)
    chunk = 4096
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        cross = np.dot(X[start:stop], centroids.T)
        for r in range(stop - start):
            best = 0
            best_v = cn[0] - 2.0 * cross[r, 0]
            for c in range(1, k):
                v = cn[c] - 2.0 * cross[r, c]
                if v < best_v:
                    best_v = v
                    best = c
            labels[start + r] = best
    return labels


def _update_numpy(X, labels, k):
    n, d = X.shape
    counts = np.bincount(labels, minlength=k).astype(np.int64)
    sums = np.zeros((k, d))
    np.add.at(sums, labels, X)
    lo = np.full((k, d), np.inf)
    hi = np.full((k, d), -np.inf)
    np.minimum.at(lo, labels, X)
    np.maximum.at(hi, labels, X)
    nz = counts > 0
    centroids = np.zeros((k, d))
    centroids[nz] = sums[nz] / counts[nz, None]
    centroids[nz] = np.clip(centroids[nz], lo[nz], hi[nz])
    inertia = float(((X - centroids[labels]) ** 2).sum())
    return centroids, counts, inertia


def _update_loop(X, labels, k):
    n, d = X.shape
    counts = np.zeros(k, dtype=np.int64)
    sums = np.zeros((k, d))
    lo = np.full((k, d), np.inf)
    hi = np.full((k, d), -np.inf)
    for i in range(n):
        c = labels[i]
        counts[c] += 1
        for j in range(d):
            v = X[i, j]
            sums[c, j] += v
            if v < lo[c, j]:
                lo[c, j] = v
            if v > hi[c, j]:
                hi[c, j] = v
    centroids = np.zeros((k, d))
    for c in range(k):
        if counts[c] > 0:
            for j in range(d):
                m = sums[c, j] / counts[c]
                if m < lo[c, j]:
                    m = lo[c, j]
                if m > hi[c, j]:
                    m = hi[c, j]
                centroids[c, j] = m
    inertia = 0.0
    for i in range(n):
        c = labels[i]
        for j in range(d):
            diff = X[i, j] - centroids[c, j]
            inertia += diff * diff
    return centroids, counts, inertia


if HAVE_NUMBA:
    _lcg_shuffle_nb = numba.njit(cache=True)(_lcg_shuffle_py)
    dual_cd_numba = numba.njit(cache=True)(_dual_cd_loop)
    kmeanspp_numba = numba.njit(cache=True)(_kmeanspp_loop)
    assign_numba = numba.njit(cache=True)(_assign_loop)
    update_numba = numba.njit(cache=True)(_update_loop)
else:  # pragma: no cover
    dual_cd_numba = kmeanspp_numba = assign_numba = update_numba = None

dual_cd_numpy = _dual_cd_numpy
kmeanspp_numpy = _kmeanspp_numpy
assign_numpy = _assign_numpy
update_numpy = _update_numpy


def dual_cd(X, y, C, tol, max_iter, seed):
    """Solve the hinge-loss SVM dual; returns ``(w, alpha, iterations, pg_gap)``."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if USE_NUMBA:
        return dual_cd_numba(X, y, float(C), float(tol), int(max_iter), int(seed))
    return dual_cd_numpy(X, y, float(C), float(tol), int(max_iter), int(seed))


def kmeanspp(X, k, uniforms):
    X = np.ascontiguousarray(X, dtype=np.float64)
    uniforms = np.ascontiguousarray(uniforms, dtype=np.float64)
    if USE_NUMBA:
        return kmeanspp_numba(X, int(k), uniforms)
    return kmeanspp_numpy(X, int(k), uniforms)


def assign(X, centroids):
    X = np.ascontiguousarray(X, dtype=np.float64)
    centroids = np.ascontiguousarray(centroids, dtype=np.float64)
    if USE_NUMBA:
        return assign_numba(X, centroids)
    return assign_numpy(X, centroids)


def update(X, labels, k):
    X = np.ascontiguousarray(X, dtype=np.float64)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    if USE_NUMBA:
        return update_numba(X, labels, int(k))
    return update_numpy(X, labels, int(k))


def backend():
    return "numba" if USE_NUMBA else "numpy"
