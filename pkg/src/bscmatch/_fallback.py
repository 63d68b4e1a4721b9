"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Same signatures and the same per-element arithmetic, so histogram counts and
argmin indices agree with the compiled build; chi-square sums may differ in
the last bits because numpy reduces pairwise.
"""
import numpy as np

TWO_PI = 6.283185307179586
_ROW_CHUNK = 64


def sc_histograms(pts, edges_sq, n_theta, ref_angles):
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    edges_sq = np.asarray(edges_sq, dtype=np.float64)
    ref_angles = np.asarray(ref_angles, dtype=np.float64)
    m = len(pts)
    n_r = len(edges_sq) + 1
    n_bins = n_r * n_theta
    out = np.zeros((m, n_bins), dtype=np.int64)
    x, y = pts[:, 0], pts[:, 1]
    for lo in range(0, m, _ROW_CHUNK):
        hi = min(lo + _ROW_CHUNK, m)
        dx = x[None, :] - x[lo:hi, None]
        dy = y[None, :] - y[lo:hi, None]
        r2 = dx * dx + dy * dy
        k = np.searchsorted(edges_sq, r2, side="right")
        theta = np.arctan2(dy, dx)
        theta = np.where(theta < 0, theta + TWO_PI, theta)
        if len(ref_angles):
            theta = theta - ref_angles[lo:hi, None]
            theta = np.where(theta < 0, theta + TWO_PI, theta)
            theta = np.where(theta >= TWO_PI, theta - TWO_PI, theta)
        a = np.floor(theta * n_theta / TWO_PI).astype(np.int64)
        a[(a >= n_theta) | (a < 0)] = 0
        flat = k * n_theta + a
        rows = np.arange(hi - lo)
        flat[rows, rows + lo] = -1  # self pair
        for r in rows:
            f = flat[r]
            out[lo + r] = np.bincount(f[f >= 0], minlength=n_bins)
    return out


def chi2_matrix(hp, hq):
    hp = np.asarray(hp, dtype=np.float64)
    hq = np.asarray(hq, dtype=np.float64)
    out = np.empty((len(hp), len(hq)))
    for lo in range(0, len(hp), _ROW_CHUNK):
        a = hp[lo:lo + _ROW_CHUNK, None, :]
        b = hq[None, :, :]
        t = a + b
        d = a - b
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(t > 0, d * d / t, 0.0)
        out[lo:lo + _ROW_CHUNK] = 0.5 * terms.sum(axis=2)
    return out


def row_argmin(cost):
    cost = np.asarray(cost, dtype=np.float64)
    idx = np.argmin(cost, axis=1).astype(np.int64)
    return idx, cost[np.arange(len(cost)), idx]


def col_argmin(cost):
    cost = np.asarray(cost, dtype=np.float64)
    idx = np.argmin(cost, axis=0).astype(np.int64)
    return idx, cost[idx, np.arange(cost.shape[1])]


def hungarian(cost):
    """Same shortest-augmenting-path scheme as the compiled version, with the
    column scan vectorised."""
    cost = np.asarray(cost, dtype=np.float64)
    n = len(cost)
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used[1:]
            cur = cost[i0 - 1] - u[i0] - v[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            masked = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(masked)) + 1
            delta = masked[j1 - 1]
            u[p[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    perm = np.empty(n, dtype=np.int64)
    perm[p[1:] - 1] = np.arange(n)
    return perm
