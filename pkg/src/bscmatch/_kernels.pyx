# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Must stay numerically in step with ``_fallback``."""
import numpy as np

from libc.math cimport atan2, floor, INFINITY

cdef double TWO_PI = 6.283185307179586


def sc_histograms(const double[:, ::1] pts, const double[::1] edges_sq,
                  int n_theta, const double[::1] ref_angles):
    """Log-polar counts for every point against all other points.

    ``edges_sq`` holds the squared interior radial edges (ascending); a pair at
    squared distance ``r2`` lands in radial bin ``#{e : e <= r2}``, which clamps
    out-of-range radii to the first/last bin. ``ref_angles`` is empty for the
    global +x reference.
    """
    cdef Py_ssize_t m = pts.shape[0]
    cdef Py_ssize_t n_edges = edges_sq.shape[0]
    cdef Py_ssize_t n_r = n_edges + 1
    cdef bint rotate = ref_angles.shape[0] > 0
    out = np.zeros((m, n_r * n_theta), dtype=np.int64)
    cdef long long[:, ::1] h = out
    cdef Py_ssize_t i, j, k
    cdef long a
    cdef double dx, dy, r2, theta

    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            dx = pts[j, 0] - pts[i, 0]
            dy = pts[j, 1] - pts[i, 1]
            r2 = dx * dx + dy * dy
            k = 0
            while k < n_edges and r2 >= edges_sq[k]:
                k += 1
            theta = atan2(dy, dx)
            if theta < 0:
                theta = theta + TWO_PI
            if rotate:
                theta = theta - ref_angles[i]
                if theta < 0:
                    theta = theta + TWO_PI
                if theta >= TWO_PI:
                    theta = theta - TWO_PI
            a = <long>floor(theta * n_theta / TWO_PI)
            if a >= n_theta or a < 0:
                a = 0
            h[i, k * n_theta + a] += 1
    return out


def chi2_matrix(const double[:, ::1] hp, const double[:, ::1] hq):
    """Half chi-square distance between every row of ``hp`` and of ``hq``."""
    cdef Py_ssize_t m = hp.shape[0], n = hq.shape[0], nb = hp.shape[1]
    out = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] c = out
    cdef Py_ssize_t i, j, b
    cdef double s, a, g, d, t
    for i in range(m):
        for j in range(n):
            s = 0.0
            for b in range(nb):
                a = hp[i, b]
                g = hq[j, b]
                t = a + g
                d = a - g
                # empty bins have d == 0; dividing by 1 keeps the loop branch-free
                s += d * d / (t if t > 0 else 1.0)
            c[i, j] = 0.5 * s
    return out


def row_argmin(const double[:, ::1] cost):
    """Per-row minimum and its lowest column index."""
    cdef Py_ssize_t m = cost.shape[0], n = cost.shape[1], i, j, best
    idx = np.empty(m, dtype=np.int64)
    val = np.empty(m, dtype=np.float64)
    cdef long long[::1] iv = idx
    cdef double[::1] vv = val
    cdef double v
    for i in range(m):
        best = 0
        v = cost[i, 0]
        for j in range(1, n):
            if cost[i, j] < v:
                v = cost[i, j]
                best = j
        iv[i] = best
        vv[i] = v
    return idx, val


def col_argmin(const double[:, ::1] cost):
    """Per-column minimum and its lowest row index (row-major sweep)."""
    cdef Py_ssize_t m = cost.shape[0], n = cost.shape[1], i, j
    idx = np.zeros(n, dtype=np.int64)
    val = np.empty(n, dtype=np.float64)
    cdef long long[::1] iv = idx
    cdef double[::1] vv = val
    for j in range(n):
        vv[j] = cost[0, j]
    for i in range(1, m):
        for j in range(n):
            if cost[i, j] < vv[j]:
                vv[j] = cost[i, j]
                iv[j] = i
    return idx, val


def hungarian(const double[:, ::1] cost):
    """Shortest-augmenting-path Hungarian method with row/column potentials.

    Rows are inserted one at a time; each insertion runs a Dijkstra-style
    search over reduced costs, O(n) per step, O(n) steps, so O(n^3) total.
    Returns ``perm`` with row ``i`` assigned to column ``perm[i]``.
    """
    cdef Py_ssize_t n = cost.shape[0]
    cdef Py_ssize_t i, j, i0, j0, j1
    cdef double delta, cur
    u_arr = np.zeros(n + 1)
    v_arr = np.zeros(n + 1)
    p_arr = np.zeros(n + 1, dtype=np.int64)
    way_arr = np.zeros(n + 1, dtype=np.int64)
    minv_arr = np.empty(n + 1)
    used_arr = np.empty(n + 1, dtype=np.uint8)
    cdef double[::1] u = u_arr, v = v_arr, minv = minv_arr
    cdef long long[::1] p = p_arr, way = way_arr
    cdef unsigned char[::1] used = used_arr

    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        for j in range(n + 1):
            minv[j] = INFINITY
            used[j] = 0
        while True:
            used[j0] = 1
            i0 = p[j0]
            delta = INFINITY
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
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
    for j in range(1, n + 1):
        perm[p[j] - 1] = j - 1
    return perm
