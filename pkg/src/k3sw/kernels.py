"""Numeric inner loops.

Each kernel exists twice: a numba-compiled loop (``*_numba``) and a
vectorized numpy version (``*_numpy``).  The unsuffixed name dispatches
according to :data:`k3sw._accel.USE_NUMBA`.  Both versions must return
identical results; ``tests/test_kernels.py`` holds them to that.
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit

_SLACK = 1e-9


def ldl_upper(gram):
    """Decompose a positive-definite form as ``x.Q.x = sum_i d_i (x_i + sum_{j>i} U_ij x_j)^2``.

    Returns ``(d, U)`` with ``U`` unit upper triangular.  Raises
    ``numpy.linalg.LinAlgError`` if the form is not positive definite.
    """
    q = np.asarray(gram, dtype=np.float64)
    n = q.shape[0]
    # Q = L L^T  ->  Q = U^T D U with U = D^{-1/2} L^T
    lower = np.linalg.cholesky(q)
    diag = np.diag(lower).copy()
    upper = (lower / diag).T.copy()
    return diag**2, upper.reshape(n, n)


# --------------------------------------------------------------------------
# short vector enumeration (Fincke-Pohst)


@njit(cache=True)
def _short_vectors_numba(d, upper, bound2, cap):
    n = d.shape[0]
    out = np.zeros((min(cap, 1024), n), dtype=np.int64)
    x = np.zeros(n, dtype=np.int64)
    hi = np.zeros(n, dtype=np.int64)
    center = np.zeros(n)
    rem = np.zeros(n)
    count = 0
    i = n - 1
    rem[i] = bound2
    r = math.sqrt(rem[i] / d[i])
    x[i] = math.ceil(-r - _SLACK)
    hi[i] = math.floor(r + _SLACK)
    while True:
        if x[i] > hi[i]:
            i += 1
            if i == n:
                break
            x[i] += 1
            continue
        if i == 0:
            if count >= cap:
                return out[:0], cap + 1
            if count == out.shape[0]:
                grown = np.zeros((min(cap, 2 * out.shape[0]), n), dtype=np.int64)
                grown[:count] = out
                out = grown
            out[count, :] = x
            count += 1
            x[0] += 1
            continue
        t = x[i] - center[i]
        budget = rem[i] - d[i] * t * t
        i -= 1
        rem[i] = budget
        s = 0.0
        for j in range(i + 1, n):
            s += upper[i, j] * x[j]
        center[i] = -s
        rr = budget / d[i]
        if rr < 0.0:
            rr = 0.0
        r = math.sqrt(rr)
        x[i] = math.ceil(center[i] - r - _SLACK)
        hi[i] = math.floor(center[i] + r + _SLACK)
    return out[:count], count


def _short_vectors_numpy(d, upper, bound2, cap):
    n = d.shape[0]
    xs = np.zeros((1, n), dtype=np.int64)
    rem = np.array([bound2], dtype=np.float64)
    partial_cap = 64 * cap + 1024
    for i in range(n - 1, -1, -1):
        center = -(xs[:, i + 1:] @ upper[i, i + 1:]) if i + 1 < n else np.zeros(len(xs))
        r = np.sqrt(np.clip(rem, 0.0, None) / d[i])
        lo = np.ceil(center - r - _SLACK).astype(np.int64)
        hi = np.floor(center + r + _SLACK).astype(np.int64)
        counts = np.clip(hi - lo + 1, 0, None)
        total = int(counts.sum())
        if total > partial_cap or (i == 0 and total > cap):
            return np.zeros((0, n), dtype=np.int64), cap + 1
        owner = np.repeat(np.arange(len(xs)), counts)
        offset = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        vals = lo[owner] + offset
        xs = xs[owner]
        xs[:, i] = vals
        rem = rem[owner] - d[i] * (vals - center[owner]) ** 2
    return xs, len(xs)


def short_vectors(gram, bound2, cap, use_numba=None):
    """All integer ``x`` with ``x.Q.x <= bound2`` for positive-definite ``Q``.

    Returns ``(vectors, count)``.  When more than ``cap`` vectors exist the
    vector array is meaningless and ``count == cap + 1``.
    """
    use_numba = USE_NUMBA if use_numba is None else use_numba
    d, upper = ldl_upper(gram)
    bound2 = float(bound2) * (1.0 + _SLACK) + _SLACK
    if use_numba:
        vecs, count = _short_vectors_numba(d, upper, bound2, int(cap))
    else:
        vecs, count = _short_vectors_numpy(d, upper, bound2, int(cap))
    return vecs, count


# --------------------------------------------------------------------------
# signed solid angles of image triangles


@njit(cache=True)
def _solid_angles_numba(points, faces):
    total = 0.0
    largest = 0.0
    for k in range(faces.shape[0]):
        a = points[faces[k, 0]]
        b = points[faces[k, 1]]
        c = points[faces[k, 2]]
        cx = b[1] * c[2] - b[2] * c[1]
        cy = b[2] * c[0] - b[0] * c[2]
        cz = b[0] * c[1] - b[1] * c[0]
        num = a[0] * cx + a[1] * cy + a[2] * cz
        den = (1.0 + a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
               + b[0] * c[0] + b[1] * c[1] + b[2] * c[2]
               + c[0] * a[0] + c[1] * a[1] + c[2] * a[2])
        omega = 2.0 * math.atan2(num, den)
        total += omega
        if abs(omega) > largest:
            largest = abs(omega)
    return total, largest


def _solid_angles_numpy(points, faces):
    a = points[faces[:, 0]]
    b = points[faces[:, 1]]
    c = points[faces[:, 2]]
    num = np.einsum("ij,ij->i", a, np.cross(b, c))
    den = 1.0 + np.einsum("ij,ij->i", a, b) + np.einsum("ij,ij->i", b, c) + np.einsum("ij,ij->i", c, a)
    omega = 2.0 * np.arctan2(num, den)
    return float(omega.sum()), float(np.abs(omega).max(initial=0.0))


def solid_angle_sum(points, faces, use_numba=None):
    """Total signed area of the geodesic triangles ``points[faces]`` on S^2.

    Van Oosterom-Strackee per triangle.  Returns ``(total, largest)`` where
    ``largest`` is the biggest single-triangle |area|, a coarseness
    indicator for the grid.
    """
    use_numba = USE_NUMBA if use_numba is None else use_numba
    points = np.ascontiguousarray(points, dtype=np.float64)
    faces = np.ascontiguousarray(faces, dtype=np.int64)
    if use_numba:
        total, largest = _solid_angles_numba(points, faces)
        return float(total), float(largest)
    return _solid_angles_numpy(points, faces)


# --------------------------------------------------------------------------
# triangles whose image contains a target direction


@njit(cache=True)
def _containing_numba(points, faces, target):
    m = faces.shape[0]
    hits = np.zeros(m, dtype=np.bool_)
    tx, ty, tz = target[0], target[1], target[2]
    for k in range(m):
        a = points[faces[k, 0]]
        b = points[faces[k, 1]]
        c = points[faces[k, 2]]
        if tx * (a[0] + b[0] + c[0]) + ty * (a[1] + b[1] + c[1]) + tz * (a[2] + b[2] + c[2]) <= 0.0:
            continue
        s1 = (tx * (a[1] * b[2] - a[2] * b[1]) + ty * (a[2] * b[0] - a[0] * b[2])
              + tz * (a[0] * b[1] - a[1] * b[0]))
        s2 = (tx * (b[1] * c[2] - b[2] * c[1]) + ty * (b[2] * c[0] - b[0] * c[2])
              + tz * (b[0] * c[1] - b[1] * c[0]))
        s3 = (tx * (c[1] * a[2] - c[2] * a[1]) + ty * (c[2] * a[0] - c[0] * a[2])
              + tz * (c[0] * a[1] - c[1] * a[0]))
        if s1 == 0.0 and s2 == 0.0 and s3 == 0.0:
            continue
        if (s1 >= 0.0 and s2 >= 0.0 and s3 >= 0.0) or (s1 <= 0.0 and s2 <= 0.0 and s3 <= 0.0):
            hits[k] = True
    return np.nonzero(hits)[0]


def _containing_numpy(points, faces, target):
    a = points[faces[:, 0]]
    b = points[faces[:, 1]]
    c = points[faces[:, 2]]
    front = (a + b + c) @ target > 0.0
    s1 = np.cross(a, b) @ target
    s2 = np.cross(b, c) @ target
    s3 = np.cross(c, a) @ target
    inside = ((s1 >= 0) & (s2 >= 0) & (s3 >= 0)) | ((s1 <= 0) & (s2 <= 0) & (s3 <= 0))
    inside &= (s1 != 0) | (s2 != 0) | (s3 != 0)
    return np.nonzero(front & inside)[0]


def triangles_containing(points, faces, target, use_numba=None):
    """Indices of faces whose geodesic image triangle contains ``target``."""
    use_numba = USE_NUMBA if use_numba is None else use_numba
    points = np.ascontiguousarray(points, dtype=np.float64)
    faces = np.ascontiguousarray(faces, dtype=np.int64)
    target = np.ascontiguousarray(target, dtype=np.float64)
    if use_numba:
        return _containing_numba(points, faces, target).astype(np.int64)
    return _containing_numpy(points, faces, target).astype(np.int64)
