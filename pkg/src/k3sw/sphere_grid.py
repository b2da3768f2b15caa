"""Deterministic point sets on the unit sphere.

``icosphere(level)`` is the geodesic subdivision of the icosahedron used
both for wall-avoidance sweeps and for degree quadrature.  Faces are
oriented so that ``det[a, b, c] > 0`` (counter-clockwise seen from
outside).
"""

from functools import lru_cache

import numpy as np


def _icosahedron():
    phi = (1.0 + 5.0**0.5) / 2.0
    verts = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=np.float64,
    )
    faces = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=np.int64,
    )
    return verts / np.linalg.norm(verts, axis=1, keepdims=True), faces


def _subdivide(verts, faces):
    a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
    edges = np.concatenate([np.stack([a, b], 1), np.stack([b, c], 1), np.stack([c, a], 1)])
    key = np.sort(edges, axis=1)
    uniq, inverse = np.unique(key, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    mid = verts[uniq[:, 0]] + verts[uniq[:, 1]]
    mid /= np.linalg.norm(mid, axis=1, keepdims=True)
    n_old, n_face = len(verts), len(faces)
    ab = n_old + inverse[:n_face]
    bc = n_old + inverse[n_face:2 * n_face]
    ca = n_old + inverse[2 * n_face:]
    new_faces = np.concatenate(
        [
            np.stack([a, ab, ca], 1),
            np.stack([ab, b, bc], 1),
            np.stack([ca, bc, c], 1),
            np.stack([ab, bc, ca], 1),
        ]
    )
    return np.concatenate([verts, mid]), new_faces


@lru_cache(maxsize=16)
def icosphere(level):
    """Vertices ``(10*4**level + 2, 3)`` and faces ``(20*4**level, 3)``.

    Arrays are cached and returned read-only.
    """
    if level < 0:
        raise ValueError("level must be non-negative")
    verts, faces = _icosahedron()
    for _ in range(level):
        verts, faces = _subdivide(verts, faces)
    verts.setflags(write=False)
    faces.setflags(write=False)
    return verts, faces


def fibonacci_sphere(n, offset=0.5):
    """``n`` quasi-uniform unit vectors on a golden-angle spiral."""
    k = np.arange(n, dtype=np.float64) + offset
    z = 1.0 - 2.0 * k / n
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    theta = np.pi * (3.0 - 5.0**0.5) * k
    return np.stack([r * np.cos(theta), r * np.sin(theta), z], axis=1)


def tangent_basis(x):
    """Orthonormal ``(t1, t2)`` at unit ``x`` with ``det[x, t1, t2] = +1``."""
    x = np.asarray(x, dtype=np.float64)
    helper = np.array([1.0, 0.0, 0.0]) if abs(x[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    t1 = helper - (helper @ x) * x
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(x, t1)
    return t1, t2
