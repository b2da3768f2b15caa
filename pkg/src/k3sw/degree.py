"""Topological degree of maps S^2 -> R^3 \\ {0}.

Two independent estimators:

* :func:`degree_kronecker` sums signed areas of the image triangles of
  ``w/|w|`` over an icosahedral grid (a discretized Kronecker integral).
* :func:`degree_preimage` counts preimages of a regular value with the sign
  of the Jacobian, locating them by triangle search and Newton refinement.

:func:`degree` runs both and refuses to answer unless they agree.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable

import numpy as np

from . import kernels
from .errors import DegeneracyError, InconsistencyError, NonConvergenceError, VanishingError
from .sphere_grid import icosphere, tangent_basis

RESIDUAL_LIMIT = 0.25
COARSE_TRIANGLE = math.pi / 2
DEFAULT_START_LEVEL = 4
DEFAULT_CAP_LEVEL = 8
MAX_RETRIES = 8
DEFAULT_REGULAR_VALUE = np.array([0.2317, -0.6482, 0.7253]) / np.linalg.norm([0.2317, -0.6482, 0.7253])


@dataclasses.dataclass(frozen=True)
class SphereMap:
    """A vectorized map ``(n, 3) -> (n, 3)`` on unit vectors."""

    evaluator: Callable
    smoothness_hint: str = "analytic"
    min_norm_estimate: float | None = None
    name: str = ""

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        return np.asarray(self.evaluator(x), dtype=np.float64)

    def unit_values(self, x):
        """``w/|w|`` at ``x``; raises :class:`VanishingError` with a witness point."""
        w = self(np.atleast_2d(x))
        bad = ~np.all(np.isfinite(w), axis=1)
        if bad.any():
            k = int(np.argmax(bad))
            raise VanishingError(f"map {self.name or ''} is not finite at {np.atleast_2d(x)[k].tolist()}",
                                 witness=np.atleast_2d(x)[k])
        norms = np.linalg.norm(w, axis=1)
        scale = max(float(norms.max(initial=0.0)), 1e-300)
        k = int(np.argmin(norms)) if len(norms) else 0
        if len(norms) and (norms[k] == 0.0 or norms[k] < 1e-13 * scale):
            raise VanishingError(f"map {self.name or ''} vanishes near {np.atleast_2d(x)[k].tolist()}",
                                 witness=np.atleast_2d(x)[k])
        if self.min_norm_estimate is not None and len(norms) and norms[k] < 0.5 * self.min_norm_estimate:
            raise VanishingError(
                f"map {self.name or ''} drops to {norms[k]:.3g}, below half its declared minimum norm",
                witness=np.atleast_2d(x)[k])
        return w / norms[:, None]


def compose_linear(matrix, sphere_map, name=None):
    """``x -> M w(x)``."""
    m = np.asarray(matrix, dtype=np.float64)
    return SphereMap(lambda x: sphere_map(x) @ m.T, sphere_map.smoothness_hint,
                     None, name or f"M.{sphere_map.name}")


def precompose_linear(sphere_map, matrix, name=None):
    """``x -> w(M x)`` for orthogonal ``M``."""
    m = np.asarray(matrix, dtype=np.float64)
    return SphereMap(lambda x: sphere_map(x @ m.T), sphere_map.smoothness_hint,
                     sphere_map.min_norm_estimate, name or f"{sphere_map.name}.M")


def identity_map():
    return SphereMap(lambda x: x, "polynomial", 1.0, "identity")


def antipodal_map():
    return SphereMap(lambda x: -x, "polynomial", 1.0, "antipodal")


def constant_map(c):
    c = np.asarray(c, dtype=np.float64)
    return SphereMap(lambda x: np.broadcast_to(c, np.shape(x)).copy(), "polynomial",
                     float(np.linalg.norm(c)), f"constant{c.tolist()}")


@dataclasses.dataclass(frozen=True)
class DegreeCertificate:
    degree: int
    method: str
    residual: float
    refinement_level: int
    regular_value: tuple | None = None
    agreement: bool = False
    raw: float = float("nan")
    details: dict = dataclasses.field(default_factory=dict)
    companion: DegreeCertificate | None = None

    def to_dict(self):
        out = {
            "degree": self.degree,
            "method": self.method,
            "residual": self.residual,
            "refinement_level": self.refinement_level,
            "regular_value": None if self.regular_value is None else list(self.regular_value),
            "agreement": self.agreement,
            "raw": self.raw,
            "details": self.details,
        }
        if self.companion is not None:
            out["companion"] = self.companion.to_dict()
        return out


def kronecker_estimate(sphere_map, level):
    """Raw ``(sum of signed image areas) / 4 pi`` and the largest image triangle."""
    verts, faces = icosphere(level)
    unit = sphere_map.unit_values(verts)
    total, largest = kernels.solid_angle_sum(unit, faces)
    return total / (4.0 * math.pi), largest


def degree_kronecker(sphere_map, level=DEFAULT_START_LEVEL, cap=DEFAULT_CAP_LEVEL):
    """Round the discrete Kronecker integral, refining the grid until it is trustworthy.

    A level is accepted when the raw value is within 0.25 of an integer and
    either no image triangle exceeds pi/2 in area, or the previous level
    produced the same integer (large image triangles are unavoidable next
    to branch points of maps with |degree| > 1).
    """
    last = None
    previous = None
    for lev in range(level, cap + 1):
        raw, largest = kronecker_estimate(sphere_map, lev)
        deg = int(round(raw))
        residual = abs(raw - deg)
        last = (raw, residual, largest, lev)
        settled = residual < RESIDUAL_LIMIT
        if settled and (largest < COARSE_TRIANGLE or previous == deg):
            return DegreeCertificate(degree=deg, method="kronecker", residual=float(residual),
                                     refinement_level=lev, raw=float(raw),
                                     details={"largest_triangle": float(largest),
                                              "accepted_by": "fine" if largest < COARSE_TRIANGLE else "stable"})
        previous = deg if settled else None
    raw, residual, largest, lev = last
    raise NonConvergenceError(
        f"Kronecker sum did not settle by level {cap}: raw {raw:.4f}, residual {residual:.3f}, "
        f"largest image triangle {largest:.3f}")


def _random_rotation(rng, angle_scale):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = angle_scale * rng.uniform(0.5, 1.0)
    k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + math.sin(angle) * k + (1 - math.cos(angle)) * (k @ k)


class _Borderline(Exception):
    pass


def _newton_on_sphere(unit_fn, target, x0, tol=1e-12, max_iter=60, h=1e-7):
    e1, e2 = tangent_basis(target)
    x = x0 / np.linalg.norm(x0)

    def residual(p):
        u = unit_fn(p[None, :])[0]
        return np.array([u @ e1, u @ e2]), u

    f, u = residual(x)
    for _ in range(max_iter):
        if np.linalg.norm(u - target) < tol:
            return x, True
        t1, t2 = tangent_basis(x)
        pts = np.array([x + h * t1, x - h * t1, x + h * t2, x - h * t2])
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        vals = unit_fn(pts)
        proj = np.stack([vals @ e1, vals @ e2], axis=1)
        jac = np.stack([(proj[0] - proj[1]) / (2 * h), (proj[2] - proj[3]) / (2 * h)], axis=1)
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            return x, False
        lam = 1.0
        base = np.linalg.norm(f) + (0.0 if u @ target > 0 else 10.0)
        for _ in range(30):
            cand = x + lam * (step[0] * t1 + step[1] * t2)
            cand /= np.linalg.norm(cand)
            fc, uc = residual(cand)
            if np.linalg.norm(fc) + (0.0 if uc @ target > 0 else 10.0) < base:
                break
            lam *= 0.5
        else:
            return x, False
        x, f, u = cand, fc, uc
    return x, bool(np.linalg.norm(u - target) < 1e3 * tol)


def _jacobian_sign(unit_fn, x, h=1e-6):
    t1, t2 = tangent_basis(x)
    pts = np.array([x, x + h * t1, x - h * t1, x + h * t2, x - h * t2])
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    u = unit_fn(pts)
    d1 = (u[1] - u[2]) / (2 * h)
    d2 = (u[3] - u[4]) / (2 * h)
    return float(np.linalg.det(np.stack([u[0], d1, d2])))


def _signed_preimages(sphere_map, target, level, det_tol, cluster_tol):
    verts, faces = icosphere(level)
    unit = sphere_map.unit_values(verts)
    hits = kernels.triangles_containing(unit, faces, target)
    found = []
    for f in hits:
        x0 = verts[faces[f]].sum(axis=0)
        x, ok = _newton_on_sphere(sphere_map.unit_values, target, x0)
        if not ok:
            raise _Borderline(f"Newton refinement failed from triangle {int(f)}")
        found.append(x)
    roots = []
    for x in found:
        if all(np.linalg.norm(x - r) > 1e-8 for r in roots):
            roots.append(x)
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if np.linalg.norm(roots[i] - roots[j]) < cluster_tol:
                raise _Borderline("preimages too close together to separate")
    signs = []
    for x in roots:
        det = _jacobian_sign(sphere_map.unit_values, x)
        if abs(det) < det_tol:
            raise _Borderline(f"non-transverse preimage at {x.tolist()} (det {det:.2e})")
        signs.append(1 if det > 0 else -1)
    return roots, signs, len(hits)


def degree_preimage(sphere_map, regular_value=None, seed=0, level=DEFAULT_START_LEVEL,
                    max_retries=MAX_RETRIES, det_tol=1e-9, cluster_tol=1e-5):
    """Signed count of solutions of ``w(x)/|w(x)| = regular_value``.

    On a non-transverse, unresolved or clustered solution the regular value
    is rotated by a small seeded random rotation and the count repeated.
    """
    rng = np.random.default_rng(seed)
    target = DEFAULT_REGULAR_VALUE if regular_value is None else np.asarray(regular_value, dtype=np.float64)
    target = target / np.linalg.norm(target)
    reasons = []
    for attempt in range(max_retries + 1):
        try:
            roots, signs, n_hits = _signed_preimages(sphere_map, target, level, det_tol, cluster_tol)
        except _Borderline as exc:
            reasons.append(str(exc))
            target = _random_rotation(rng, 0.05) @ target
            target /= np.linalg.norm(target)
            continue
        deg = int(sum(signs))
        return DegreeCertificate(
            degree=deg, method="preimage", residual=0.0, refinement_level=level,
            regular_value=tuple(float(t) for t in target), raw=float(deg),
            details={"preimages": len(roots), "signs": signs, "candidate_triangles": int(n_hits),
                     "retries": attempt, "retry_reasons": reasons},
        )
    raise DegeneracyError(f"no regular value found after {max_retries} retries: {reasons[-1]}")


def degree(sphere_map, level=DEFAULT_START_LEVEL, cap=DEFAULT_CAP_LEVEL, regular_value=None, seed=0):
    """Degree from both methods; returns the Kronecker certificate with the preimage one attached."""
    kron = degree_kronecker(sphere_map, level=level, cap=cap)
    pre = degree_preimage(sphere_map, regular_value=regular_value, seed=seed,
                          level=kron.refinement_level)
    if kron.degree != pre.degree:
        raise InconsistencyError(
            f"Kronecker degree {kron.degree} != preimage degree {pre.degree} for {sphere_map.name}",
            certificates=(kron, pre))
    pre = dataclasses.replace(pre, agreement=True)
    return dataclasses.replace(kron, agreement=True, companion=pre)
