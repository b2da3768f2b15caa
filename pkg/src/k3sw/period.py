"""Positive 3-planes in R^{3,19} and generic base points on a wall A_delta."""

from __future__ import annotations

import dataclasses
from fractions import Fraction

import numpy as np

from .errors import ConditioningError, ConstructionError, GeometryError, InputError
from .lattice import K3

DEFAULT_TOLERANCE = 1e-9
GENERICITY_TOLERANCE = 1e-6
MAX_CONDITION = 1e8


@dataclasses.dataclass(frozen=True)
class PeriodFrame:
    """Orthonormal basis ``theta`` (rows) of a positive-definite 3-plane H."""

    theta: np.ndarray
    tolerance: float = DEFAULT_TOLERANCE
    residual: float = 0.0

    def gram(self, lattice=K3):
        return self.theta @ lattice.gram @ self.theta.T

    def transported(self, iso):
        return dataclasses.replace(self, theta=self.theta @ np.asarray(iso, dtype=np.float64).T)


@dataclasses.dataclass(frozen=True)
class BasePoint:
    """A point ``p`` of ``A_delta`` lying on no other wall among the enumerated roots."""

    frame: PeriodFrame
    delta: np.ndarray
    verified_bound: float
    raw: np.ndarray | None = None
    seed: int = 0
    scale_exponent: int = 0
    genericity_margin: float = float("nan")
    nearest_root: np.ndarray | None = None

    @property
    def theta(self):
        return self.frame.theta

    def transported(self, iso):
        iso = np.asarray(iso)
        raw = None if self.raw is None else np.array(
            [np.dot(iso.astype(object), r) for r in self.raw], dtype=object)
        near = None if self.nearest_root is None else iso @ self.nearest_root
        return dataclasses.replace(
            self, frame=self.frame.transported(iso), delta=iso @ self.delta, raw=raw, nearest_root=near)

    def to_dict(self):
        doc = {
            "delta": self.delta.tolist(),
            "theta": self.theta.tolist(),
            "residual": self.frame.residual,
            "tolerance": self.frame.tolerance,
            "verified_bound": self.verified_bound,
            "seed": self.seed,
            "scale_exponent": self.scale_exponent,
            "genericity_margin": self.genericity_margin,
            "nearest_root": None if self.nearest_root is None else self.nearest_root.tolist(),
        }
        if self.raw is not None:
            doc["raw"] = [[[f.numerator, f.denominator] for f in row] for row in self.raw]
        return doc

    @classmethod
    def from_dict(cls, doc):
        raw = doc.get("raw")
        if raw is not None:
            raw = np.array([[Fraction(n, d) for n, d in row] for row in raw], dtype=object)
        near = doc.get("nearest_root")
        return cls(
            frame=PeriodFrame(np.asarray(doc["theta"], dtype=np.float64), doc["tolerance"], doc["residual"]),
            delta=np.asarray(doc["delta"], dtype=np.int64),
            verified_bound=float(doc["verified_bound"]),
            raw=raw,
            seed=int(doc["seed"]),
            scale_exponent=int(doc["scale_exponent"]),
            genericity_margin=float(doc["genericity_margin"]),
            nearest_root=None if near is None else np.asarray(near, dtype=np.int64),
        )


def project_rho_H(frame, c, lattice=K3):
    """Coordinates of the projection of ``c`` to H along H^perp, in the theta basis.

    Since theta is orthonormal these are just ``<c, theta_j>``.
    """
    c = np.asarray(c)
    if c.dtype == object:
        c = c.astype(np.float64)
    return frame.theta @ (lattice.gram @ c.T)


def _as_float(vectors):
    v = np.asarray(vectors)
    return v.astype(np.float64) if v.dtype == object else np.asarray(v, dtype=np.float64)


def orthonormalize_in_subspace(raw, constraint, tolerance=DEFAULT_TOLERANCE,
                               max_condition=MAX_CONDITION, lattice=K3):
    """Gram-Schmidt under the intersection form for three vectors in ``constraint^perp``.

    ``raw`` may hold exact Fractions; the Gram matrix is then formed exactly
    and only the Cholesky step is done in floating point.
    """
    raw = np.asarray(raw)
    if raw.shape != (3, lattice.rank):
        raise InputError("expected three vectors of length 22")
    constraint = np.asarray(constraint)
    if raw.dtype == object:
        c_obj = constraint.astype(object)
        g_obj = lattice.gram.astype(object)
        orth = [np.dot(np.dot(r, g_obj), c_obj) for r in raw]
        if any(o != 0 for o in orth):
            raise GeometryError("raw vectors do not pair to zero with the constraint")
        gram3 = np.array([[float(np.dot(np.dot(raw[i], g_obj), raw[j])) for j in range(3)]
                          for i in range(3)])
    else:
        orth = raw @ lattice.gram @ constraint.astype(np.float64)
        scale = max(1.0, float(np.abs(raw).max()))
        if np.abs(orth).max() > tolerance * scale:
            raise GeometryError("raw vectors do not pair to zero with the constraint")
        gram3 = raw @ lattice.gram @ raw.T
    eig = np.linalg.eigvalsh(gram3)
    if eig.min() <= 0:
        raise GeometryError(f"raw Gram matrix is not positive definite (eigenvalues {eig.tolist()})")
    if eig.max() / eig.min() > max_condition:
        raise ConditioningError(f"raw Gram matrix condition number {eig.max() / eig.min():.3g} too large")
    theta = np.linalg.solve(np.linalg.cholesky(gram3), _as_float(raw))
    # one re-orthonormalization pass against accumulated rounding
    theta = np.linalg.solve(np.linalg.cholesky(theta @ lattice.gram @ theta.T), theta)
    residual = float(np.abs(theta @ lattice.gram @ theta.T - np.eye(3)).max())
    if residual > tolerance:
        raise ConditioningError(f"orthonormalization residual {residual:.3g} exceeds tolerance")
    return PeriodFrame(theta=theta, tolerance=tolerance, residual=residual)


def genericity_report(theta, delta, roots, lattice=K3):
    """``(margin, nearest)``: the smallest ``max_j |<theta_j, d>|`` over roots other than +-delta."""
    if len(roots) == 0:
        return float("inf"), None
    pair = roots.roots.astype(np.float64) @ (lattice.gram @ theta.T)
    strength = np.abs(pair).max(axis=1)
    d = np.asarray(delta)
    same = np.all(roots.roots == d, axis=1) | np.all(roots.roots == -d, axis=1)
    strength[same] = np.inf
    k = int(np.argmin(strength))
    if not np.isfinite(strength[k]):
        return float("inf"), None
    return float(strength[k]), roots.roots[k]


def _perp_projection_numerators(vec, delta, gram):
    # x - <x,d>/<d,d> d = x + <x,d>/2 d  for <d,d> = -2; returned times 2
    return 2 * vec + int(vec @ gram @ delta) * delta


def construct_base_point(delta, roots, seed=0, tolerance=DEFAULT_TOLERANCE,
                         generic_tol=GENERICITY_TOLERANCE, start_exponent=2, retries=32, lattice=K3):
    """Orthonormal frame of a positive 3-plane ``H`` with ``delta`` in ``H^perp``.

    Starts from ``span(e_j + f_j)`` projected to ``delta^perp`` and adds a
    seeded rational perturbation inside ``delta^perp`` of size ``2**-k``.
    ``k`` grows when positivity fails; the draw is repeated when some
    enumerated root besides ``+-delta`` ends up (numerically) orthogonal to H.
    """
    delta = np.asarray(delta, dtype=np.int64)
    if delta.shape != (lattice.rank,):
        raise InputError("delta must have 22 coordinates")
    if lattice.norm2(delta) != -2:
        raise InputError(f"{lattice.format_vector(delta)} is not a root (square {lattice.norm2(delta)})")
    if delta not in roots:
        raise InputError(f"{lattice.format_vector(delta)} is not in the enumerated root set")

    gram = lattice.gram
    start = np.zeros((3, lattice.rank), dtype=np.int64)
    for j in range(3):
        start[j, 2 * j] = start[j, 2 * j + 1] = 1
    start2 = np.array([_perp_projection_numerators(s, delta, gram) for s in start])
    gd = gram @ delta
    entropy = [int(seed)] + [int(t) + 2**16 for t in delta.tolist()]
    rng = np.random.default_rng(entropy)

    k = start_exponent
    nearest, best_margin = None, -np.inf
    for _ in range(retries):
        r = rng.integers(-64, 65, size=(3, lattice.rank))
        # perturbation 2**-k * sum_m (r_m/64) proj(e_m) = (2r + (r.G.d) d) / (2 * 64 * 2**k)
        pert2 = 2 * r + np.outer(r @ gd, delta)
        denom = 2 * 64 * 2**k
        raw = np.array(
            [[Fraction(int(start2[j, m]), 2) + Fraction(int(pert2[j, m]), denom) for m in range(lattice.rank)]
             for j in range(3)],
            dtype=object,
        )
        try:
            frame = orthonormalize_in_subspace(raw, delta, tolerance=tolerance, lattice=lattice)
        except GeometryError:
            k += 1
            continue
        margin, near = genericity_report(frame.theta, delta, roots, lattice)
        if margin > generic_tol:
            return BasePoint(frame=frame, delta=delta, verified_bound=float(roots.bound), raw=raw,
                             seed=int(seed), scale_exponent=k, genericity_margin=margin, nearest_root=near)
        if margin > best_margin:
            best_margin, nearest = margin, near
    where = "" if nearest is None else f"; nearest offending root {lattice.format_vector(nearest)}"
    raise ConstructionError(f"no generic base point for {lattice.format_vector(delta)} after {retries} draws{where}",
                            nearest_root=nearest)
