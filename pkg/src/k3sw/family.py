"""The 2-sphere of period planes through a base point on ``A_delta``.

For ``x`` on the unit sphere the plane is spanned by
``omega_i(x) = theta_i - (eps * x_i / 2) * delta``.  Its Gram matrix is
``I - (eps^2/2) x x^T`` whose inverse ``I + mu x x^T`` gives the dual frame
in closed form.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .degree import SphereMap
from .errors import DegenerateMetricError, InputError, WallError
from .lattice import K3
from .sphere_grid import icosphere

FOUR_PI = 4.0 * math.pi
UNIT_TOL = 1e-12


def mu_of(epsilon):
    h = epsilon * epsilon / 2.0
    if h >= 1.0:
        raise DegenerateMetricError(f"epsilon^2 = {2 * h} >= 2: the frame Gram is not positive definite")
    return h / (1.0 - h)


@dataclasses.dataclass(frozen=True)
class WallAvoidance:
    """Evidence that no enumerated root other than +-delta is crossed by the family."""

    epsilon: float
    halvings: int
    margin_factor: float
    analytic_min: float
    grid_level: int
    grid_min: float
    roots_checked: int
    verified_bound: float
    worst_root: np.ndarray | None = None

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["worst_root"] = None if self.worst_root is None else self.worst_root.tolist()
        return d


@dataclasses.dataclass(frozen=True)
class SphereFamily:
    base: object  # period.BasePoint
    epsilon: float
    lattice: object = dataclasses.field(default=K3, repr=False)
    avoidance: WallAvoidance | None = None

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InputError("epsilon must be positive")
        mu_of(self.epsilon)

    @property
    def delta(self):
        return self.base.delta

    @property
    def theta(self):
        return self.base.theta

    @property
    def mu(self):
        return mu_of(self.epsilon)


def _unit(x):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != 3:
        raise InputError("sphere points must be 3-vectors")
    if np.any(np.abs(np.linalg.norm(x, axis=-1) - 1.0) > UNIT_TOL):
        raise InputError("sphere point is not a unit vector")
    return x


def frame_at(family, x):
    """``omega_i(x)`` as rows; ``x`` may be ``(3,)`` or ``(n, 3)`` giving ``(n, 3, 22)``."""
    x = _unit(x)
    d = family.delta.astype(np.float64)
    return family.theta - (0.5 * family.epsilon) * x[..., :, None] * d


def dual_frame_at(family, x):
    """``omega*_i = omega_i + mu x_i (sum_j x_j omega_j)``."""
    x = _unit(x)
    om = frame_at(family, x)
    combo = np.einsum("...j,...jk->...k", x, om)
    return om + family.mu * x[..., :, None] * combo[..., None, :]


def self_dual_projection(family, x, c):
    """``c^+ = sum_i <c, omega*_i> omega_i``."""
    om = frame_at(family, x)
    star = dual_frame_at(family, x)
    coeff = star @ (family.lattice.gram @ np.asarray(c, dtype=np.float64))
    return np.einsum("...i,...ik->...k", coeff, om)


@dataclasses.dataclass(frozen=True)
class WallSection:
    """``x -> prefactor * (<alpha, omega*_i(x)>)_i`` in the theta basis of H.

    With ``a_i = <alpha, theta_i>`` and ``b = <alpha, delta>`` component i is
    ``prefactor * (a_i - (eps b/2) x_i + mu x_i ((a.x) - eps b/2))``.
    """

    alpha: np.ndarray
    a: np.ndarray
    b: float
    epsilon: float
    mu: float
    prefactor: float = FOUR_PI
    family: SphereFamily | None = dataclasses.field(default=None, repr=False, compare=False)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        h = 0.5 * self.epsilon * self.b
        ax = x @ self.a
        return self.prefactor * (self.a - h * x + self.mu * x * (ax - h)[..., None])

    def via_dual_frame(self, x):
        """Same map evaluated from its definition with 22-dimensional frames."""
        star = dual_frame_at(self.family, x)
        return self.prefactor * (star @ (self.family.lattice.gram @ self.alpha.astype(np.float64)))

    def norm_lower_bound(self):
        """``|w(x)| >= prefactor * ||a| - eps|b|/2|`` for all x, since ``I + mu x x^T >= I``."""
        return self.prefactor * abs(float(np.linalg.norm(self.a)) - 0.5 * self.epsilon * abs(self.b))

    def as_sphere_map(self):
        return SphereMap(self, smoothness_hint="polynomial", min_norm_estimate=self.norm_lower_bound(),
                         name=f"w({self.alpha.tolist()})")

    def to_dict(self):
        return {
            "alpha": self.alpha.tolist(),
            "a": self.a.tolist(),
            "b": self.b,
            "epsilon": self.epsilon,
            "mu": self.mu,
            "prefactor": self.prefactor,
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(alpha=np.asarray(doc["alpha"], dtype=np.int64), a=np.asarray(doc["a"], dtype=np.float64),
                   b=float(doc["b"]), epsilon=float(doc["epsilon"]), mu=float(doc["mu"]),
                   prefactor=float(doc.get("prefactor", FOUR_PI)))


def wall_section(family, alpha, prefactor=FOUR_PI):
    alpha = np.asarray(alpha)
    gram = family.lattice.gram
    a = family.theta @ (gram @ alpha.astype(np.float64))
    b = float(family.lattice.pairing(alpha.astype(np.int64), family.delta)) if np.issubdtype(
        alpha.dtype, np.integer) else float(alpha.astype(np.float64) @ gram @ family.delta)
    return WallSection(alpha=alpha, a=a, b=b, epsilon=family.epsilon, mu=family.mu,
                       prefactor=prefactor, family=family)


def _grid_min_norms(a, b, epsilon, mu, points, chunk=2048):
    """min over ``points`` of |w(x)|/prefactor for every row of ``a``."""
    out = np.empty(len(a))
    h = 0.5 * epsilon * b
    k = 2.0 * mu + mu * mu
    for s in range(0, len(a), chunk):
        aa, hh = a[s:s + chunk], h[s:s + chunk]
        ax = aa @ points.T
        v2 = (aa * aa).sum(1)[:, None] - 2.0 * hh[:, None] * ax + (hh * hh)[:, None]
        xv = ax - hh[:, None]
        out[s:s + chunk] = np.sqrt(np.clip(v2 + k * xv * xv, 0.0, None)).min(axis=1)
    return out


def certify_family(base, roots, epsilon=0.1, grid_level=5, margin_factor=2.0, max_halvings=60, lattice=K3):
    """Shrink ``epsilon`` until every enumerated root besides +-delta stays off the walls.

    A root ``d`` with ``a = <d, theta>``, ``b = <d, delta>`` is crossed exactly
    when ``|a| = eps|b|/2``; we demand ``|a| >= margin_factor * eps|b|/2``
    so that its wall section stays in a cone around ``a``.  The analytic
    condition is then confirmed by a sweep over an icosahedral grid.
    """
    delta = base.delta
    others = roots.roots
    keep = ~(np.all(others == delta, axis=1) | np.all(others == -delta, axis=1))
    others = others[keep]
    gram = lattice.gram
    a = others.astype(np.float64) @ (gram @ base.theta.T)
    b = (others @ (gram @ delta)).astype(np.float64)
    a_norm = np.linalg.norm(a, axis=1) if len(a) else np.zeros(0)

    eps = float(epsilon)
    halvings = 0
    while True:
        mu_of(eps)
        slack = a_norm - margin_factor * 0.5 * eps * np.abs(b)
        if len(slack) == 0 or slack.min() > 0:
            break
        if halvings >= max_halvings:
            worst = others[int(np.argmin(slack))]
            raise WallError(f"no epsilon >= {eps:.3g} keeps {lattice.format_vector(worst)} off its wall")
        eps *= 0.5
        halvings += 1

    family = SphereFamily(base=base, epsilon=eps, lattice=lattice)
    analytic = a_norm - 0.5 * eps * np.abs(b)
    points, _ = icosphere(grid_level)
    grid = _grid_min_norms(a, b, eps, family.mu, points) if len(a) else np.zeros(0)
    worst = None
    if len(a):
        worst = others[int(np.argmin(grid))]
        if grid.min() <= 0 or analytic.min() <= 0:
            raise WallError(f"wall section of {lattice.format_vector(worst)} vanishes on the grid")
    # the distinguished root itself: w(delta) = 4 pi eps (1 + mu) x up to rounding in <theta, delta>
    own = wall_section(family, delta)
    if own.norm_lower_bound() <= 0:
        raise WallError("wall section of delta vanishes")
    report = WallAvoidance(
        epsilon=eps,
        halvings=halvings,
        margin_factor=margin_factor,
        analytic_min=float(analytic.min()) if len(a) else float("inf"),
        grid_level=grid_level,
        grid_min=float(grid.min()) if len(a) else float("inf"),
        roots_checked=int(len(a)),
        verified_bound=float(roots.bound),
        worst_root=worst,
    )
    return dataclasses.replace(family, avoidance=report)


def transported_family(family, iso):
    """The family built from the image of the base point under a lattice isometry."""
    return SphereFamily(base=family.base.transported(iso), epsilon=family.epsilon,
                        lattice=family.lattice, avoidance=family.avoidance)
