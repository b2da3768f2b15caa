"""Families Seiberg-Witten invariants of the sphere families over the walls.

Everything here is bookkeeping on top of the degree engine: for a family
``h_delta`` over the wall of ``delta`` and a spin-c class ``s_alpha`` with
``c_1 = 2 alpha`` the invariant is the degree of the wall section
``w(alpha)``.  The vanishing of the unperturbed Seiberg-Witten equations on
Ricci-flat fibres is taken as given and recorded on every certificate.

Sign normalization: S^2 is oriented by the outward normal, H by
``(theta_1, theta_2, theta_3)``; with these choices ``sw_delta(h_delta) = +1``.
Only relative signs carry meaning.
"""

from __future__ import annotations

import dataclasses
import io
import math

import numpy as np

from .degree import DEFAULT_CAP_LEVEL, DEFAULT_START_LEVEL, compose_linear, degree
from .errors import ConventionError, InputError, K3SWError, VanishingError, WallError
from .family import FOUR_PI, certify_family, transported_family, wall_section
from .lattice import K3, positive_representative
from .period import construct_base_point

ANALYTIC_INPUT = (
    "SW(s, 0) has no solutions on the Ricci-flat fibres (Weitzenboeck vanishing); "
    "imported as a theorem, not computed"
)
NORMALIZATION = {
    "sphere_orientation": "outward normal",
    "plane_orientation": "theta_1, theta_2, theta_3",
    "pinned": "sw_delta(h_delta) = +1",
    "claims": "relative signs only",
}


@dataclasses.dataclass(frozen=True)
class Topology:
    b_plus: int
    b1: int
    sigma: int


K3_TOPOLOGY = Topology(b_plus=3, b1=0, sigma=-16)


# --------------------------------------------------------------------------
# dimension formulas


def expected_dimension(u, b_plus=3, b1=0, sigma=-16, lattice=K3, c1=None):
    """Virtual dimension ``(c_1^2 - sigma)/4 - 1 - b+ + b1`` for ``c_1 = 2u``.

    ``c1`` may be passed directly to probe non-characteristic classes.
    """
    c = 2 * np.asarray(u, dtype=np.int64) if c1 is None else np.asarray(c1, dtype=np.int64)
    num = int(lattice.pairing(c, c)) - int(sigma)
    if num % 4:
        raise ConventionError(f"c_1^2 - sigma = {num} is not divisible by 4; c_1 is not characteristic")
    return num // 4 - 1 - int(b_plus) + int(b1)


def validity_constant(sigma):
    """``N = sigma + 8``: the square of ``c_1`` for which the one-parameter invariant is defined."""
    return int(sigma) + 8


def conjugation_sign(b_plus, b1, n):
    """Sign relating ``sw`` of a spin-c structure and of its conjugate."""
    num = int(b_plus) - int(b1) - int(n)
    if num % 2:
        raise ConventionError(f"b+ - b1 - n = {num} is odd")
    return -1 if (num // 2) % 2 else 1


def chamber_independent(b_plus, n):
    """Whether the ``n``-parameter invariant is free of wall crossing (``b+ != n + 2``)."""
    return int(b_plus) != int(n) + 2


@dataclasses.dataclass(frozen=True)
class SpinCClass:
    """The spin-c structure with ``c_1 = 2u``."""

    u: np.ndarray
    lattice: object = dataclasses.field(default=K3, repr=False)
    topology: Topology = K3_TOPOLOGY

    def __post_init__(self):
        u = np.asarray(self.u)
        if u.shape != (self.lattice.rank,) or not np.issubdtype(u.dtype, np.integer):
            raise InputError("a spin-c class needs an integral vector of length 22")
        object.__setattr__(self, "u", u.astype(np.int64))
        d = expected_dimension(self.u, self.topology.b_plus, self.topology.b1, self.topology.sigma, self.lattice)
        if self.topology == K3_TOPOLOGY and d != self.lattice.norm2(self.u):
            raise ConventionError(f"dimension {d} disagrees with u^2 = {self.lattice.norm2(self.u)}")

    @property
    def c1(self):
        return 2 * self.u

    @property
    def dimension(self):
        t = self.topology
        return expected_dimension(self.u, t.b_plus, t.b1, t.sigma, self.lattice)

    def conjugate(self):
        return dataclasses.replace(self, u=-self.u)

    @property
    def is_valid(self):
        """Valid for one-parameter families: ``c_1^2 = N``."""
        return int(self.lattice.norm2(self.c1)) == validity_constant(self.topology.sigma)


# --------------------------------------------------------------------------
# single entries


@dataclasses.dataclass(frozen=True)
class SwResult:
    value: int
    certificate: object  # DegreeCertificate
    alpha: np.ndarray
    analytic_input: str = ANALYTIC_INPUT

    def to_dict(self):
        return {
            "alpha": self.alpha.tolist(),
            "value": self.value,
            "analytic_input": self.analytic_input,
            "certificate": self.certificate.to_dict(),
        }


def _as_root(alpha, lattice):
    alpha = np.asarray(alpha)
    if alpha.shape != (lattice.rank,) or not np.issubdtype(alpha.dtype, np.integer):
        raise InputError("expected an integral vector of length 22")
    alpha = alpha.astype(np.int64)
    if lattice.norm2(alpha) != -2:
        raise InputError(f"{lattice.format_vector(alpha)} has square {lattice.norm2(alpha)}, not -2")
    return alpha


def _degree_of_section(section, level, cap, seed):
    # alpha is integral, so on a wall both |a| and eps|b|/2 are O(1) or exactly balanced
    scale = max(1.0, float(np.linalg.norm(section.a)) + 0.5 * section.epsilon * abs(section.b))
    if section.norm_lower_bound() <= 1e-12 * section.prefactor * scale:
        raise WallError(f"wall section of {section.alpha.tolist()} vanishes: the family crosses its wall")
    try:
        return degree(section.as_sphere_map(), level=level, cap=cap, seed=seed)
    except VanishingError as exc:
        raise WallError(f"wall section of {section.alpha.tolist()} vanishes: {exc}") from exc


def sw_of_family(alpha, family, level=DEFAULT_START_LEVEL, cap=DEFAULT_CAP_LEVEL, seed=0):
    """``sw_alpha(h) = deg w(alpha)`` for a root ``alpha``."""
    lattice = family.lattice
    alpha = _as_root(alpha, lattice)
    cert = _degree_of_section(wall_section(family, alpha), level, cap, seed)
    return SwResult(value=int(cert.degree), certificate=cert, alpha=alpha)


def expected_entry(alpha, delta):
    alpha, delta = np.asarray(alpha), np.asarray(delta)
    if np.array_equal(alpha, delta):
        return 1
    if np.array_equal(alpha, -delta):
        return -1
    return 0


# --------------------------------------------------------------------------
# matrices


@dataclasses.dataclass(frozen=True)
class SwMatrix:
    """Entry ``[i][j] = sw_{alphas[i]}(h_{deltas[j]})``; ``None`` marks a hole."""

    deltas: np.ndarray
    alphas: np.ndarray
    entries: list
    certificates: list
    errors: list
    families: tuple = dataclasses.field(default=(), repr=False, compare=False)
    column_errors: tuple = ()
    lattice: object = dataclasses.field(default=K3, repr=False, compare=False)

    @property
    def shape(self):
        return (len(self.alphas), len(self.deltas))

    def expected(self):
        return [[expected_entry(a, d) for d in self.deltas] for a in self.alphas]

    def holes(self):
        return [(i, j) for i, row in enumerate(self.entries) for j, v in enumerate(row) if v is None]

    def mismatches(self):
        exp = self.expected()
        return [(i, j) for i, row in enumerate(self.entries) for j, v in enumerate(row)
                if v is not None and v != exp[i][j]]

    def all_agreed(self):
        return all(c is not None and c.agreement and c.companion is not None and c.companion.degree == v
                   for row_c, row_v in zip(self.certificates, self.entries)
                   for c, v in zip(row_c, row_v) if v is not None)

    def pattern_holds(self):
        return not self.holes() and not self.mismatches() and self.all_agreed()

    def as_array(self):
        if self.holes():
            raise InputError(f"matrix has {len(self.holes())} holes")
        return np.array(self.entries, dtype=np.int64).reshape(self.shape)

    def to_dict(self):
        fmt = self.lattice.format_vector
        return {
            "normalization": dict(NORMALIZATION, analytic_input=ANALYTIC_INPUT),
            "deltas": [d.tolist() for d in self.deltas],
            "alphas": [a.tolist() for a in self.alphas],
            "delta_labels": [fmt(d) for d in self.deltas],
            "alpha_labels": [fmt(a) for a in self.alphas],
            "entries": self.entries,
            "expected": self.expected(),
            "holes": [list(h) for h in self.holes()],
            "errors": self.errors,
            "column_errors": list(self.column_errors),
            "pattern_holds": self.pattern_holds(),
            "families": [None if f is None else {"base_point": f.base.to_dict(),
                                                 "epsilon": f.epsilon,
                                                 "wall_avoidance": f.avoidance.to_dict() if f.avoidance else None}
                         for f in self.families],
            "certificates": [[None if c is None else c.to_dict() for c in row] for row in self.certificates],
        }

    def to_csv(self):
        buf = io.StringIO()
        labels = [self.lattice.format_vector(d) for d in self.deltas]
        buf.write("alpha," + ",".join(f'"{s}"' for s in labels) + "\n")
        for a, row in zip(self.alphas, self.entries):
            cells = ["" if v is None else str(v) for v in row]
            buf.write(f'"{self.lattice.format_vector(a)}",' + ",".join(cells) + "\n")
        return buf.getvalue()


def build_family(delta, roots, seed=0, epsilon=0.1, grid_level=5):
    """Certified sphere family over a fresh base point on the wall of ``delta``."""
    base = construct_base_point(delta, roots, seed=seed, lattice=roots.lattice)
    return certify_family(base, roots, epsilon=epsilon, grid_level=grid_level, lattice=roots.lattice)


def _matrix_from_families(deltas, alphas, families, column_errors, lattice, level, cap, seed):
    entries, certs, errors = [], [], []
    for alpha in alphas:
        row_v, row_c, row_e = [], [], []
        for fam, col_err in zip(families, column_errors):
            if fam is None:
                row_v.append(None)
                row_c.append(None)
                row_e.append(col_err)
                continue
            try:
                res = sw_of_family(alpha, fam, level=level, cap=cap, seed=seed)
            except K3SWError as exc:
                row_v.append(None)
                row_c.append(None)
                row_e.append(f"{type(exc).__name__}: {exc}")
                continue
            row_v.append(res.value)
            row_c.append(res.certificate)
            row_e.append(None)
        entries.append(row_v)
        certs.append(row_c)
        errors.append(row_e)
    return SwMatrix(deltas=deltas, alphas=alphas, entries=entries, certificates=certs, errors=errors,
                    families=tuple(families), column_errors=tuple(column_errors), lattice=lattice)


def _root_array(vectors, roots, what):
    lattice = roots.lattice
    out = []
    for v in vectors:
        v = _as_root(v, lattice)
        if v not in roots:
            raise InputError(f"{what} {lattice.format_vector(v)} is not in the enumerated root set")
        out.append(v)
    return np.array(out, dtype=np.int64).reshape(-1, lattice.rank)


def sw_matrix(deltas, alphas, roots, seed=0, epsilon=0.1, grid_level=5,
              level=DEFAULT_START_LEVEL, cap=DEFAULT_CAP_LEVEL):
    """Compute ``sw_alpha(h_delta)`` for every pair, each family over its own base point.

    Entries that fail are left as holes with the error recorded; the matrix
    always completes.
    """
    deltas = _root_array(deltas, roots, "delta")
    alphas = _root_array(alphas, roots, "alpha")
    for d in deltas:
        if not roots.is_positive(d):
            raise InputError(f"delta {roots.lattice.format_vector(d)} is not in Delta+")
    families, col_errors = [], []
    for d in deltas:
        try:
            families.append(build_family(d, roots, seed=seed, epsilon=epsilon, grid_level=grid_level))
            col_errors.append(None)
        except K3SWError as exc:
            families.append(None)
            col_errors.append(f"{type(exc).__name__}: {exc}")
    return _matrix_from_families(deltas, alphas, families, col_errors, roots.lattice, level, cap, seed)


# --------------------------------------------------------------------------
# finiteness


@dataclasses.dataclass(frozen=True)
class ScanResult:
    delta: np.ndarray
    side: str
    scanned: int
    nonzero: list  # (root, degree)
    errors: list  # (root, message)
    delta_in_scan: bool
    bound: float
    warnings: tuple = ()

    @property
    def expected_nonzero(self):
        if not self.delta_in_scan:
            return []
        return [(self.delta, 1)] if self.side == "plus" else [(-self.delta, -1)]

    def pattern_holds(self):
        exp = self.expected_nonzero
        return (not self.errors and len(self.nonzero) == len(exp)
                and all(np.array_equal(r, er) and d == ed for (r, d), (er, ed) in zip(self.nonzero, exp)))

    def to_dict(self, lattice=K3):
        return {
            "normalization": dict(NORMALIZATION, analytic_input=ANALYTIC_INPUT),
            "delta": self.delta.tolist(),
            "side": self.side,
            "bound": self.bound,
            "scanned": self.scanned,
            "delta_in_scan": self.delta_in_scan,
            "nonzero": [{"root": r.tolist(), "label": lattice.format_vector(r), "degree": d}
                        for r, d in self.nonzero],
            "errors": [{"root": r.tolist(), "error": e} for r, e in self.errors],
            "warnings": list(self.warnings),
            "pattern_holds": self.pattern_holds(),
        }

    def to_csv(self, lattice=K3):
        buf = io.StringIO()
        buf.write("root,degree\n")
        for r, d in self.nonzero:
            buf.write(f'"{lattice.format_vector(r)}",{d}\n')
        return buf.getvalue()


def finiteness_scan(family, roots, side="plus", level=DEFAULT_START_LEVEL, cap=DEFAULT_CAP_LEVEL, seed=0):
    """Degree of ``w(alpha)`` for every enumerated ``alpha`` in Delta+ (or Delta- with ``side="minus"``)."""
    if side not in ("plus", "minus"):
        raise InputError("side must be 'plus' or 'minus'")
    pool = roots.delta_plus if side == "plus" else roots.delta_minus
    delta = family.delta
    target = delta if side == "plus" else -delta
    in_scan = bool(np.any(np.all(pool == target, axis=1))) if len(pool) else False
    warnings = () if in_scan else (
        f"{roots.lattice.format_vector(target)} lies outside the scanned roots (bound {roots.bound})",)
    nonzero, errors = [], []
    for alpha in pool:
        try:
            res = sw_of_family(alpha, family, level=level, cap=cap, seed=seed)
        except K3SWError as exc:
            errors.append((alpha, f"{type(exc).__name__}: {exc}"))
            continue
        if res.value:
            nonzero.append((alpha, res.value))
    return ScanResult(delta=delta, side=side, scanned=int(len(pool)), nonzero=nonzero, errors=errors,
                      delta_in_scan=in_scan, bound=float(roots.bound), warnings=warnings)


# --------------------------------------------------------------------------
# kappa flip


DEFAULT_REFLECTION = np.diag([1.0, 1.0, -1.0])


@dataclasses.dataclass(frozen=True)
class KappaVerdict:
    passed: bool
    c: np.ndarray
    reflection: np.ndarray
    original: object
    reflected: object

    def to_dict(self):
        return {
            "passed": self.passed,
            "c": self.c.tolist(),
            "reflection": self.reflection.tolist(),
            "original": self.original.to_dict(),
            "reflected": self.reflected.to_dict(),
        }


def _check_reflection(reflection):
    r = np.asarray(reflection, dtype=np.float64)
    if r.shape != (3, 3) or np.abs(r @ r.T - np.eye(3)).max() > 1e-12:
        raise InputError("reflection must be an orthogonal 3x3 matrix")
    if np.linalg.det(r) > 0:
        raise InputError("reflection must reverse orientation (det -1)")
    return r


def reflection_flip(sphere_map, reflection=DEFAULT_REFLECTION, level=DEFAULT_START_LEVEL,
                    cap=DEFAULT_CAP_LEVEL, seed=0):
    """Certificates for ``w`` and ``R o w``."""
    r = _check_reflection(reflection)
    before = degree(sphere_map, level=level, cap=cap, seed=seed)
    after = degree(compose_linear(r, sphere_map), level=level, cap=cap, seed=seed)
    return before, after


def kappa_flip_check(family, c, reflection=DEFAULT_REFLECTION, topology=K3_TOPOLOGY,
                     level=DEFAULT_START_LEVEL, cap=DEFAULT_CAP_LEVEL, seed=0):
    """Check ``deg(R o w(c)) = -deg w(c)`` for ``c`` with ``c^2 = N``.

    ``w(c) = 2 pi c^+`` in the theta basis, so ``c = 2 alpha`` reproduces the
    wall section of the root ``alpha``.
    """
    lattice = family.lattice
    c = np.asarray(c)
    if c.shape != (lattice.rank,) or not np.issubdtype(c.dtype, np.integer):
        raise InputError("c must be an integral vector of length 22")
    c = c.astype(np.int64)
    n_val = validity_constant(topology.sigma)
    if lattice.norm2(c) != n_val:
        raise InputError(f"c^2 = {lattice.norm2(c)} but the valid square is N = {n_val}")
    r = _check_reflection(reflection)
    section = wall_section(family, c, prefactor=FOUR_PI / 2.0)
    before = _degree_of_section(section, level, cap, seed)
    try:
        after = degree(compose_linear(r, section.as_sphere_map()), level=level, cap=cap, seed=seed)
    except VanishingError as exc:
        raise WallError(str(exc)) from exc
    return KappaVerdict(passed=after.degree == -before.degree, c=c, reflection=r, original=before,
                        reflected=after)


# --------------------------------------------------------------------------
# isometry equivariance


def block_swap_isometry(a="U1", b="U2", lattice=K3):
    """Permutation matrix exchanging two blocks of the same type."""
    sa, sb = lattice.blocks[a], lattice.blocks[b]
    if sa.stop - sa.start != sb.stop - sb.start:
        raise InputError(f"blocks {a} and {b} have different ranks")
    perm = np.arange(lattice.rank)
    perm[sa], perm[sb] = np.arange(sb.start, sb.stop), np.arange(sa.start, sa.stop)
    m = np.zeros((lattice.rank, lattice.rank), dtype=np.int64)
    m[perm, np.arange(lattice.rank)] = 1
    return m


def block_negation_isometry(name="U1", lattice=K3):
    m = np.eye(lattice.rank, dtype=np.int64)
    sl = lattice.blocks[name]
    m[sl, sl] *= -1
    return m


@dataclasses.dataclass(frozen=True)
class EquivarianceVerdict:
    passed: bool
    transported_entries: list
    canonical: SwMatrix
    delta_signs: list
    alpha_signs: list
    predicted: list
    mismatches: list

    def to_dict(self):
        return {
            "passed": self.passed,
            "transported_entries": self.transported_entries,
            "delta_signs": self.delta_signs,
            "alpha_signs": self.alpha_signs,
            "predicted": self.predicted,
            "canonical": self.canonical.to_dict(),
            "mismatches": self.mismatches,
        }


def isometry_equivariance_check(iso, matrix, roots, seed=0, epsilon=0.1, grid_level=5,
                                level=DEFAULT_START_LEVEL, cap=DEFAULT_CAP_LEVEL):
    """Transport a computed matrix by a lattice isometry and compare.

    Two recomputations are made.  First every input (frames, delta, alpha)
    is pushed forward by ``iso``; the entries must not change.  Second the
    images are replaced by their Delta+ representatives
    ``sigma_j iso(delta_j)`` and ``tau_i iso(alpha_i)`` and a fresh matrix is
    built over new base points; it must equal ``tau_i sigma_j S[i][j]``.
    """
    lattice = roots.lattice
    iso = np.asarray(iso)
    if not np.issubdtype(iso.dtype, np.integer) or not lattice.is_isometry(iso):
        raise InputError("iso does not preserve the intersection form")
    iso = iso.astype(np.int64)
    if matrix.holes():
        raise InputError("cannot transport a matrix with holes")

    transported = []
    for alpha in matrix.alphas:
        row = []
        for fam in matrix.families:
            try:
                row.append(sw_of_family(iso @ alpha, transported_family(fam, iso), level=level, cap=cap,
                                        seed=seed).value)
            except K3SWError as exc:
                row.append(f"{type(exc).__name__}: {exc}")
        transported.append(row)

    new_deltas, sigma = [], []
    for d in matrix.deltas:
        image = iso @ d
        if image not in roots:
            raise InputError(f"image {lattice.format_vector(image)} lies outside the enumerated roots")
        s, r = positive_representative(roots, image)
        sigma.append(s)
        new_deltas.append(r)
    new_alphas, tau = [], []
    for a in matrix.alphas:
        image = iso @ a
        if image not in roots:
            raise InputError(f"image {lattice.format_vector(image)} lies outside the enumerated roots")
        t = 1 if roots.is_positive(a) == roots.is_positive(image) else -1
        tau.append(t)
        new_alphas.append(t * image)
    canonical = sw_matrix(new_deltas, new_alphas, roots, seed=seed, epsilon=epsilon, grid_level=grid_level,
                          level=level, cap=cap)
    predicted = [[tau[i] * sigma[j] * matrix.entries[i][j] for j in range(len(sigma))] for i in range(len(tau))]
    mismatches = []
    for i in range(len(tau)):
        for j in range(len(sigma)):
            if transported[i][j] != matrix.entries[i][j]:
                mismatches.append({"kind": "transported", "i": i, "j": j,
                                   "got": transported[i][j], "want": matrix.entries[i][j]})
            if canonical.entries[i][j] != predicted[i][j]:
                mismatches.append({"kind": "canonical", "i": i, "j": j,
                                   "got": canonical.entries[i][j], "want": predicted[i][j]})
    passed = not mismatches and not canonical.holes() and canonical.all_agreed()
    return EquivarianceVerdict(passed=passed, transported_entries=transported, canonical=canonical,
                               delta_signs=sigma, alpha_signs=tau, predicted=predicted, mismatches=mismatches)


def scaling_invariance(section, lam, level=DEFAULT_START_LEVEL, cap=DEFAULT_CAP_LEVEL, seed=0):
    """Degrees of ``w`` and ``lam * w`` for ``lam > 0``."""
    if not lam > 0 or not math.isfinite(lam):
        raise InputError("scale must be a positive finite number")
    scaled = dataclasses.replace(section, prefactor=section.prefactor * lam)
    return (_degree_of_section(section, level, cap, seed).degree,
            _degree_of_section(scaled, level, cap, seed).degree)
