"""The K3 lattice II(3,19) and its roots.

Basis order is ``e1, f1, e2, f2, e3, f3`` (three hyperbolic planes U)
followed by two copies of E8(-1) written in simple-root coordinates.
Integral vectors are ``int64`` arrays of length 22; real-span vectors are
``float64`` arrays, or ``object`` arrays of :class:`fractions.Fraction`
when they must stay exact.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import re
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import kernels
from .errors import InputError, ResourceError, SplittingError

RANK = 22
DEFAULT_VECTOR_CAP = 10**6

# Bourbaki numbering: chain 1-3-4-5-6-7-8 with node 2 attached to node 4.
E8_SIMPLE_ROOTS = np.array(
    [
        [0.5, -0.5, -0.5, -0.5, -0.5, -0.5, -0.5, 0.5],
        [1, 1, 0, 0, 0, 0, 0, 0],
        [-1, 1, 0, 0, 0, 0, 0, 0],
        [0, -1, 1, 0, 0, 0, 0, 0],
        [0, 0, -1, 1, 0, 0, 0, 0],
        [0, 0, 0, -1, 1, 0, 0, 0],
        [0, 0, 0, 0, -1, 1, 0, 0],
        [0, 0, 0, 0, 0, -1, 1, 0],
    ],
    dtype=np.float64,
)
E8_CARTAN = np.rint(E8_SIMPLE_ROOTS @ E8_SIMPLE_ROOTS.T).astype(np.int64)
HYPERBOLIC = np.array([[0, 1], [1, 0]], dtype=np.int64)

BLOCKS = {
    "U1": slice(0, 2),
    "U2": slice(2, 4),
    "U3": slice(4, 6),
    "E8a": slice(6, 14),
    "E8b": slice(14, 22),
}


def _block_diag(mats):
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n), dtype=np.int64)
    k = 0
    for m in mats:
        s = m.shape[0]
        out[k:k + s, k:k + s] = m
        k += s
    return out


def exact_det(matrix):
    """Determinant of an integer matrix by fraction-free Bareiss elimination."""
    a = [[int(v) for v in row] for row in np.asarray(matrix)]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


@dataclasses.dataclass(frozen=True)
class K3Lattice:
    """Intersection form on H^2(K3; Z) in a fixed basis."""

    gram: np.ndarray
    basis_labels: tuple
    blocks: dict

    @classmethod
    def standard(cls):
        gram = _block_diag([HYPERBOLIC] * 3 + [-E8_CARTAN] * 2)
        labels = ("e1", "f1", "e2", "f2", "e3", "f3")
        labels += tuple(f"E8a{i}" for i in range(1, 9)) + tuple(f"E8b{i}" for i in range(1, 9))
        gram.setflags(write=False)
        return cls(gram=gram, basis_labels=labels, blocks=dict(BLOCKS))

    @property
    def rank(self):
        return self.gram.shape[0]

    @cached_property
    def euclidean_form(self):
        """|gram|: every negative-definite block sign-flipped, U blocks become I2."""
        mats = []
        for name, sl in self.blocks.items():
            block = self.gram[sl, sl]
            mats.append(np.eye(2, dtype=np.int64) if name.startswith("U") else -block)
        form = _block_diag(mats)
        form.setflags(write=False)
        return form

    @cached_property
    def inverse_gram(self):
        inv = np.rint(np.linalg.inv(self.gram)).astype(np.int64)
        if not np.array_equal(inv @ self.gram, np.eye(self.rank, dtype=np.int64)):
            raise ArithmeticError("gram is not unimodular")
        return inv

    def determinant(self):
        return exact_det(self.gram)

    def signature(self):
        eig = np.linalg.eigvalsh(self.gram.astype(np.float64))
        return int((eig > 0).sum()), int((eig < 0).sum())

    def _check(self, x):
        x = np.asarray(x)
        if x.shape[-1] != self.rank:
            raise InputError(f"expected vectors with {self.rank} coordinates, got shape {x.shape}")
        return x

    def pairing(self, x, y):
        """``x^T G y``; exact for integer or Fraction inputs."""
        x, y = self._check(x), self._check(y)
        if x.dtype == object or y.dtype == object:
            return np.dot(np.dot(x.astype(object), self.gram.astype(object)), y.astype(object))
        out = x @ self.gram @ y.T if y.ndim > 1 else x @ self.gram @ y
        if np.ndim(out) == 0:
            return int(out) if np.issubdtype(np.asarray(out).dtype, np.integer) else float(out)
        return out

    def norm2(self, x):
        x = self._check(x)
        if x.ndim == 1:
            return self.pairing(x, x)
        return np.einsum("ij,jk,ik->i", x, self.gram, x)

    def is_isometry(self, matrix):
        m = np.asarray(matrix)
        if m.shape != (self.rank, self.rank):
            return False
        if not np.issubdtype(m.dtype, np.integer):
            if not np.array_equal(m, np.rint(m)):
                return False
            m = np.rint(m).astype(np.int64)
        return bool(np.array_equal(m.T @ self.gram @ m, self.gram))

    def basis_vector(self, label):
        v = np.zeros(self.rank, dtype=np.int64)
        v[self.basis_labels.index(label)] = 1
        return v

    def parse_vector(self, text):
        """Parse ``"e1-f1"``, ``"2*E8a3 - E8b1"`` or a JSON list of 22 integers."""
        text = text.strip()
        if text.startswith("["):
            try:
                vals = json.loads(text)
            except json.JSONDecodeError as exc:
                raise InputError(f"malformed vector {text!r}") from exc
            if len(vals) != self.rank or not all(isinstance(t, int) for t in vals):
                raise InputError(f"vector must be {self.rank} integers: {text!r}")
            return np.array(vals, dtype=np.int64)
        compact = text.replace(" ", "")
        if not compact or not re.fullmatch(r"([+-]?(\d+\*?)?[A-Za-z0-9]+)+", compact):
            raise InputError(f"malformed vector expression {text!r}")
        v = np.zeros(self.rank, dtype=np.int64)
        for sign, coef, label in re.findall(r"([+-]?)(\d+)?\*?([A-Za-z][A-Za-z0-9]*)", compact):
            if label not in self.basis_labels:
                raise InputError(f"unknown basis label {label!r}")
            v[self.basis_labels.index(label)] += (-1 if sign == "-" else 1) * int(coef or 1)
        return v

    def format_vector(self, x):
        terms = []
        for label, c in zip(self.basis_labels, np.asarray(x).tolist()):
            if c:
                mag = "" if abs(c) == 1 else f"{abs(c)}*"
                terms.append(("-" if c < 0 else "+") + mag + label)
        if not terms:
            return "0"
        s = "".join(terms)
        return s[1:] if s.startswith("+") else s

    def blocks_touched(self, x):
        x = np.asarray(x)
        return tuple(name for name, sl in self.blocks.items() if np.any(x[sl] != 0))


K3 = K3Lattice.standard()


# --------------------------------------------------------------------------
# roots


@dataclasses.dataclass(frozen=True)
class RootSet:
    roots: np.ndarray
    bound: float
    lattice: K3Lattice = dataclasses.field(default=K3, repr=False)
    blocks: tuple = tuple(BLOCKS)
    splitting_vector: np.ndarray | None = None
    positive: np.ndarray | None = None

    def __len__(self):
        return len(self.roots)

    @cached_property
    def _index(self):
        return {tuple(r): i for i, r in enumerate(self.roots.tolist())}

    def index(self, vector):
        key = tuple(int(t) for t in np.asarray(vector).tolist())
        try:
            return self._index[key]
        except KeyError:
            raise InputError(f"{self.lattice.format_vector(vector)} is not in the enumerated root set") from None

    def __contains__(self, vector):
        return tuple(int(t) for t in np.asarray(vector).tolist()) in self._index

    def _need_split(self):
        if self.positive is None:
            raise InputError("root set has not been split; call split_roots first")

    @property
    def positive_indices(self):
        self._need_split()
        return np.flatnonzero(self.positive)

    @property
    def delta_plus(self):
        self._need_split()
        return self.roots[self.positive]

    @property
    def delta_minus(self):
        self._need_split()
        return self.roots[~self.positive]

    def is_positive(self, vector):
        self._need_split()
        return self.lattice.pairing(np.asarray(vector, dtype=np.int64), self.splitting_vector) > 0

    def to_dict(self):
        return {
            "basis": list(self.lattice.basis_labels),
            "gram": self.lattice.gram.tolist(),
            "blocks": list(self.blocks),
            "roots": self.roots.tolist(),
            "bound": self.bound,
            "v": None if self.splitting_vector is None else np.asarray(self.splitting_vector).tolist(),
            "delta_plus_indices": [] if self.positive is None else self.positive_indices.tolist(),
        }

    @classmethod
    def from_dict(cls, doc, lattice=K3):
        if doc["gram"] != lattice.gram.tolist():
            raise InputError("root set was produced for a different intersection form")
        roots = np.asarray(doc["roots"], dtype=np.int64).reshape(-1, lattice.rank)
        v = doc.get("v")
        positive = None
        if v is not None:
            positive = np.zeros(len(roots), dtype=bool)
            positive[np.asarray(doc["delta_plus_indices"], dtype=np.int64)] = True
            v = np.asarray(v, dtype=np.int64)
        return cls(roots=roots, bound=float(doc["bound"]), lattice=lattice,
                   blocks=tuple(doc.get("blocks", BLOCKS)), splitting_vector=v, positive=positive)


def _lex_sorted(vectors):
    if len(vectors) == 0:
        return vectors
    order = np.lexsort(vectors.T[::-1])
    return vectors[order]


def _block_shells(lattice, names, form, bound2, cap):
    """Per block: dict (form value, euclidean value) -> block vectors."""
    shells = []
    for name in names:
        sl = lattice.blocks[name]
        e_block = form[sl, sl]
        vecs, count = kernels.short_vectors(e_block, bound2, cap)
        if count > cap:
            raise ResourceError(f"block {name}: more than {cap} short vectors below bound")
        q = np.einsum("ij,jk,ik->i", vecs, lattice.gram[sl, sl], vecs)
        e = np.einsum("ij,jk,ik->i", vecs, e_block, vecs)
        groups = {}
        for key in sorted(set(zip(q.tolist(), np.round(e, 9).tolist()))):
            mask = (q == key[0]) & (np.abs(e - key[1]) < 1e-7)
            groups[key] = vecs[mask]
        shells.append((sl, groups))
    return shells


def _shell_combinations(shells, target, bound2):
    """Key tuples across blocks with total form value ``target`` and total euclidean <= bound2."""
    ratios = []
    for _, groups in shells:
        r = max((abs(q) / e for q, e in groups if e > 0), default=0.0)
        ratios.append(r)
    tail_ratio = [max(ratios[i:], default=0.0) for i in range(len(ratios) + 1)]
    tol = 1e-9 * max(1.0, bound2)

    def rec(i, q, e, keys):
        if i == len(shells):
            if q == target:
                yield tuple(keys)
            return
        for key in shells[i][1]:
            e2 = e + key[1]
            if e2 > bound2 + tol:
                continue
            q2 = q + key[0]
            if abs(target - q2) > tail_ratio[i + 1] * (bound2 - e2 + tol) + 1e-9:
                continue
            yield from rec(i + 1, q2, e2, keys + [key])

    yield from rec(0, 0, 0.0, [])


def _is_block_diagonal(lattice, form):
    mask = np.zeros_like(form, dtype=bool)
    for sl in lattice.blocks.values():
        mask[sl, sl] = True
    return not np.any(form[~mask])


def enumerate_roots(bound, euclidean_form=None, lattice=K3, blocks=None,
                    cap=DEFAULT_VECTOR_CAP, count_only=False):
    """All ``d`` with ``<d,d> = -2`` and euclidean norm ``sqrt(d.E.d) <= bound``.

    ``blocks`` restricts the search to vectors supported on the named
    blocks (coordinates elsewhere are zero).  The result is sorted
    lexicographically on coordinates.  With ``count_only`` the number of
    roots is returned instead and the cap is not applied.
    """
    if bound < 0:
        raise InputError("bound must be non-negative")
    names = tuple(blocks) if blocks is not None else tuple(lattice.blocks)
    unknown = [b for b in names if b not in lattice.blocks]
    if unknown:
        raise InputError(f"unknown blocks {unknown}")
    form = lattice.euclidean_form if euclidean_form is None else np.asarray(euclidean_form)
    if form.shape != lattice.gram.shape or not np.allclose(form, form.T):
        raise InputError("euclidean form must be a symmetric 22x22 matrix")
    if np.linalg.eigvalsh(form.astype(np.float64)).min() <= 0:
        raise InputError("euclidean form is not positive definite")
    bound2 = float(bound) ** 2

    if not _is_block_diagonal(lattice, form):
        keep = np.concatenate([np.arange(RANK)[lattice.blocks[b]] for b in names])
        sub = form[np.ix_(keep, keep)]
        vecs, count = kernels.short_vectors(sub, bound2, cap * 64)
        if count > cap * 64:
            raise ResourceError(f"more than {cap * 64} lattice vectors below bound (cap {cap})")
        full = np.zeros((len(vecs), RANK), dtype=np.int64)
        full[:, keep] = vecs
        roots = full[lattice.norm2(full) == -2] if len(full) else full
        if count_only:
            return len(roots)
        if len(roots) > cap:
            raise ResourceError(f"root enumeration exceeds vector cap {cap}")
        return RootSet(roots=_lex_sorted(roots), bound=float(bound), lattice=lattice, blocks=names)

    shells = _block_shells(lattice, names, form, bound2, max(cap, 1))
    combos = list(_shell_combinations(shells, -2, bound2))
    sizes = [int(np.prod([len(shells[i][1][k]) for i, k in enumerate(c)])) for c in combos]
    total = sum(sizes)
    if count_only:
        return total
    if total > cap:
        raise ResourceError(f"root enumeration would produce {total} vectors, exceeding vector cap {cap}")
    out = np.zeros((total, RANK), dtype=np.int64)
    row = 0
    for combo, size in zip(combos, sizes):
        parts = [shells[i][1][k] for i, k in enumerate(combo)]
        idx = np.indices([len(p) for p in parts]).reshape(len(parts), -1)
        for (sl, _), p, ix in zip(shells, parts, idx):
            out[row:row + size, sl] = p[ix]
        row += size
    return RootSet(roots=_lex_sorted(out), bound=float(bound), lattice=lattice, blocks=names)


def count_roots(bound, **kwargs):
    return enumerate_roots(bound, count_only=True, **kwargs)


# --------------------------------------------------------------------------
# splitting


def _primes(count, start):
    found = []
    n = start
    while len(found) < count:
        n += 1
        if n > 1 and all(n % p for p in range(2, int(n**0.5) + 1)):
            found.append(n)
    return found


def default_splitting_vector(lattice=K3):
    """Integral ``v`` with ``<v, x> = sum_k p_k x_k`` for distinct primes ``p_k``.

    The primes grow geometrically so that short integer combinations
    cannot cancel; vanishing is still checked per root by :func:`split_roots`.
    """
    primes = [_primes(1, int(1000 * 1.7**k))[0] for k in range(lattice.rank)]
    return lattice.inverse_gram @ np.array(primes, dtype=np.int64)


def split_roots(roots, v=None):
    """Fill ``positive`` with ``<v, d> > 0``; error on any root orthogonal to ``v``."""
    lattice = roots.lattice
    if v is None:
        v = default_splitting_vector(lattice)
    v = np.asarray(v)
    if v.shape != (lattice.rank,):
        raise InputError("splitting vector must have 22 coordinates")
    if len(roots) == 0:
        return dataclasses.replace(roots, splitting_vector=v, positive=np.zeros(0, dtype=bool))
    if np.issubdtype(v.dtype, np.integer):
        vals = roots.roots @ (lattice.gram @ v)
    else:
        vals = roots.roots.astype(np.float64) @ (lattice.gram @ v.astype(np.float64))
    zero = np.flatnonzero(vals == 0)
    if len(zero):
        bad = roots.roots[zero[0]]
        raise SplittingError(
            f"splitting vector is orthogonal to root {lattice.format_vector(bad)}; perturb v", root=bad
        )
    return dataclasses.replace(roots, splitting_vector=v, positive=vals > 0)


def positive_representative(roots, vector):
    """``(sign, r)`` with ``r = sign * vector`` in Delta+."""
    vector = np.asarray(vector, dtype=np.int64)
    return (1, vector) if roots.is_positive(vector) else (-1, -vector)


def pick_block_roots(roots, count=10):
    """Delta+ roots supported on single blocks, drawn round-robin across blocks.

    U blocks contribute their unique positive root; E8 blocks contribute
    simple roots in order.
    """
    lattice = roots.lattice
    per_block = {}
    for name in roots.blocks:
        sl = lattice.blocks[name]
        if name.startswith("U"):
            e, f = sl.start, sl.start + 1
            cands = [lattice.basis_vector(lattice.basis_labels[e]) - lattice.basis_vector(lattice.basis_labels[f])]
        else:
            cands = [lattice.basis_vector(lattice.basis_labels[k]) for k in range(sl.start, sl.stop)]
        per_block[name] = [positive_representative(roots, c)[1] for c in cands if c in roots]
    picked = []
    for tier in itertools.count():
        added = False
        for name in roots.blocks:
            lst = per_block[name]
            if tier < len(lst) and len(picked) < count:
                picked.append(lst[tier])
                added = True
        if len(picked) >= count or not added:
            break
    return picked


def as_fraction_vector(x):
    return np.array([Fraction(t) for t in np.asarray(x).tolist()], dtype=object)
