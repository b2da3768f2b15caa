"""Naive reference computations, independent of the package's enumeration code.

E8 is scanned in its standard coordinates (D8 plus the half-integer coset),
U by a plain box, and full-lattice counts come from convolving the
per-block (form value, euclidean norm) histograms.
"""

import collections
import itertools
import math

import numpy as np


def _coset_points(values, chunk_dims=3):
    """Cartesian power values^8, yielded in chunks to bound memory."""
    values = np.asarray(values)
    tail = np.array(list(itertools.product(values, repeat=8 - chunk_dims)))
    for head in itertools.product(values, repeat=chunk_dims):
        yield np.hstack([np.broadcast_to(head, (len(tail), chunk_dims)), tail])


def e8_standard_vectors(norm2_max):
    """All E8 vectors in standard coordinates with |v|^2 <= norm2_max, as float arrays."""
    m = int(math.floor(math.sqrt(norm2_max)))
    out = []
    ints = np.arange(-m, m + 1, dtype=np.float64)
    halves = np.arange(-m - 1, m + 1, dtype=np.float64) + 0.5
    halves = halves[np.abs(halves) <= math.sqrt(norm2_max) + 1e-12]
    for values in (ints, halves):
        for g in _coset_points(values):
            n = (g * g).sum(1)
            keep = (n <= norm2_max + 1e-9) & (np.rint(g.sum(1)) % 2 == 0)
            out.append(g[keep])
    return np.vstack(out)


def e8_norm_histogram(norm2_max):
    v = e8_standard_vectors(norm2_max)
    n = np.rint((v * v).sum(1)).astype(int)
    return collections.Counter(n.tolist())


def u_box_scan(norm2_max):
    """(form value 2ab, euclidean a^2 + b^2) histogram of U by brute force."""
    m = int(math.floor(math.sqrt(norm2_max)))
    c = collections.Counter()
    for a in range(-m, m + 1):
        for b in range(-m, m + 1):
            if a * a + b * b <= norm2_max:
                c[(2 * a * b, a * a + b * b)] += 1
    return c


def u_roots(norm2_max):
    m = int(math.floor(math.sqrt(norm2_max)))
    return sorted((a, b) for a in range(-m, m + 1) for b in range(-m, m + 1)
                  if 2 * a * b == -2 and a * a + b * b <= norm2_max)


def _convolve(a, b, norm2_max):
    out = collections.Counter()
    for (q1, e1), c1 in a.items():
        for (q2, e2), c2 in b.items():
            if e1 + e2 <= norm2_max:
                out[(q1 + q2, e1 + e2)] += c1 * c2
    return out


def k3_root_count(bound, blocks=("U1", "U2", "U3", "E8a", "E8b")):
    r2 = bound * bound + 1e-9
    u = u_box_scan(r2)
    e8 = collections.Counter({(-k, k): v for k, v in e8_norm_histogram(r2).items()})
    total = collections.Counter({(0, 0): 1})
    for name in blocks:
        total = _convolve(total, u if name.startswith("U") else e8, r2)
    return sum(c for (q, e), c in total.items() if q == -2)
