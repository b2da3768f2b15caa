import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from k3sw import sw
from k3sw.errors import ConventionError, InputError, WallError
from k3sw.family import SphereFamily, wall_section
from k3sw.lattice import K3
from k3sw.period import construct_base_point


# ---- topology formulas


def test_expected_dimension_examples(picks):
    assert sw.expected_dimension(picks[0], 3, 0, -16) == -2
    assert sw.expected_dimension(np.zeros(22, dtype=np.int64), 3, 0, -16) == 0


@given(arrays(np.int64, (22,), elements=st.integers(-10**4, 10**4)))
def test_dimension_law(u):
    assert sw.expected_dimension(u) == K3.norm2(u)


def test_dimension_rejects_non_characteristic():
    with pytest.raises(ConventionError):
        sw.expected_dimension(None, 3, 0, -16, c1=K3.parse_vector("e1+f1"))
    with pytest.raises(ConventionError):
        sw.expected_dimension(K3.parse_vector("e1"), 3, 0, -15)


def test_validity_constant():
    assert sw.validity_constant(-16) == -8
    assert sw.validity_constant(-8) == 0
    assert sw.validity_constant(0) == 8


def test_conjugation_sign():
    assert sw.conjugation_sign(3, 0, 1) == -1
    assert sw.conjugation_sign(5, 0, 1) == 1
    with pytest.raises(ConventionError):
        sw.conjugation_sign(3, 1, 1)


def test_chamber_independence_predicate():
    assert not sw.chamber_independent(3, 1)
    assert sw.chamber_independent(3, 0) and sw.chamber_independent(4, 1)


def test_spinc_class(picks):
    s = sw.SpinCClass(picks[2])
    assert np.array_equal(s.c1, 2 * picks[2])
    assert s.dimension == -2 and s.is_valid
    assert s.conjugate().dimension == -2
    assert not sw.SpinCClass(np.zeros(22, dtype=np.int64)).is_valid
    with pytest.raises(InputError):
        sw.SpinCClass(np.zeros(21, dtype=np.int64))


# ---- entries


def test_sw_of_family_examples(family, roots15):
    r = sw.sw_of_family(family.delta, family)
    assert r.value == 1 and r.certificate.agreement and "Weitzenb" in r.analytic_input
    assert sw.sw_of_family(-family.delta, family).value == -1
    others = [a for a in roots15.delta_plus if not np.array_equal(a, family.delta)]
    assert all(sw.sw_of_family(a, family).value == 0 for a in others[::11])


def test_sw_of_family_requires_root(family):
    with pytest.raises(InputError):
        sw.sw_of_family(K3.parse_vector("e1+f1"), family)
    with pytest.raises(InputError):
        sw.sw_of_family(np.zeros(22), family)


def test_crossed_wall_is_an_error(roots15, picks):
    # move the frame onto the wall of a second root gamma orthogonal to delta
    from k3sw.period import orthonormalize_in_subspace

    delta, gamma = picks[0], picks[1]
    assert K3.pairing(delta, gamma) == 0
    base = construct_base_point(delta, roots15, seed=0)
    th = base.theta + np.outer(base.theta @ (K3.gram @ gamma), gamma) / 2.0
    frame = orthonormalize_in_subspace(th, delta)
    assert np.abs(frame.theta @ (K3.gram @ gamma)).max() < 1e-12
    import dataclasses

    fam = SphereFamily(base=dataclasses.replace(base, frame=frame), epsilon=0.1)
    with pytest.raises(WallError):
        sw.sw_of_family(gamma, fam)
    assert sw.sw_of_family(delta, fam).value == 1


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 485))
def test_antisymmetry_in_alpha(family, roots15, k):
    a = roots15.roots[k]
    assert sw.sw_of_family(-a, family).value == -sw.sw_of_family(a, family).value


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 485), st.floats(1e-3, 1e3))
def test_scaling_invariance(family, roots15, k, lam):
    d0, d1 = sw.scaling_invariance(wall_section(family, roots15.roots[k]), lam)
    assert d0 == d1


def test_bound_stability(family, roots15, roots2):
    # a family certified against a larger bound gives the same entries on the old roots
    big = sw.build_family(family.delta, roots2, seed=0)
    for a in roots15.delta_plus[::7]:
        assert sw.sw_of_family(a, big).value == sw.sw_of_family(a, family).value


# ---- matrices


def test_identity_on_u_block_roots(roots15):
    from k3sw.lattice import enumerate_roots, pick_block_roots, split_roots

    u_roots = split_roots(enumerate_roots(1.5, blocks=["U1", "U2", "U3"]))
    picks3 = pick_block_roots(u_roots, 3)
    picks5 = pick_block_roots(roots15, 5)
    m = sw.sw_matrix(picks5, picks5, roots15)
    assert m.pattern_holds() and np.array_equal(m.as_array(), np.eye(5, dtype=np.int64))
    assert len(picks3) == 3


def test_matrix_with_mirror(matrix10):
    a = matrix10.as_array()
    assert np.array_equal(a[:10], np.eye(10, dtype=np.int64))
    assert np.array_equal(a[10:], -np.eye(10, dtype=np.int64))
    assert matrix10.pattern_holds() and matrix10.all_agreed()


def test_empty_alphas(roots15, picks):
    m = sw.sw_matrix(picks[:2], [], roots15)
    assert m.shape == (0, 2) and m.entries == [] and m.pattern_holds()


def test_matrix_rejects_bad_inputs(roots15, picks):
    with pytest.raises(InputError):
        sw.sw_matrix(picks[:1], [K3.parse_vector("e1+f1")], roots15)
    with pytest.raises(InputError):
        sw.sw_matrix([-picks[0]], picks[:1], roots15)
    with pytest.raises(InputError):
        sw.sw_matrix(picks[:1], [K3.parse_vector("e1+f1+E8a1+E8b1")], roots15)


def test_matrix_holes_are_flagged(roots15, picks, monkeypatch):
    real = sw.sw_of_family

    def flaky(alpha, fam, **kw):
        if np.array_equal(alpha, picks[1]):
            raise WallError("synthetic")
        return real(alpha, fam, **kw)

    monkeypatch.setattr(sw, "sw_of_family", flaky)
    m = sw.sw_matrix(picks[:2], picks[:2], roots15)
    assert m.holes() == [(1, 0), (1, 1)]
    assert not m.pattern_holds()
    assert "WallError" in m.errors[1][0]
    doc = json.loads(json.dumps(m.to_dict()))
    assert doc["holes"] == [[1, 0], [1, 1]] and doc["pattern_holds"] is False


def test_matrix_serialization(matrix10):
    doc = json.loads(json.dumps(matrix10.to_dict()))
    assert {"normalization", "deltas", "alphas", "entries", "certificates"} <= set(doc)
    assert doc["normalization"]["pinned"] == "sw_delta(h_delta) = +1"
    assert all(c["agreement"] for row in doc["certificates"] for c in row)
    csv = matrix10.to_csv().splitlines()
    assert len(csv) == 21 and csv[1].split(",")[1] == "1"


# ---- finiteness


def test_finiteness_scan(family, roots15):
    res = sw.finiteness_scan(family, roots15)
    assert res.scanned == 243
    assert len(res.nonzero) == 1
    (root, deg), = res.nonzero
    assert np.array_equal(root, family.delta) and deg == 1
    assert res.pattern_holds()
    minus = sw.finiteness_scan(family, roots15, side="minus")
    (root, deg), = minus.nonzero
    assert np.array_equal(root, -family.delta) and deg == -1 and minus.pattern_holds()


def test_finiteness_scan_empty(family):
    from k3sw.lattice import enumerate_roots, split_roots

    empty = split_roots(enumerate_roots(0))
    res = sw.finiteness_scan(family, empty)
    assert res.scanned == 0 and res.nonzero == [] and res.warnings and res.pattern_holds()
    with pytest.raises(InputError):
        sw.finiteness_scan(family, empty, side="sideways")


# ---- kappa


def test_kappa_flip(family, roots15):
    v = sw.kappa_flip_check(family, 2 * family.delta)
    assert v.passed and v.original.degree == 1 and v.reflected.degree == -1
    other = roots15.delta_plus[5]
    v = sw.kappa_flip_check(family, 2 * other)
    assert v.passed and v.original.degree == 0 == v.reflected.degree
    assert json.loads(json.dumps(v.to_dict()))["passed"]


def test_kappa_prefactor_reproduces_wall_section(family):
    # w(c) = 2 pi c+ with c = 2 delta equals 4 pi delta+
    from k3sw.family import FOUR_PI

    x = np.array([[0.0, 0.6, 0.8]])
    assert np.allclose(wall_section(family, 2 * family.delta, prefactor=FOUR_PI / 2)(x),
                       wall_section(family, family.delta)(x))


def test_kappa_rejects_bad_inputs(family):
    with pytest.raises(InputError):
        sw.kappa_flip_check(family, family.delta)  # square -2, not N = -8
    with pytest.raises(InputError):
        sw.kappa_flip_check(family, 2 * family.delta, reflection=np.eye(3))
    with pytest.raises(InputError):
        sw.kappa_flip_check(family, 2 * family.delta, reflection=np.diag([1.0, 2.0, -1.0]))


def test_double_reflection_restores(family):
    r = np.diag([1.0, 1.0, -1.0])
    before, after = sw.reflection_flip(wall_section(family, family.delta).as_sphere_map(), r)
    from k3sw.degree import compose_linear, degree

    back = degree(compose_linear(r, compose_linear(r, wall_section(family, family.delta).as_sphere_map())))
    assert (before.degree, after.degree, back.degree) == (1, -1, 1)


# ---- equivariance


def test_isometry_helpers():
    for m in (sw.block_swap_isometry("U1", "U2"), sw.block_swap_isometry("E8a", "E8b"),
              sw.block_negation_isometry("U1"), sw.block_negation_isometry("E8b")):
        assert K3.is_isometry(m)
    with pytest.raises(InputError):
        sw.block_swap_isometry("U1", "E8a")


def test_equivariance_identity_and_swap(matrix10, roots15):
    v = sw.isometry_equivariance_check(np.eye(22, dtype=np.int64), matrix10, roots15)
    assert v.passed and v.canonical.entries == matrix10.entries
    v = sw.isometry_equivariance_check(sw.block_swap_isometry(), matrix10, roots15)
    assert v.passed and set(v.delta_signs) == {1}


def test_equivariance_negation_flips_signs(matrix10, roots15):
    m = sw.block_negation_isometry("U1")
    v = sw.isometry_equivariance_check(m, matrix10, roots15)
    assert v.passed
    assert v.delta_signs[0] == -1 and v.delta_signs[1:] == [1] * 9
    assert v.predicted[0][0] == 1 and v.transported_entries[0][0] == 1


def test_equivariance_rejects_non_isometry(matrix10, roots15):
    bad = np.eye(22, dtype=np.int64)
    bad[0, 1] = 1
    with pytest.raises(InputError):
        sw.isometry_equivariance_check(bad, matrix10, roots15)
    with pytest.raises(InputError):
        sw.isometry_equivariance_check(np.eye(22) * 1.5, matrix10, roots15)
