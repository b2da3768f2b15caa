"""Families Seiberg-Witten invariants of K3 along the walls of its period domain.

The package enumerates roots of the K3 lattice, builds sphere families of
period planes around a wall, and computes invariants as mapping degrees.
"""

from ._version import __version__
from .degree import DegreeCertificate, SphereMap, degree, degree_kronecker, degree_preimage
from .errors import (
    ComputationError,
    ConventionError,
    InconsistencyError,
    InputError,
    K3SWError,
    ResourceError,
)
from .family import SphereFamily, WallSection, certify_family, dual_frame_at, frame_at, wall_section
from .lattice import K3, K3Lattice, RootSet, enumerate_roots, split_roots
from .period import BasePoint, PeriodFrame, construct_base_point, orthonormalize_in_subspace, project_rho_H
from .sw import (
    SpinCClass,
    SwMatrix,
    conjugation_sign,
    expected_dimension,
    finiteness_scan,
    isometry_equivariance_check,
    kappa_flip_check,
    sw_matrix,
    sw_of_family,
    validity_constant,
)

__all__ = [
    "__version__",
    "BasePoint", "ComputationError", "ConventionError", "DegreeCertificate", "InconsistencyError",
    "InputError", "K3", "K3Lattice", "K3SWError", "PeriodFrame", "ResourceError", "RootSet",
    "SphereFamily", "SphereMap", "SpinCClass", "SwMatrix", "WallSection",
    "certify_family", "conjugation_sign", "construct_base_point", "degree", "degree_kronecker",
    "degree_preimage", "dual_frame_at", "enumerate_roots", "expected_dimension", "finiteness_scan",
    "frame_at", "isometry_equivariance_check", "kappa_flip_check", "orthonormalize_in_subspace",
    "project_rho_H", "split_roots", "sw_matrix", "sw_of_family", "validity_constant", "wall_section",
]
