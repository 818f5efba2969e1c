"""Exact constructions for the multiparametric orthogonal quantum
groups: R matrices and their quadratic invariants, the rotation and
inhomogeneous coordinate algebras, the regular-functional envelope, and
two bicovariant differential calculi, all over an exact Laurent
parameter ring."""

__version__ = "0.1.0"

from .scalars import ParamSpace, Scalar
from .itensor import IndexGeometry, SparseTensor4
from .rmatrix import build_R, build_bundle, verify_rmatrix_suite, \
    decompose_embedding
from .presentations import build_presentation, iso_normal_system, reduce, \
    costructure, project, section, ideal_membership, quantum_determinant
from .envelope import l_functional, eval_functional, pairing, \
    verify_envelope_suite, verify_parameter_collapse, verify_pairing_axioms
from .calculus import build_chi, tangent_basis, verify_qlie, differential, \
    bimodule_commute, adjoint_coaction_check
from .report import Report
from .cli import run
