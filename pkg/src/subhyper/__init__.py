"""Exact-arithmetic laboratory for subspace-hypercyclic operators on sequence spaces."""

__version__ = "0.1.0"

from .core import (
    ONE,
    ZERO,
    CertifiedVector,
    DyadicScalar,
    NormKind,
    SparseVector,
    basis,
    dyadic,
    lt_pow2,
    norm,
    pow2,
    scalar_op,
    vec_axpy,
)
from .operators import (
    B,
    F,
    I,
    BiorthogonalSystem,
    OperatorExpr,
    WeightRule,
    apply,
    apply_power,
    is_left_inverse_on,
    kernel_index,
    operator_norm_bound,
    parse_operator,
)
from .constructions import (
    SubspaceSpec,
    build_S,
    build_T,
    check_invariance,
    check_quasiconjugacy,
    phi,
)
from .criterion import (
    CriterionWitness,
    DecayCertificate,
    HypercyclicCertificate,
    PowerSequence,
    build_certificate,
    build_vector,
    check_conditions,
    check_le_criterion,
    decay_threshold,
    select_subsequence,
    verify_certificate,
)
from .orbits import dense_prefix, density_report, enumerate_dense, orbit

__all__ = [
    "ONE",
    "ZERO",
    "CertifiedVector",
    "DyadicScalar",
    "NormKind",
    "SparseVector",
    "basis",
    "dyadic",
    "lt_pow2",
    "norm",
    "pow2",
    "scalar_op",
    "vec_axpy",
    "B",
    "F",
    "I",
    "BiorthogonalSystem",
    "OperatorExpr",
    "WeightRule",
    "apply",
    "apply_power",
    "is_left_inverse_on",
    "kernel_index",
    "operator_norm_bound",
    "parse_operator",
    "SubspaceSpec",
    "build_S",
    "build_T",
    "check_invariance",
    "check_quasiconjugacy",
    "phi",
    "CriterionWitness",
    "DecayCertificate",
    "HypercyclicCertificate",
    "PowerSequence",
    "build_certificate",
    "build_vector",
    "check_conditions",
    "check_le_criterion",
    "decay_threshold",
    "select_subsequence",
    "verify_certificate",
    "dense_prefix",
    "density_report",
    "enumerate_dense",
    "orbit",
]
