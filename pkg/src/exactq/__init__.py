"""Exact query algorithms for deciding the Hamming weight of a bit string.

The package builds adaptive branching programs that decide, with zero
error, whether an n-bit input has weight k or l, simulates them
exhaustively on all inputs, and certifies query counts, norm
conservation, and polynomial-degree bounds.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .algorithms import (
    appendix_a_angles,
    appendix_a_constants,
    appendix_a_residuals,
    build_appendix_a,
    build_equality,
    build_exact_k,
    build_exact_kl,
    build_general_unbalance,
    build_unb,
    build_unbr,
    build_uw_step,
    exact_kl_claimed_queries,
    precomputed_state,
    unb_claimed_queries,
    unbr_claimed_queries,
    weight_truth,
)
from .errors import (
    BindingConflict,
    ConstraintViolation,
    DegenerateCase,
    DivergedChain,
    ExactQError,
    InconsistentSpec,
    IndexOutOfRange,
    NoChain,
    NotIsometry,
    NotSymmetrizable,
    PartitionGap,
    ZeroWitnessMissing,
)
from .gadgets import OracleSpec, hadamard_gadget, oracle_apply, q_rotation, r_rotation, u_gadget
from .plans import (
    Call,
    GadgetStep,
    MeasureStep,
    Output,
    Plan,
    PrepareState,
    QueryStep,
    const,
    drop_wires,
    identity_wires,
    var,
)
from .recurrence import (
    CHAIN_BASES,
    DECAY_START,
    GammaChain,
    StepConstants,
    chain_gamma_at,
    gamma_chain,
    gamma_next,
    quartic_decay,
    solve_step_constants,
)
from .state_core import (
    Binding,
    IsometryGadget,
    LabeledState,
    MeasurementPartition,
    bind,
    identity_binding,
    isometry_from_columns,
)
from .sym import OUTWARD, STRATEGIES, SymSpec, TWO_SIDED, build_sym, sym_claimed_queries
from .verifier import (
    LeafDegreeRecord,
    MultilinearPoly,
    RunTree,
    SymmetrizedPoly,
    VerificationReport,
    audit_leaf_degrees,
    extract_multilinear,
    root_count_lower_bound,
    run_on_input,
    symmetrize_to_univariate,
    tree_leaves,
    verify_exactness,
)

__all__ = [
    "__version__",
    "appendix_a_angles",
    "appendix_a_constants",
    "appendix_a_residuals",
    "build_appendix_a",
    "build_equality",
    "build_exact_k",
    "build_exact_kl",
    "build_general_unbalance",
    "build_unb",
    "build_unbr",
    "build_uw_step",
    "exact_kl_claimed_queries",
    "precomputed_state",
    "unb_claimed_queries",
    "unbr_claimed_queries",
    "weight_truth",
    "BindingConflict",
    "ConstraintViolation",
    "DegenerateCase",
    "DivergedChain",
    "ExactQError",
    "InconsistentSpec",
    "IndexOutOfRange",
    "NoChain",
    "NotIsometry",
    "NotSymmetrizable",
    "PartitionGap",
    "ZeroWitnessMissing",
    "OracleSpec",
    "hadamard_gadget",
    "oracle_apply",
    "q_rotation",
    "r_rotation",
    "u_gadget",
    "Call",
    "GadgetStep",
    "MeasureStep",
    "Output",
    "Plan",
    "PrepareState",
    "QueryStep",
    "const",
    "drop_wires",
    "identity_wires",
    "var",
    "CHAIN_BASES",
    "DECAY_START",
    "GammaChain",
    "StepConstants",
    "chain_gamma_at",
    "gamma_chain",
    "gamma_next",
    "quartic_decay",
    "solve_step_constants",
    "Binding",
    "IsometryGadget",
    "LabeledState",
    "MeasurementPartition",
    "bind",
    "identity_binding",
    "isometry_from_columns",
    "OUTWARD",
    "STRATEGIES",
    "SymSpec",
    "TWO_SIDED",
    "build_sym",
    "sym_claimed_queries",
    "LeafDegreeRecord",
    "MultilinearPoly",
    "RunTree",
    "SymmetrizedPoly",
    "VerificationReport",
    "audit_leaf_degrees",
    "extract_multilinear",
    "root_count_lower_bound",
    "run_on_input",
    "symmetrize_to_univariate",
    "tree_leaves",
    "verify_exactness",
]
